"""Append-only store of past submissions, one JSON-lines file per student and language.

Layout::

    <root>/<language>/<sha256(student_id)>.jsonl

Each line is one record (see ``data/history.schema.json``)::

    {"timestamp": "2026-03-01T10:00:00Z", "language": "python",
     "issues": [["flake8", "E501"], ["pylint", "W0612"]]}

Raw student ids never touch the disk. Appends take an exclusive ``flock`` on
the target file; readers take a shared one.
"""

from __future__ import annotations

import fcntl
import hashlib
import json
import logging
import os
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator

from .errors import HistoryIOError
from .penalty import SubmissionRecord

log = logging.getLogger(__name__)

_LANGUAGE_SAFE = set("abcdefghijklmnopqrstuvwxyz0123456789_+-")


def student_token(student_id: str) -> str:
    return hashlib.sha256(student_id.encode("utf-8")).hexdigest()


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat(timespec="microseconds").replace("+00:00", "Z")


def parse_timestamp(text: str) -> datetime:
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        raise ValueError("timestamp without timezone")
    return ts.astimezone(timezone.utc)


def encode_record(record: SubmissionRecord) -> str:
    return json.dumps(
        {
            "timestamp": format_timestamp(record.timestamp),
            "language": record.language,
            "issues": [list(k) for k in record.issue_keys],
        },
        separators=(",", ":"),
    )


def decode_record(line: str, student_id: str) -> SubmissionRecord:
    doc = json.loads(line)
    if not isinstance(doc, dict) or not isinstance(doc.get("issues"), list):
        raise ValueError("record must be an object with an 'issues' array")
    keys = []
    for key in doc["issues"]:
        if not (isinstance(key, list) and len(key) == 2 and all(isinstance(k, str) and k for k in key)):
            raise ValueError(f"bad issue key {key!r}")
        keys.append((key[0], key[1]))
    return SubmissionRecord(
        student_id=student_id,
        language=str(doc["language"]),
        timestamp=parse_timestamp(str(doc["timestamp"])),
        issue_keys=tuple(keys),
    )


@contextmanager
def _locked(path: Path, mode: str, lock: int) -> Iterator:
    with open(path, mode, encoding="utf-8", errors="replace") as fh:
        fcntl.flock(fh.fileno(), lock)
        try:
            yield fh
        finally:
            fcntl.flock(fh.fileno(), fcntl.LOCK_UN)


@dataclass(frozen=True)
class HistoryStore:
    root: Path

    def __init__(self, root: str | Path):
        object.__setattr__(self, "root", Path(root))

    def path_for(self, student_id: str, language: str) -> Path:
        if not language or not set(language) <= _LANGUAGE_SAFE:
            raise ValueError(f"unsupported language name {language!r}")
        return self.root / language / f"{student_token(student_id)}.jsonl"

    def append(self, record: SubmissionRecord) -> None:
        path = self.path_for(record.student_id, record.language)
        line = encode_record(record) + "\n"
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with _locked(path, "a", fcntl.LOCK_EX) as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise HistoryIOError(f"cannot append to history {path}: {exc}") from exc

    def load_window(
        self, student_id: str, language: str, window: int, warnings: list[str] | None = None
    ) -> list[SubmissionRecord]:
        """The ``window`` newest records for this student and language, newest first.

        Malformed lines are skipped; each one adds a message to ``warnings``.
        """
        if window < 1:
            raise ValueError("window must be >= 1")
        path = self.path_for(student_id, language)
        try:
            with _locked(path, "r", fcntl.LOCK_SH) as fh:
                lines = fh.readlines()
        except FileNotFoundError:
            return []
        except OSError as exc:
            raise HistoryIOError(f"cannot read history {path}: {exc}") from exc

        records = []
        for n, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                record = decode_record(line, student_id)
            except (ValueError, KeyError, TypeError) as exc:
                msg = f"history {path.name}: skipped corrupt record on line {n} ({exc})"
                log.warning(msg)
                if warnings is not None:
                    warnings.append(msg)
                continue
            if record.language != language:
                continue
            records.append((record.timestamp, n, record))
        records.sort(key=lambda item: (item[0], item[1]), reverse=True)
        return [r for _, _, r in records[:window]]


def append(store: HistoryStore, record: SubmissionRecord) -> None:
    store.append(record)


def load_window(store: HistoryStore, student_id: str, language: str, window: int) -> list[SubmissionRecord]:
    return store.load_window(student_id, language, window)
