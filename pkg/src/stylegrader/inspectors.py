"""Run external linters and turn their reports into :class:`RawFinding` lists.

Each adapter knows how to build the command line for one tool and how to
parse the one output format we force it into:

=========== ======== ===================================
inspector   language output format
=========== ======== ===================================
flake8      python   default text (``path:row:col: CODE message``)
pylint      python   ``--output-format=json``
checkstyle  java     ``-f xml``
pmd         java     ``-f xml``
=========== ======== ===================================

Tool failures never propagate out of :func:`inspect`; they become warnings.
"""

from __future__ import annotations

import json
import logging
import os
import re
import shutil
import subprocess
import xml.etree.ElementTree as ET
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import baseline
from .errors import (
    InspectorTimeout,
    ParseError,
    SourceNotFound,
    SpawnFailure,
    StyleGraderError,
    ToolNotFound,
)
from .findings import RawFinding
from .taxonomy import Issue, RuleRegistry, classify_issue

log = logging.getLogger(__name__)

#: Extra directories (``os.pathsep`` separated) searched for linter executables
#: before ``PATH``.
TOOL_PATH_ENV = "STYLEGRADER_TOOL_PATH"

__all__ = [
    "InspectorConfig",
    "RawFinding",
    "TOOL_PATH_ENV",
    "default_inspector_configs",
    "inspect",
    "load_inspector_configs",
    "parse_checkstyle",
    "parse_flake8",
    "parse_pmd",
    "parse_pylint",
    "run_inspector",
]


@dataclass(frozen=True)
class InspectorConfig:
    inspector: str
    executable: str
    extra_args: tuple[str, ...] = ()
    timeout: float = 60.0
    enabled: bool = True

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError(f"{self.inspector}: timeout must be positive")
        if self.inspector not in ADAPTERS:
            raise ValueError(f"unknown inspector {self.inspector!r}")


# --- parsers -------------------------------------------------------------------

_FLAKE8_LINE = re.compile(r"^(?P<path>.*?):(?P<row>\d+):(?P<col>\d+): (?P<code>[A-Z]+\d+) (?P<text>.*)$")

# Measured values embedded in linter messages, keyed by rule id.
_FLAKE8_METRICS = {
    "C901": re.compile(r"is too complex \((\d+)\)"),
    "E501": re.compile(r"line too long \((\d+) > \d+ characters\)"),
}
_PYLINT_RATIO = re.compile(r"\((\d+)/\d+\)")
_CHECKSTYLE_METRICS = (
    re.compile(r"is (\d[\d,]*) \(max allowed is \d[\d,]*\)"),
    re.compile(r"\(found (\d+)\)"),
)
_PMD_METRICS = re.compile(r"complexity of (\d[\d,]*)")


def _number(match: re.Match[str] | None) -> float | None:
    if match is None:
        return None
    return float(match.group(1).replace(",", ""))


def _skip(warnings: list[str] | None, text: str) -> None:
    if warnings is None:
        log.warning(text)
    else:
        log.debug(text)
        warnings.append(text)


def parse_flake8(output: str, warnings: list[str] | None = None) -> list[RawFinding]:
    """Parse flake8's default text format.

    Lines that do not look like a finding are skipped and reported through
    ``warnings``.
    """
    findings = []
    for n, line in enumerate(output.splitlines(), 1):
        if not line.strip():
            continue
        m = _FLAKE8_LINE.match(line)
        if m is None or int(m["row"]) < 1:
            _skip(warnings, f"flake8: skipped unparseable output line {n}: {line[:80]!r}")
            continue
        code, text = m["code"], m["text"]
        pattern = _FLAKE8_METRICS.get(code)
        findings.append(
            RawFinding(
                inspector="flake8",
                rule_id=code,
                line=int(m["row"]),
                column=int(m["col"]),
                message=text,
                metric_value=_number(pattern.search(text)) if pattern else None,
            )
        )
    return findings


def parse_pylint(output: str, warnings: list[str] | None = None) -> list[RawFinding]:
    """Parse ``pylint --output-format=json`` (an array of message records)."""
    try:
        records = json.loads(output) if output.strip() else []
    except json.JSONDecodeError as exc:
        raise ParseError(f"pylint: malformed JSON report: {exc.msg}", f"line {exc.lineno}") from None
    if not isinstance(records, list):
        raise ParseError("pylint: report is not a JSON array")

    findings = []
    for n, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise ParseError("pylint: record is not an object", f"[{n}]")
        rule_id = rec.get("message-id") or rec.get("messageId") or rec.get("symbol")
        line = rec.get("line")
        if not rule_id or not isinstance(line, int) or line < 1:
            _skip(warnings, f"pylint: skipped record {n} without message-id or line")
            continue
        message = rec.get("message", "")
        findings.append(
            RawFinding(
                inspector="pylint",
                rule_id=rule_id,
                line=line,
                column=max(int(rec.get("column") or 0), 0),
                message=message,
                metric_value=_number(_PYLINT_RATIO.search(message)),
            )
        )
    return findings


def _xml_root(output: str, tool: str, root_tag: str) -> ET.Element:
    # Tools sometimes print banners around the report; keep only the markup.
    start, end = output.find("<"), output.rfind(">") + 1
    if start < 0 or end <= start:
        raise ParseError(f"{tool}: no XML document in output")
    try:
        root = ET.fromstring(output[start:end])
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(f"{tool}: malformed XML report", f"line {line}, column {col}") from None
    if _local(root.tag) != root_tag:
        raise ParseError(f"{tool}: expected <{root_tag}> root element, got <{root.tag}>")
    return root


def _local(tag: str) -> str:
    # PMD reports carry an XML namespace.
    return tag.rsplit("}", 1)[-1]


def _int_attr(elem: ET.Element, name: str) -> int | None:
    value = elem.get(name)
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        return None


def parse_checkstyle(output: str, warnings: list[str] | None = None) -> list[RawFinding]:
    """Parse a Checkstyle XML report (``-f xml``)."""
    root = _xml_root(output, "checkstyle", "checkstyle")
    findings = []
    for elem in root.iter():
        if _local(elem.tag) != "error":
            continue
        line = _int_attr(elem, "line")
        source = elem.get("source", "")
        rule_id = source.rsplit(".", 1)[-1]
        if line is None or line < 1 or not rule_id:
            _skip(warnings, f"checkstyle: skipped <error> without line or source ({source or '?'})")
            continue
        message = elem.get("message", "")
        metric = None
        for pattern in _CHECKSTYLE_METRICS:
            metric = _number(pattern.search(message))
            if metric is not None:
                break
        findings.append(
            RawFinding(
                inspector="checkstyle",
                rule_id=rule_id,
                line=line,
                column=max(_int_attr(elem, "column") or 0, 0),
                message=message,
                metric_value=metric,
            )
        )
    return findings


def parse_pmd(output: str, warnings: list[str] | None = None) -> list[RawFinding]:
    """Parse a PMD XML report (``-f xml``)."""
    root = _xml_root(output, "pmd", "pmd")
    findings = []
    for elem in root.iter():
        tag = _local(elem.tag)
        if tag == "error":
            _skip(warnings, f"pmd: could not analyse {elem.get('filename', '?')}: {elem.get('msg', '')}")
            continue
        if tag != "violation":
            continue
        line = _int_attr(elem, "beginline")
        rule_id = elem.get("rule", "")
        if line is None or line < 1 or not rule_id:
            _skip(warnings, f"pmd: skipped <violation> without beginline or rule ({rule_id or '?'})")
            continue
        message = " ".join((elem.text or "").split())
        findings.append(
            RawFinding(
                inspector="pmd",
                rule_id=rule_id,
                line=line,
                column=max(_int_attr(elem, "begincolumn") or 0, 0),
                message=message,
                metric_value=_number(_PMD_METRICS.search(message)),
            )
        )
    return findings


# --- adapters --------------------------------------------------------------------


@dataclass(frozen=True)
class Adapter:
    language: str
    build_argv: Callable[[str, tuple[str, ...], str], list[str]]
    parse: Callable[..., list[RawFinding]]


ADAPTERS: dict[str, Adapter] = {
    "flake8": Adapter(
        "python",
        lambda exe, extra, src: [exe, "--format=default", "--max-complexity=10", *extra, src],
        parse_flake8,
    ),
    "pylint": Adapter(
        "python",
        lambda exe, extra, src: [
            exe, "--output-format=json", "--score=n", "--reports=n", "--persistent=n", *extra, src,
        ],
        parse_pylint,
    ),
    "checkstyle": Adapter(
        "java",
        lambda exe, extra, src: [exe, "-f", "xml", "-c", "/sun_checks.xml", *extra, src],
        parse_checkstyle,
    ),
    "pmd": Adapter(
        "java",
        lambda exe, extra, src: [
            exe, "check", "--no-cache", "--no-progress", "-f", "xml",
            "-R", "rulesets/java/quickstart.xml", *extra, "-d", src,
        ],
        parse_pmd,
    ),
}


def resolve_executable(executable: str) -> str | None:
    """Locate an executable, honouring :data:`TOOL_PATH_ENV` before ``PATH``."""
    if os.path.dirname(executable):
        return executable if os.path.isfile(executable) and os.access(executable, os.X_OK) else None
    extra = os.environ.get(TOOL_PATH_ENV)
    if extra:
        found = shutil.which(executable, path=extra)
        if found:
            return found
    return shutil.which(executable)


def run_inspector(source_path: str | Path, cfg: InspectorConfig) -> tuple[bytes, int]:
    """Run one linter on ``source_path`` and return its raw stdout and exit status."""
    exe = resolve_executable(cfg.executable)
    if exe is None:
        raise ToolNotFound(cfg.inspector, f"executable {cfg.executable!r} not found")
    argv = ADAPTERS[cfg.inspector].build_argv(exe, tuple(cfg.extra_args), str(source_path))
    log.debug("running %s", argv)
    try:
        proc = subprocess.run(
            argv,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            stdin=subprocess.DEVNULL,
            timeout=cfg.timeout,
            check=False,
        )
    except subprocess.TimeoutExpired:
        raise InspectorTimeout(cfg.inspector, f"timed out after {cfg.timeout:g}s") from None
    except FileNotFoundError:
        raise ToolNotFound(cfg.inspector, f"executable {cfg.executable!r} not found") from None
    except OSError as exc:
        raise SpawnFailure(cfg.inspector, str(exc)) from None
    if proc.stderr:
        log.debug("%s stderr: %s", cfg.inspector, proc.stderr.decode("utf-8", "replace")[:2000])
    return proc.stdout, proc.returncode


# --- configuration ---------------------------------------------------------------


def configs_from_document(doc: dict) -> list[InspectorConfig]:
    configs = []
    for n, entry in enumerate(doc.get("inspectors", [])):
        try:
            configs.append(
                InspectorConfig(
                    inspector=entry["inspector"],
                    executable=entry.get("executable", entry["inspector"]),
                    extra_args=tuple(entry.get("extra_args", ())),
                    timeout=float(entry.get("timeout", 60)),
                    enabled=bool(entry.get("enabled", True)),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"invalid inspector entry: {exc}", f"inspectors[{n}]") from None
    return configs


def load_inspector_configs(path: str | Path) -> list[InspectorConfig]:
    """Read an inspector configuration file (TOML, ``[[inspectors]]`` tables)."""
    try:
        doc = tomllib.loads(Path(path).read_text("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return configs_from_document(doc)


def default_inspector_configs() -> list[InspectorConfig]:
    from importlib import resources

    text = resources.files("stylegrader.data").joinpath("inspectors.toml").read_text("utf-8")
    return configs_from_document(tomllib.loads(text))


# --- orchestration ---------------------------------------------------------------


@dataclass
class _Outcome:
    findings: list[RawFinding] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _run_external(source: Path, cfg: InspectorConfig) -> _Outcome:
    out = _Outcome()
    try:
        raw, status = run_inspector(source, cfg)
        text = raw.decode("utf-8", "replace")
        out.findings = ADAPTERS[cfg.inspector].parse(text, out.warnings)
        if status != 0 and not out.findings and not text.strip():
            out.warnings.append(f"{cfg.inspector}: exited with status {status} and produced no output")
    except StyleGraderError as exc:
        out.warnings.append(f"{exc}; inspection skipped")
    except Exception as exc:  # a broken tool must not break grading
        log.exception("%s failed", cfg.inspector)
        out.warnings.append(f"{cfg.inspector}: unexpected failure ({type(exc).__name__}); inspection skipped")
    return out


def _sort_key(issue: Issue) -> tuple:
    return (issue.line, issue.column, issue.rule_id, issue.inspector, issue.message)


def inspect(
    source_path: str | Path,
    language: str,
    registry: RuleRegistry,
    configs: Iterable[InspectorConfig] = (),
    rules: baseline.BaselineRuleSet | None = None,
) -> tuple[list[Issue], list[str]]:
    """Find every registered issue in a submission.

    The built-in baseline checks always run. Enabled external inspectors for
    ``language`` run concurrently; any of them failing only adds a warning.
    Exact duplicates (same inspector, rule, line and column) are collapsed and
    the result is sorted by position.
    """
    source = Path(source_path)
    if not source.is_file():
        raise SourceNotFound(f"source file not found: {source}")

    text = source.read_bytes().decode("utf-8", "replace")
    outcomes = [_Outcome(findings=baseline.run_all(text, language, rules))]

    external = [c for c in configs if c.enabled and ADAPTERS[c.inspector].language == language]
    if external:
        with ThreadPoolExecutor(max_workers=len(external)) as pool:
            outcomes.extend(pool.map(lambda c: _run_external(source, c), external))

    issues: dict[tuple, Issue] = {}
    warnings: list[str] = []
    for outcome in outcomes:
        warnings.extend(outcome.warnings)
        for raw in outcome.findings:
            issue = classify_issue(raw, registry)
            if issue is None:
                continue
            issues.setdefault((issue.inspector, issue.rule_id, issue.line, issue.column), issue)
    return sorted(issues.values(), key=_sort_key), warnings
