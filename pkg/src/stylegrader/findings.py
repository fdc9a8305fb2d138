from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Iterable


@dataclass(frozen=True, slots=True)
class RawFinding:
    """One unclassified finding as reported by an inspector.

    ``metric_value`` is only set for checks that measure something
    (line length, cyclomatic complexity, ...).
    """

    inspector: str
    rule_id: str
    line: int
    column: int = 0
    message: str = ""
    metric_value: float | None = None

    def __post_init__(self) -> None:
        if not self.inspector or not self.rule_id:
            raise ValueError("inspector and rule_id must be non-empty")
        if self.line < 1:
            raise ValueError(f"line must be >= 1, got {self.line}")
        if self.column < 0:
            raise ValueError(f"column must be >= 0, got {self.column}")


def dump_findings(findings: Iterable[RawFinding]) -> str:
    """Canonical JSON text for a list of findings (stable key order, trailing newline)."""
    return json.dumps([asdict(f) for f in findings], indent=2, ensure_ascii=False) + "\n"


def load_findings(text: str) -> list[RawFinding]:
    return [RawFinding(**item) for item in json.loads(text)]
