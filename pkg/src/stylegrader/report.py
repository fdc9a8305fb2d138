"""End-to-end grading of one submission and the JSON report it produces."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Sequence

from . import penalty as penalty_mod
from .baseline import BaselineRuleSet
from .grading import aggregate, tally
from .history import HistoryStore
from .inspectors import InspectorConfig, inspect
from .penalty import DEFAULT_WINDOW, PenaltyResult, SubmissionRecord
from .taxonomy import Difficulty, Grade, Issue, IssueCategory, RuleRegistry, grade_to_score

SUMMARIES = {
    Grade.EXCELLENT: "Great job: no common code quality issues were found.",
    Grade.GOOD: "Nice work. A few issues are still worth fixing.",
    Grade.MODERATE: "Several issues make this code harder to work with. Go through the list below.",
    Grade.BAD: "This code has many quality issues. Start with error-prone and complexity issues.",
}


@dataclass(frozen=True)
class MessageCatalog:
    """Replacement explanations keyed by ``(inspector, rule_id)``."""

    entries: Mapping[tuple[str, str], str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for key, text in self.entries.items():
            if not text or not text.strip():
                raise ValueError(f"empty explanation for {key[0]}:{key[1]}")
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    @classmethod
    def from_registry(cls, registry: RuleRegistry) -> MessageCatalog:
        return cls({r.key: r.custom_message for r in registry.rules if r.custom_message})

    def get(self, inspector: str, rule_id: str) -> str | None:
        return self.entries.get((inspector, rule_id))


@dataclass(frozen=True)
class ReportedIssue:
    issue: Issue
    text: str


@dataclass(frozen=True)
class QualityReport:
    grade: Grade
    summary: str
    issues: tuple[ReportedIssue, ...]
    penalty: PenaltyResult | None
    statistics: Mapping[str, Any]
    warnings: tuple[str, ...] = ()
    #: every classified issue before difficulty filtering; not serialized
    found: tuple[Issue, ...] = ()

    @property
    def score(self) -> int:
        return grade_to_score(self.grade)

    def to_document(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "quality": {"code": self.grade.name, "score": self.score, "text": self.summary},
            "issues": [
                {
                    "code": r.issue.rule_id,
                    "inspector": r.issue.inspector,
                    "line": r.issue.line,
                    "column": r.issue.column,
                    "category": r.issue.category.value,
                    "difficulty": r.issue.difficulty.name,
                    "text": r.text,
                }
                for r in self.issues
            ],
        }
        if self.penalty is not None:
            doc["penalty"] = {
                "coefficient": self.penalty.coefficient,
                "influencing_rules": [
                    {"inspector": inspector, "code": rule_id}
                    for inspector, rule_id in sorted(self.penalty.influencing_rules)
                ],
            }
        doc["statistics"] = {
            "by_category": dict(self.statistics["by_category"]),
            "total": self.statistics["total"],
        }
        doc["warnings"] = list(self.warnings)
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, ensure_ascii=False) + "\n"


def report_schema() -> dict[str, Any]:
    text = resources.files("stylegrader.data").joinpath("report.schema.json").read_text("utf-8")
    return json.loads(text)


def filter_by_difficulty(issues: Iterable[Issue], level: Difficulty) -> list[Issue]:
    """Keep issues a learner at ``level`` is expected to handle (difficulty <= level)."""
    return [i for i in issues if i.difficulty <= level]


def resolve_message(issue: Issue, catalog: MessageCatalog) -> str:
    text = catalog.get(issue.inspector, issue.rule_id) or issue.message
    return text if text.strip() else f"{issue.inspector} {issue.rule_id}"


def statistics(issues: Sequence[Issue]) -> dict[str, Any]:
    by_category = {c.value: 0 for c in IssueCategory}
    for issue in issues:
        by_category[issue.category.value] += 1
    return {"by_category": by_category, "total": len(issues)}


def build_report(
    source_path: str | Path,
    language: str,
    level: Difficulty,
    registry: RuleRegistry,
    configs: Iterable[InspectorConfig] = (),
    store: HistoryStore | None = None,
    student_id: str | None = None,
    *,
    window: int = DEFAULT_WINDOW,
    catalog: MessageCatalog | None = None,
    baseline_rules: BaselineRuleSet | None = None,
    timestamp: datetime | None = None,
) -> QualityReport:
    """Grade one submission.

    Issues above ``level`` are dropped before grading, so the grade is always
    justified by the issues in the report. When ``store`` is given the
    student's recent history can lower the grade, and the full (unfiltered)
    issue list of this submission is appended to it afterwards.
    """
    if store is not None and not student_id:
        raise ValueError("student_id is required when a history store is given")
    if catalog is None:
        catalog = MessageCatalog.from_registry(registry)

    found, warnings = inspect(source_path, language, registry, configs, baseline_rules)
    visible = filter_by_difficulty(found, level)
    grade = aggregate(tally(visible, registry))

    result = None
    if store is not None:
        history = store.load_window(student_id, language, window, warnings)
        result = penalty_mod.evaluate(grade, visible, history, registry, window)
        grade = result.final_grade

    report = QualityReport(
        grade=grade,
        summary=SUMMARIES[grade],
        issues=tuple(ReportedIssue(i, resolve_message(i, catalog)) for i in visible),
        penalty=result,
        statistics=statistics(visible),
        warnings=tuple(warnings),
        found=tuple(found),
    )
    if store is not None:
        store.append(SubmissionRecord.from_issues(student_id, language, found, timestamp))
    return report
