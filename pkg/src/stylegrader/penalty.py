"""Recurring-error detection and the grade penalty it triggers.

A current issue is *recurring* when an issue with the same
``(inspector, rule_id)`` appeared in one of the student's recent submissions
in the same language. Line numbers are ignored on purpose: they shift
between attempts.

Each subcategory gets a coefficient from its prevalence, difficulty and
importance criteria (sum divided by max, so in {0} or [1, 3]). The penalty
coefficient is the count-weighted mean of those coefficients over the
recurring issues, divided by 3 to land in [0, 1]. It lowers the grade by

=================  =================
coefficient        levels lost
=================  =================
[0, 0.5)           0
[0.5, 0.7)         1
[0.7, 0.9)         2
[0.9, 1]           3
=================  =================

never going below BAD.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Sequence

from .taxonomy import Grade, Issue, PenaltyCriteria, RuleRegistry

DEFAULT_WINDOW = 10
MAX_RULE_COEFFICIENT = 3

# (lower bound, levels lost), highest bound first
_REDUCTIONS = ((0.9, 3), (0.7, 2), (0.5, 1))


@dataclass(frozen=True)
class SubmissionRecord:
    student_id: str
    language: str
    timestamp: datetime
    issue_keys: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if not self.student_id or not self.language:
            raise ValueError("student_id and language must be non-empty")
        if self.timestamp.tzinfo is None:
            raise ValueError("timestamp must be timezone-aware")
        object.__setattr__(self, "timestamp", self.timestamp.astimezone(timezone.utc))
        keys = []
        for inspector, rule_id in self.issue_keys:
            if not inspector or not rule_id:
                raise ValueError("issue keys must be non-empty strings")
            keys.append((str(inspector), str(rule_id)))
        # Stored sorted so that equal multisets compare equal.
        object.__setattr__(self, "issue_keys", tuple(sorted(keys)))

    @classmethod
    def from_issues(
        cls, student_id: str, language: str, issues: Iterable[Issue], timestamp: datetime | None = None
    ) -> SubmissionRecord:
        return cls(
            student_id=student_id,
            language=language,
            timestamp=timestamp or datetime.now(timezone.utc),
            issue_keys=tuple(i.key for i in issues),
        )


@dataclass(frozen=True)
class PenaltyResult:
    coefficient: float
    recurring_counts: dict[str, int] = field(default_factory=dict)
    influencing_rules: frozenset[tuple[str, str]] = frozenset()
    initial_grade: Grade = Grade.EXCELLENT
    final_grade: Grade = Grade.EXCELLENT


def find_recurring(current: Sequence[Issue], history: Sequence[SubmissionRecord], window: int = DEFAULT_WINDOW) -> list[Issue]:
    """Current issues whose rule also fired in one of the ``window`` newest records.

    ``history`` must be ordered newest first. Every current occurrence is kept.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    seen = {key for record in history[:window] for key in record.issue_keys}
    return [issue for issue in current if issue.key in seen]


def rule_coefficient(c: PenaltyCriteria) -> float:
    top = max(c.prevalence, c.difficulty, c.importance)
    if top == 0:
        return 0.0
    return (c.prevalence + c.difficulty + c.importance) / top


def penalty_coefficient(recurring: Iterable[Issue], registry: RuleRegistry) -> float:
    counts = Counter(issue.subcategory_id for issue in recurring)
    total = sum(counts.values())
    if total == 0:
        return 0.0
    weighted = sum(n * rule_coefficient(registry.subcategory_criteria(sid)) for sid, n in counts.items())
    return min(max(weighted / (MAX_RULE_COEFFICIENT * total), 0.0), 1.0)


def apply_penalty(grade: Grade, coefficient: float) -> Grade:
    if not 0.0 <= coefficient <= 1.0:
        raise ValueError(f"coefficient must be in [0, 1], got {coefficient}")
    for bound, levels in _REDUCTIONS:
        if coefficient >= bound:
            return grade.lowered(levels)
    return grade


def evaluate(
    grade: Grade,
    current: Sequence[Issue],
    history: Sequence[SubmissionRecord],
    registry: RuleRegistry,
    window: int = DEFAULT_WINDOW,
) -> PenaltyResult:
    """Run the whole penalty step for one submission."""
    recurring = find_recurring(current, history, window)
    coefficient = penalty_coefficient(recurring, registry)
    return PenaltyResult(
        coefficient=coefficient,
        recurring_counts=dict(Counter(i.subcategory_id for i in recurring)),
        influencing_rules=frozenset(i.key for i in recurring),
        initial_grade=grade,
        final_grade=apply_penalty(grade, coefficient),
    )
