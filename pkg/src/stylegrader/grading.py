"""Turn classified issues into subcategory grades and an overall grade."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import UnknownSubcategory
from .taxonomy import (
    Grade,
    Issue,
    RuleRegistry,
    SubcategoryKind,
    SubcategorySpec,
    grade_min,
)


@dataclass(frozen=True)
class SubcategoryTally:
    subcategory_id: str
    kind: SubcategoryKind
    count: int
    worst_metric: float | None
    grade: Grade
    grading: bool = True


def _ladder(value: float, spec: SubcategorySpec) -> Grade:
    # Upper bounds are inclusive.
    if value <= spec.excellent_max:
        return Grade.EXCELLENT
    if value <= spec.good_max:
        return Grade.GOOD
    if value <= spec.moderate_max:
        return Grade.MODERATE
    return Grade.BAD


def grade_countable(count: int, spec: SubcategorySpec) -> Grade:
    if spec.kind is not SubcategoryKind.COUNTABLE:
        raise ValueError(f"{spec.subcategory_id!r} is not countable")
    return _ladder(count, spec)


def grade_measurable(worst: float, spec: SubcategorySpec) -> Grade:
    if spec.kind is not SubcategoryKind.MEASURABLE:
        raise ValueError(f"{spec.subcategory_id!r} is not measurable")
    return _ladder(worst, spec)


def tally(issues: Iterable[Issue], registry: RuleRegistry) -> list[SubcategoryTally]:
    """One graded tally per subcategory that has at least one issue.

    Untouched subcategories are implicitly EXCELLENT and are not listed.
    Tallies come back in registry order.
    """
    counts: dict[str, int] = {}
    worst: dict[str, float] = {}
    for issue in issues:
        spec = registry.subcategory(issue.subcategory_id)
        if spec is None:
            raise UnknownSubcategory(
                f"issue {issue.inspector}:{issue.rule_id} has unknown subcategory {issue.subcategory_id!r}"
            )
        counts[spec.subcategory_id] = counts.get(spec.subcategory_id, 0) + 1
        if spec.kind is SubcategoryKind.MEASURABLE and issue.metric_value is not None:
            worst[spec.subcategory_id] = max(worst.get(spec.subcategory_id, issue.metric_value), issue.metric_value)

    tallies = []
    for spec in registry.subcategories:
        count = counts.get(spec.subcategory_id)
        if count is None:
            continue
        if spec.kind is SubcategoryKind.COUNTABLE:
            metric = None
            grade = grade_countable(count, spec)
        else:
            metric = worst.get(spec.subcategory_id)
            if metric is None:
                raise ValueError(f"measurable subcategory {spec.subcategory_id!r} has issues without metric values")
            grade = grade_measurable(metric, spec)
        tallies.append(SubcategoryTally(spec.subcategory_id, spec.kind, count, metric, grade, spec.grading))
    return tallies


def aggregate(tallies: Iterable[SubcategoryTally]) -> Grade:
    """The lowest grade over grading subcategories (EXCELLENT when there are none)."""
    result = Grade.EXCELLENT
    for t in tallies:
        if t.grading:
            result = grade_min(result, t.grade)
    return result
