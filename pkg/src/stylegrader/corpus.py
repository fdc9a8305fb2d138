"""Corpus-level statistics: per-student median issue counts and per-subcategory distributions.

A corpus is a directory with one sub-directory per student, each holding that
student's submissions::

    corpus/
      alice/
        1.py
        2.py
        manifest.txt      # optional: submission file names in order, one per line
      bob/
        1.java

Without a manifest, submissions are taken in lexicographic file-name order.
Files whose extension is not a supported language are ignored.
"""

from __future__ import annotations

import logging
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

from .baseline import BaselineRuleSet
from .errors import StyleGraderError
from .grading import tally
from .history import HistoryStore
from .inspectors import InspectorConfig, inspect
from .penalty import DEFAULT_WINDOW
from .report import build_report
from .taxonomy import Difficulty, Grade, RuleRegistry, SubcategoryKind

log = logging.getLogger(__name__)

EXTENSIONS = {".py": "python", ".java": "java"}
MANIFEST = "manifest.txt"


@dataclass(frozen=True)
class Submission:
    student_id: str
    path: Path
    language: str


@dataclass
class SubmissionResult:
    student_id: str
    file: str
    language: str
    grade: Grade
    issue_count: int


@dataclass
class CorpusStats:
    per_student_median: dict[str, int]
    histogram: dict[int, int]
    per_subcategory_distribution: dict[str, dict[str, Any]] = field(default_factory=dict)
    submissions: list[SubmissionResult] = field(default_factory=list)

    def to_document(self) -> dict[str, Any]:
        return {
            "students": len(self.per_student_median),
            "per_student_median": dict(sorted(self.per_student_median.items())),
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "per_subcategory_distribution": self.per_subcategory_distribution,
            "submissions": [
                {
                    "student": s.student_id,
                    "file": s.file,
                    "language": s.language,
                    "grade": s.grade.name,
                    "issues": s.issue_count,
                }
                for s in self.submissions
            ],
        }


def lower_median(values: Sequence[float]) -> float:
    """Median; for an even count, the lower of the two middle values."""
    if not values:
        raise ValueError("median of an empty sequence")
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def discover(corpus_dir: str | Path) -> dict[str, list[Submission]]:
    """Submissions per student, in grading order."""
    root = Path(corpus_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {root}")
    students: dict[str, list[Submission]] = {}
    for student_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        manifest = student_dir / MANIFEST
        if manifest.is_file():
            names = [ln.strip() for ln in manifest.read_text("utf-8").splitlines()]
            files = [student_dir / n for n in names if n and not n.startswith("#")]
        else:
            files = sorted(p for p in student_dir.iterdir() if p.is_file())
        subs = [
            Submission(student_dir.name, f, EXTENSIONS[f.suffix])
            for f in files
            if f.suffix in EXTENSIONS
        ]
        if subs:
            students[student_dir.name] = subs
    return students


RegistryLookup = Callable[[str], RuleRegistry]


def _as_lookup(registries: Mapping[str, RuleRegistry] | RegistryLookup) -> RegistryLookup:
    return registries.__getitem__ if isinstance(registries, Mapping) else registries


def batch(
    corpus_dir: str | Path,
    registries: Mapping[str, RuleRegistry] | RegistryLookup,
    configs: Iterable[InspectorConfig] = (),
    *,
    level: Difficulty = Difficulty.HARD,
    history: bool = True,
    history_dir: str | Path | None = None,
    window: int = DEFAULT_WINDOW,
    baseline_rules: BaselineRuleSet | None = None,
) -> CorpusStats:
    """Grade every submission and summarise issue counts per student.

    Each student's submissions are graded in order with their own history, so
    recurring errors are penalised as they would be live. With
    ``history=False`` every submission is graded independently.
    """
    lookup = _as_lookup(registries)
    configs = list(configs)
    students = discover(corpus_dir)

    with tempfile.TemporaryDirectory(prefix="stylegrader-history-") as tmp:
        store = None
        if history:
            store = HistoryStore(history_dir if history_dir is not None else tmp)
        results: list[SubmissionResult] = []
        medians: dict[str, int] = {}
        acc = _Distribution(lookup)
        for student_id, subs in students.items():
            counts = []
            for sub in subs:
                try:
                    report = build_report(
                        sub.path,
                        sub.language,
                        level,
                        lookup(sub.language),
                        configs,
                        store,
                        student_id if store is not None else None,
                        window=window,
                        baseline_rules=baseline_rules,
                    )
                except (StyleGraderError, OSError, KeyError) as exc:
                    log.warning("skipping %s: %s", sub.path, exc)
                    continue
                counts.append(len(report.issues))
                acc.add(sub.language, report.found)
                results.append(
                    SubmissionResult(student_id, sub.path.name, sub.language, report.grade, len(report.issues))
                )
            if counts:
                medians[student_id] = lower_median(counts)

    return CorpusStats(
        per_student_median=medians,
        histogram=dict(Counter(medians.values())),
        per_subcategory_distribution=acc.tables(),
        submissions=results,
    )


def _band(value: float, thresholds: Sequence[float]) -> Grade:
    excellent_max, good_max, moderate_max = thresholds
    if value <= excellent_max:
        return Grade.EXCELLENT
    if value <= good_max:
        return Grade.GOOD
    if value <= moderate_max:
        return Grade.MODERATE
    return Grade.BAD


def _key(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


class _Distribution:
    """Accumulates one value per (submission, subcategory)."""

    def __init__(self, lookup: RegistryLookup):
        self._lookup = lookup
        self._values: dict[str, dict[str, list[float]]] = {}
        self._submissions: Counter[str] = Counter()

    def add(self, language: str, issues: Sequence) -> None:
        registry = self._lookup(language)
        tallies = {t.subcategory_id: t for t in tally(issues, registry)}
        per_sub = self._values.setdefault(language, {s.subcategory_id: [] for s in registry.subcategories})
        for spec in registry.subcategories:
            t = tallies.get(spec.subcategory_id)
            if t is None:
                value = 0.0
            elif spec.kind is SubcategoryKind.COUNTABLE:
                value = float(t.count)
            else:
                value = float(t.worst_metric)
            per_sub[spec.subcategory_id].append(value)
        self._submissions[language] += 1

    def tables(self) -> dict[str, dict[str, Any]]:
        result: dict[str, dict[str, Any]] = {}
        for language, per_sub in sorted(self._values.items()):
            registry = self._lookup(language)
            tables = {}
            for spec in registry.subcategories:
                observed = per_sub[spec.subcategory_id]
                freq = Counter(observed)
                bands = Counter(_band(v, spec.thresholds) for v in observed)
                tables[spec.subcategory_id] = {
                    "category": spec.category.value,
                    "kind": spec.kind.value,
                    "thresholds": list(spec.thresholds),
                    "frequencies": {_key(v): c for v, c in sorted(freq.items())},
                    "bands": {g.name: bands[g] / len(observed) for g in sorted(Grade, reverse=True)},
                }
            result[language] = {"submissions": self._submissions[language], "subcategories": tables}
        return result


def distribution(
    corpus_dir: str | Path,
    registries: Mapping[str, RuleRegistry] | RegistryLookup,
    configs: Iterable[InspectorConfig] = (),
    *,
    baseline_rules: BaselineRuleSet | None = None,
) -> dict[str, dict[str, Any]]:
    """Per-language, per-subcategory frequency tables and grade-band fractions.

    For every submission each subcategory contributes one value: the issue
    count (countable) or the worst metric, 0 when nothing was found
    (measurable). ``bands`` gives the fraction of submissions falling in each
    grade band under the current thresholds. No difficulty filter or history
    penalty is applied.
    """
    lookup = _as_lookup(registries)
    configs = list(configs)
    acc = _Distribution(lookup)
    for subs in discover(corpus_dir).values():
        for sub in subs:
            try:
                issues, _ = inspect(sub.path, sub.language, lookup(sub.language), configs, baseline_rules)
            except (StyleGraderError, OSError, KeyError) as exc:
                log.warning("skipping %s: %s", sub.path, exc)
                continue
            acc.add(sub.language, issues)
    return acc.tables()
