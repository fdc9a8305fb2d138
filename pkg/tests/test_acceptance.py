"""Acceptance criteria, one test (or one parametrised group) per criterion.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion.
"""

from __future__ import annotations

import itertools
import json
import re
import shutil
import time
from collections import Counter
from datetime import datetime, timedelta, timezone
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import (
    FIXTURES,
    assert_valid_report,
    issue_sets,
    make_issue,
    small_registry,
    write_synthetic_corpus,
)
from stylegrader.corpus import batch
from stylegrader.findings import dump_findings
from stylegrader.grading import aggregate, grade_countable, grade_measurable, tally
from stylegrader.history import HistoryStore
from stylegrader.inspectors import ADAPTERS, InspectorConfig
from stylegrader.penalty import apply_penalty, penalty_coefficient, rule_coefficient
from stylegrader.report import build_report, filter_by_difficulty
from stylegrader.taxonomy import (
    Difficulty,
    Grade,
    IssueCategory,
    PenaltyCriteria,
    SubcategoryKind,
    default_registry,
    default_registry_path,
)
from test_history import operations, run_history_model

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

PY = default_registry("python")
JAVA = default_registry("java")
GRID = list(itertools.product(range(3), repeat=3))
G = Grade


# 1 ------------------------------------------------------------------------------

@pytest.mark.criterion(1, "penalty worked example: GOOD at 0.6 becomes MODERATE in under 1 ms")
def test_c01_worked_example():
    assert apply_penalty(Grade.GOOD, 0.6) is Grade.MODERATE
    timings = []
    for _ in range(200):
        start = time.perf_counter()
        apply_penalty(Grade.GOOD, 0.6)
        timings.append(time.perf_counter() - start)
    assert sorted(timings)[len(timings) // 2] < 1e-3


# 2 ------------------------------------------------------------------------------

COEFFICIENTS = [0, 0.25, 0.49, 0.5, 0.6, 0.69, 0.7, 0.8, 0.89, 0.9, 1.0]
# rows: initial grade; columns: COEFFICIENTS, written out from the reduction table
TABLE = {
    G.EXCELLENT: [G.EXCELLENT] * 3 + [G.GOOD] * 3 + [G.MODERATE] * 3 + [G.BAD] * 2,
    G.GOOD: [G.GOOD] * 3 + [G.MODERATE] * 3 + [G.BAD] * 3 + [G.BAD] * 2,
    G.MODERATE: [G.MODERATE] * 3 + [G.BAD] * 3 + [G.BAD] * 3 + [G.BAD] * 2,
    G.BAD: [G.BAD] * 11,
}
TABLE_CASES = [(g, c, TABLE[g][k]) for g in TABLE for k, c in enumerate(COEFFICIENTS)]


@pytest.mark.criterion(2, "reduction table: 44/44 grade x coefficient cases exact")
def test_c02_reduction_table():
    assert len(TABLE_CASES) == 44
    mismatches = [(g, c, e, apply_penalty(g, c)) for g, c, e in TABLE_CASES if apply_penalty(g, c) is not e]
    assert mismatches == []


# 3 ------------------------------------------------------------------------------

@pytest.mark.criterion(3, "per-rule coefficient over the 27-point criteria grid")
def test_c03_rule_coefficient_grid():
    oracle = lambda p, d, i: 0 if max(p, d, i) == 0 else (p + d + i) / max(p, d, i)  # noqa: E731
    assert len(GRID) == 27
    for p, d, i in GRID:
        assert rule_coefficient(PenaltyCriteria(p, d, i)) == oracle(p, d, i)
    assert rule_coefficient(PenaltyCriteria(0, 0, 0)) == 0


# 4 ------------------------------------------------------------------------------

def oracle_coefficient(recurring_subcats: list[str], rules_by_sub: dict[str, list[tuple[int, int, int]]]) -> Fraction:
    """Brute force: look up each recurring issue on its own, exact rational arithmetic."""
    if not recurring_subcats:
        return Fraction(0)
    total = Fraction(0)
    for sub in recurring_subcats:
        crit = [max(column) for column in zip(*rules_by_sub[sub])]
        total += Fraction(sum(crit), max(crit)) if max(crit) else Fraction(0)
    return total / (3 * len(recurring_subcats))


COUNT_VECTORS = [v for v in itertools.product(range(7), repeat=3) if sum(v) <= 6]


@pytest.mark.criterion(4, "penalty coefficient equals a brute-force oracle on all small multisets")
def test_c04_penalty_oracle_exhaustive():
    assert len(COUNT_VECTORS) == 84
    checked = 0
    for i, j in itertools.product(range(27), repeat=2):
        rules_by_sub = {"a": [GRID[i]], "b": [GRID[j]], "c": [GRID[(i + j) % 27]]}
        registry = small_registry(rules_by_sub)
        proto = {s: make_issue(registry, registry.rule("t", f"{s}0")) for s in rules_by_sub}
        for counts in COUNT_VECTORS:
            subs = [s for s, n in zip("abc", counts) for _ in range(n)]
            got = penalty_coefficient([proto[s] for s in subs], registry)
            assert abs(got - float(oracle_coefficient(subs, rules_by_sub))) <= 1e-12
            checked += 1
    assert checked == 27 * 27 * 84


criteria = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))


@pytest.mark.criterion(4, "penalty coefficient equals a brute-force oracle on all small multisets")
@settings(max_examples=300)
@given(
    st.fixed_dictionaries({s: st.lists(criteria, min_size=1, max_size=3) for s in "abc"}),
    st.lists(st.sampled_from("abc"), max_size=6),
)
def test_c04_penalty_oracle_several_rules_per_subcategory(rules_by_sub, subs):
    registry = small_registry(rules_by_sub)
    issues = [make_issue(registry, registry.rule("t", f"{s}0")) for s in subs]
    assert abs(penalty_coefficient(issues, registry) - float(oracle_coefficient(subs, rules_by_sub))) <= 1e-12


# 5 ------------------------------------------------------------------------------

minor_rules = [r for r in PY.enabled_rules() if r.category is IssueCategory.MINOR_ISSUES]


@pytest.mark.criterion(5, "aggregate is the minimum; more issues never raise it; minor issues never change it")
@settings(max_examples=1000, deadline=None)
@given(issue_sets(PY), issue_sets(PY, max_size=6), st.lists(st.sampled_from(minor_rules), max_size=6))
def test_c05_aggregation_law(issues, extra, minor):
    tallies = tally(issues, PY)
    grade = aggregate(tallies)
    assert all(grade <= t.grade for t in tallies if t.grading)
    assert aggregate(tally(issues + extra, PY)) <= grade
    assert aggregate(tally(issues + [make_issue(PY, r) for r in minor], PY)) == grade


# 6 ------------------------------------------------------------------------------

ALL_SPECS = [(lang, spec) for lang, reg in (("python", PY), ("java", JAVA)) for spec in reg.subcategories]


@pytest.mark.criterion(6, "grade ladders are non-increasing step functions for every shipped subcategory")
@pytest.mark.parametrize("language, spec", ALL_SPECS, ids=[f"{l}-{s.subcategory_id}" for l, s in ALL_SPECS])
def test_c06_ladder_monotone(language, spec):
    top = 2 * spec.thresholds[2]
    steps = 400
    values = sorted({top * k / steps for k in range(steps + 1)} | {float(t) for t in spec.thresholds} | {0.0})
    if spec.kind is SubcategoryKind.COUNTABLE:
        values = sorted({int(v) for v in values} | {int(top) + 1})
        grades = [grade_countable(v, spec) for v in values]
    else:
        grades = [grade_measurable(v, spec) for v in values]
    assert all(a >= b for a, b in zip(grades, grades[1:]))
    assert grades[0] is Grade.EXCELLENT
    for v, g in zip(values, grades):
        expected = sum(v > t for t in spec.thresholds)  # levels lost
        assert g is Grade(3 - expected)


# 7 ------------------------------------------------------------------------------

GOLDEN = [(tool, case) for tool in ADAPTERS for case in sorted((FIXTURES / "parsers" / tool).iterdir()) if case.is_dir()]


@pytest.mark.criterion(7, "golden parser fixtures round-trip byte-exact (>= 3 per format)")
def test_c07_golden_suite():
    per_tool = Counter(tool for tool, _ in GOLDEN)
    assert set(per_tool) == {"flake8", "pylint", "checkstyle", "pmd"}
    assert min(per_tool.values()) >= 3
    for tool, case in GOLDEN:
        (raw,) = case.glob("output.*")
        got = dump_findings(ADAPTERS[tool].parse(raw.read_text(encoding="utf-8"), []))
        assert got == (case / "expected.json").read_text(encoding="utf-8"), f"{tool}/{case.name}"


# 8 ------------------------------------------------------------------------------

@pytest.mark.criterion(8, "difficulty filter nests EASY in MEDIUM in HARD, HARD keeps everything")
@settings(max_examples=1000, deadline=None)
@given(st.one_of(issue_sets(PY), issue_sets(JAVA)))
def test_c08_difficulty_nesting(issues):
    easy, medium, hard = (filter_by_difficulty(issues, d) for d in Difficulty)
    assert hard == issues
    assert set(map(id, easy)) <= set(map(id, medium)) <= set(map(id, hard))
    assert all(i.difficulty <= Difficulty.MEDIUM for i in medium)


# 9 ------------------------------------------------------------------------------

SCENARIO = FIXTURES / "scenario"
T0 = datetime(2025, 10, 6, 9, 0, tzinfo=timezone.utc)


def scenario_oracle() -> tuple[float, set[tuple[str, str]]]:
    """Coefficient for submission 3 straight from the committed tool outputs and registry file."""
    keys = lambda name: [("flake8", m) for m in re.findall(r": ([A-Z]\d+) ", (SCENARIO / name).read_text())]  # noqa: E731
    seen = set(keys("submission_1.py.flake8")) | set(keys("submission_2.py.flake8"))
    recurring = [k for k in keys("submission_3.py.flake8") if k in seen]
    doc = tomllib.loads(default_registry_path("python").read_text())
    sub_of = {(r["inspector"], r["rule_id"]): r["subcategory"] for r in doc["rules"]}
    crit = {}
    for r in doc["rules"]:
        crit[r["subcategory"]] = [max(a, b) for a, b in zip(crit.get(r["subcategory"], [0, 0, 0]), r["penalty"])]
    coeffs = [sum(crit[sub_of[k]]) / max(crit[sub_of[k]]) for k in recurring]
    return sum(coeffs) / (3 * len(coeffs)), set(recurring)


@pytest.fixture
def scenario_dir(tmp_path, fake_tools):
    for path in SCENARIO.iterdir():
        shutil.copy(path, tmp_path / path.name)
    return tmp_path


@pytest.mark.criterion(9, "recurring-error scenario: GOOD lowered to MODERATE, unchanged without history")
def test_c09_recurring_scenario(scenario_dir, tmp_path):
    coefficient, influencing = scenario_oracle()
    assert 0.5 <= coefficient < 0.7
    assert influencing == {("flake8", "E501"), ("flake8", "F841")}

    configs = [InspectorConfig("flake8", "flake8")]
    store = HistoryStore(tmp_path / "history")
    reports = [
        build_report(scenario_dir / f"submission_{n}.py", "python", Difficulty.HARD, PY, configs, store,
                     "scenario-student", timestamp=T0 + timedelta(hours=n))
        for n in (1, 2, 3)
    ]
    for r in reports:
        assert_valid_report(r.to_document())
    first, second, third = (r.to_document() for r in reports)
    # the first two attempts are not penalised enough to matter
    assert first["quality"]["code"] == "GOOD" and first["penalty"]["coefficient"] == 0
    assert second["quality"]["code"] == "GOOD"

    assert third["quality"]["code"] == "MODERATE"
    assert abs(third["penalty"]["coefficient"] - coefficient) <= 1e-12
    assert {(r["inspector"], r["code"]) for r in third["penalty"]["influencing_rules"]} == influencing

    # the store now holds exactly the committed history of the three attempts
    stored = store.path_for("scenario-student", "python").read_text()
    assert stored == (SCENARIO / "expected_history.jsonl").read_text()

    alone = build_report(scenario_dir / "submission_3.py", "python", Difficulty.HARD, PY, configs)
    assert_valid_report(alone.to_document())
    assert alone.grade is Grade.GOOD and "penalty" not in alone.to_document()


# 10 -----------------------------------------------------------------------------

def median_oracle(counts: dict[str, list[int]]) -> tuple[dict[str, int], dict[int, int]]:
    medians = {}
    for student, values in counts.items():
        ordered = sorted(values)
        medians[student] = ordered[(len(ordered) - 1) // 2]
    histogram: dict[int, int] = {}
    for m in medians.values():
        histogram[m] = histogram.get(m, 0) + 1
    return medians, histogram


@pytest.mark.criterion(10, "batch medians and histogram match an independent oracle in under 10 s")
def test_c10_batch_medians(tmp_path):
    counts = write_synthetic_corpus(tmp_path / "corpus", students=10, seed=2024)
    start = time.perf_counter()
    stats = batch(tmp_path / "corpus", {"python": PY, "java": JAVA}, ())
    elapsed = time.perf_counter() - start
    medians, histogram = median_oracle(counts)
    assert stats.per_student_median == medians
    assert stats.histogram == histogram
    assert [s.issue_count for s in stats.submissions] == [n for s in sorted(counts) for n in counts[s]]
    assert elapsed < 10


# 11 -----------------------------------------------------------------------------

@pytest.mark.criterion(11, "every emitted report validates and is internally consistent")
def test_c11_report_schema(tmp_path):
    java = build_report(FIXTURES / "baseline" / "LongMethod.java", "java", Difficulty.HARD, JAVA)
    sources = [
        "",
        "x = 1\n",
        "def f(a):\n    if a == True:   \n        return 1\n\n\n\n\n    return 2\n" + "y = '" + "z" * 210 + "'\n",
    ]
    docs = [java.to_document()]
    for k, text in enumerate(sources):
        path = tmp_path / f"s{k}.py"
        path.write_text(text)
        for level in Difficulty:
            docs.append(build_report(path, "python", level, PY).to_document())
            docs.append(json.loads(build_report(path, "python", level, PY, (), HistoryStore(tmp_path / "h"), "s").to_json()))
    for doc in docs:
        assert_valid_report(doc)
    assert {d["quality"]["code"] for d in docs} >= {"EXCELLENT", "BAD"}


# 12 -----------------------------------------------------------------------------

@pytest.mark.criterion(12, "history append/load_window model check over >= 100-operation sequences")
@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(operations)
def test_c12_history_round_trip(tmp_path_factory, ops):
    assert len(ops) >= 100
    run_history_model(ops, tmp_path_factory.mktemp("history"))
