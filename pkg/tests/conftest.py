from __future__ import annotations

import random
import stat
from pathlib import Path

import jsonschema
import pytest
from hypothesis import strategies as st

from stylegrader.report import report_schema
from stylegrader.taxonomy import (
    Difficulty,
    Issue,
    IssueCategory,
    PenaltyCriteria,
    RuleDescriptor,
    RuleRegistry,
    SubcategoryKind,
    SubcategorySpec,
    default_registry,
)

FIXTURES = Path(__file__).parent / "fixtures"
TOOLS = FIXTURES / "tools"


@pytest.fixture(scope="session")
def python_registry() -> RuleRegistry:
    return default_registry("python")


@pytest.fixture(scope="session")
def java_registry() -> RuleRegistry:
    return default_registry("java")


@pytest.fixture
def fake_tools(monkeypatch):
    """Put the canned-output linters from fixtures/tools first on the tool search path."""
    for tool in TOOLS.iterdir():
        mode = tool.stat().st_mode
        tool.chmod(mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    monkeypatch.setenv("STYLEGRADER_TOOL_PATH", str(TOOLS))
    return TOOLS


def assert_valid_report(doc: dict) -> None:
    """Schema validity plus the cross-field report invariants."""
    jsonschema.validate(doc, report_schema())
    order = ["BAD", "MODERATE", "GOOD", "EXCELLENT"]
    assert doc["quality"]["score"] == order.index(doc["quality"]["code"])
    assert doc["statistics"]["total"] == len(doc["issues"])
    assert sum(doc["statistics"]["by_category"].values()) == len(doc["issues"])
    assert all(i["text"].strip() for i in doc["issues"])


def small_registry(criteria: dict[str, list[tuple[int, int, int]]] | None = None, **kinds) -> RuleRegistry:
    """A registry with countable subcategories ``a``, ``b``, ``c`` (style, practices, complexity)
    and a non-grading ``minor`` subcategory. ``criteria`` maps a subcategory to the
    penalty criteria of its rules (one rule ``<sub><n>`` per entry).
    """
    cats = {
        "a": IssueCategory.CODE_STYLE,
        "b": IssueCategory.BEST_PRACTICES,
        "c": IssueCategory.CODE_COMPLEXITY,
        "minor": IssueCategory.MINOR_ISSUES,
    }
    criteria = criteria or {"a": [(1, 1, 1)], "b": [(1, 1, 1)], "c": [(1, 1, 1)], "minor": [(1, 0, 0)]}
    subs = tuple(
        SubcategorySpec(
            sid, sid, cat, kinds.get(sid, SubcategoryKind.COUNTABLE), (0, 2, 4), cat.grading
        )
        for sid, cat in cats.items()
    )
    rules = []
    for sid, crits in criteria.items():
        for n, c in enumerate(crits):
            rules.append(
                RuleDescriptor("t", f"{sid}{n}", cats[sid], Difficulty.EASY, sid, PenaltyCriteria(*c))
            )
    return RuleRegistry("python", tuple(rules), subs)


def make_issue(registry: RuleRegistry, rule: RuleDescriptor, line: int = 1, metric: float | None = None) -> Issue:
    spec = registry.subcategory(rule.subcategory_id)
    if spec.kind is SubcategoryKind.MEASURABLE and metric is None:
        metric = spec.thresholds[0] + 1
    if spec.kind is SubcategoryKind.COUNTABLE:
        metric = None
    return Issue(
        rule.rule_id, rule.inspector, line, 1, "m", rule.category, rule.difficulty, rule.subcategory_id, metric
    )


def issue_sets(registry: RuleRegistry, max_size: int = 25):
    """Hypothesis strategy: lists of issues drawn from the enabled rules of ``registry``."""
    rules = registry.enabled_rules()

    @st.composite
    def one(draw):
        rule = draw(st.sampled_from(rules))
        spec = registry.subcategory(rule.subcategory_id)
        metric = None
        if spec.kind is SubcategoryKind.MEASURABLE:
            metric = draw(st.integers(min_value=0, max_value=int(2 * spec.thresholds[2]) + 1))
        return make_issue(registry, rule, draw(st.integers(1, 500)), metric)

    return st.lists(one(), max_size=max_size)


def write_synthetic_corpus(root: Path, students: int = 10, seed: int = 7) -> dict[str, list[int]]:
    """Write a corpus whose every submission has a known number of issues.

    Each issue is one line with trailing whitespace, which only the baseline
    checks report (once per line). Returns the intended counts per student in
    submission order.
    """
    rng = random.Random(seed)
    counts: dict[str, list[int]] = {}
    for s in range(students):
        student = f"student{s:02d}"
        language = "java" if s % 3 == 2 else "python"
        ext = ".java" if language == "java" else ".py"
        d = root / student
        d.mkdir(parents=True)
        n_subs = rng.randint(1, 6)
        counts[student] = [rng.randint(0, 9) for _ in range(n_subs)]
        names = []
        for k, n in enumerate(counts[student]):
            name = f"sub{n_subs - k}{ext}"  # reverse lexicographic order: the manifest must win
            names.append(name)
            if language == "python":
                body = [f"x{i} = {i}  " if i < n else f"x{i} = {i}" for i in range(10)]
            else:
                body = ["class A {"] + [f"  int x{i} = {i};\t" if i < n else f"  int x{i} = {i};" for i in range(10)] + ["}"]
            (d / name).write_text("\n".join(body) + "\n")
        (d / "manifest.txt").write_text("\n".join(names) + "\n")
        (d / "notes.txt").write_text("ignored\n")
    return counts


# --- acceptance reporting ------------------------------------------------------

ACCEPTANCE_RESULTS: dict[int, tuple[str, bool]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and report.when == "call":
        number, title = marker.args
        earlier = ACCEPTANCE_RESULTS.get(number, (title, True))[1]
        ACCEPTANCE_RESULTS[number] = (title, earlier and report.passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, passed = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {title}")
