"""Domain model: grades, categories, difficulties, issues and the rule registry.

Everything here is immutable once built, so a loaded :class:`RuleRegistry`
can be shared freely between concurrent grading calls.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Any, Iterable, Mapping

import jsonschema

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ParseError, ValidationError
from .findings import RawFinding

SUPPORTED_LANGUAGES = ("python", "java")


class Grade(enum.IntEnum):
    BAD = 0
    MODERATE = 1
    GOOD = 2
    EXCELLENT = 3

    def lowered(self, levels: int) -> Grade:
        """Drop ``levels`` steps, never below BAD."""
        return Grade(max(Grade.BAD, self - levels))


class IssueCategory(str, enum.Enum):
    CODE_STYLE = "CODE_STYLE"
    CODE_COMPLEXITY = "CODE_COMPLEXITY"
    ERROR_PRONENESS = "ERROR_PRONENESS"
    BEST_PRACTICES = "BEST_PRACTICES"
    MINOR_ISSUES = "MINOR_ISSUES"

    @property
    def grading(self) -> bool:
        """Minor issues are reported but never lower a grade."""
        return self is not IssueCategory.MINOR_ISSUES


class Difficulty(enum.IntEnum):
    EASY = 0
    MEDIUM = 1
    HARD = 2

    @classmethod
    def parse(cls, value: str) -> Difficulty:
        try:
            return cls[value.upper()]
        except KeyError:
            raise ValueError(f"unknown difficulty {value!r}") from None


class SubcategoryKind(str, enum.Enum):
    COUNTABLE = "COUNTABLE"
    MEASURABLE = "MEASURABLE"


def grade_min(a: Grade, b: Grade) -> Grade:
    return a if a <= b else b


def grade_to_score(g: Grade) -> int:
    """Numeric score reported next to the grade: BAD=0 ... EXCELLENT=3."""
    return int(g)


@dataclass(frozen=True, slots=True)
class PenaltyCriteria:
    """Prevalence, difficulty and importance of a mistake, each in {0, 1, 2}."""

    prevalence: int
    difficulty: int
    importance: int

    def __post_init__(self) -> None:
        for name in ("prevalence", "difficulty", "importance"):
            value = getattr(self, name)
            if value not in (0, 1, 2):
                raise ValueError(f"{name} must be 0, 1 or 2, got {value!r}")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.prevalence, self.difficulty, self.importance)

    @classmethod
    def componentwise_max(cls, items: Iterable[PenaltyCriteria]) -> PenaltyCriteria:
        p = d = i = 0
        for c in items:
            p, d, i = max(p, c.prevalence), max(d, c.difficulty), max(i, c.importance)
        return cls(p, d, i)


@dataclass(frozen=True, slots=True)
class SubcategorySpec:
    subcategory_id: str
    display_name: str
    category: IssueCategory
    kind: SubcategoryKind
    thresholds: tuple[float, float, float]
    grading: bool

    def __post_init__(self) -> None:
        excellent_max, good_max, moderate_max = self.thresholds
        if not 0 <= excellent_max <= good_max <= moderate_max:
            raise ValueError(
                f"subcategory {self.subcategory_id!r}: thresholds must be "
                f"non-negative and ascending, got {list(self.thresholds)}"
            )
        if self.grading != self.category.grading:
            raise ValueError(
                f"subcategory {self.subcategory_id!r}: grading must be false "
                f"exactly when the category is MINOR_ISSUES"
            )

    @property
    def excellent_max(self) -> float:
        return self.thresholds[0]

    @property
    def good_max(self) -> float:
        return self.thresholds[1]

    @property
    def moderate_max(self) -> float:
        return self.thresholds[2]


@dataclass(frozen=True, slots=True)
class RuleDescriptor:
    inspector: str
    rule_id: str
    category: IssueCategory
    difficulty: Difficulty
    subcategory_id: str
    penalty: PenaltyCriteria
    custom_message: str | None = None
    enabled: bool = True

    @property
    def key(self) -> tuple[str, str]:
        return (self.inspector, self.rule_id)


@dataclass(frozen=True, slots=True)
class Issue:
    """A finding that survived classification through the registry."""

    rule_id: str
    inspector: str
    line: int
    column: int
    message: str
    category: IssueCategory
    difficulty: Difficulty
    subcategory_id: str
    metric_value: float | None = None

    def __post_init__(self) -> None:
        if self.line < 1:
            raise ValueError(f"line must be >= 1, got {self.line}")
        if not self.rule_id:
            raise ValueError("rule_id must be non-empty")

    @property
    def key(self) -> tuple[str, str]:
        return (self.inspector, self.rule_id)


@dataclass(frozen=True)
class RuleRegistry:
    """Whitelist of linter checks, keyed by ``(inspector, rule_id)``.

    Construction validates every cross-reference; use :func:`load_registry`
    to read one from disk.
    """

    language: str
    rules: tuple[RuleDescriptor, ...]
    subcategories: tuple[SubcategorySpec, ...]
    _rule_index: Mapping[tuple[str, str], RuleDescriptor] = field(init=False, repr=False)
    _sub_index: Mapping[str, SubcategorySpec] = field(init=False, repr=False)
    _sub_criteria: Mapping[str, PenaltyCriteria] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        subs: dict[str, SubcategorySpec] = {}
        for spec in self.subcategories:
            if spec.subcategory_id in subs:
                raise ValidationError(f"duplicate subcategory id {spec.subcategory_id!r}")
            subs[spec.subcategory_id] = spec

        index: dict[tuple[str, str], RuleDescriptor] = {}
        members: dict[str, list[RuleDescriptor]] = {}
        for rule in self.rules:
            if rule.key in index:
                raise ValidationError(f"duplicate rule key {rule.inspector}:{rule.rule_id}")
            spec = subs.get(rule.subcategory_id)
            if spec is None:
                raise ValidationError(
                    f"rule {rule.inspector}:{rule.rule_id} references unknown "
                    f"subcategory {rule.subcategory_id!r}"
                )
            if rule.category is not spec.category:
                raise ValidationError(
                    f"rule {rule.inspector}:{rule.rule_id} has category "
                    f"{rule.category.value} but subcategory {spec.subcategory_id!r} "
                    f"is {spec.category.value}"
                )
            index[rule.key] = rule
            members.setdefault(rule.subcategory_id, []).append(rule)

        for sid, rules in members.items():
            if subs[sid].kind is SubcategoryKind.MEASURABLE and len(rules) > 1:
                keys = ", ".join(f"{r.inspector}:{r.rule_id}" for r in rules)
                raise ValidationError(
                    f"measurable subcategory {sid!r} is shared by several rules ({keys})"
                )

        criteria = {
            sid: PenaltyCriteria.componentwise_max(r.penalty for r in rules)
            for sid, rules in members.items()
        }
        object.__setattr__(self, "_rule_index", MappingProxyType(index))
        object.__setattr__(self, "_sub_index", MappingProxyType(subs))
        object.__setattr__(self, "_sub_criteria", MappingProxyType(criteria))

    def rule(self, inspector: str, rule_id: str) -> RuleDescriptor | None:
        return self._rule_index.get((inspector, rule_id))

    def subcategory(self, subcategory_id: str) -> SubcategorySpec | None:
        return self._sub_index.get(subcategory_id)

    def subcategory_criteria(self, subcategory_id: str) -> PenaltyCriteria:
        """Criteria of a subcategory: componentwise max over its member rules."""
        return self._sub_criteria.get(subcategory_id, PenaltyCriteria(0, 0, 0))

    def enabled_rules(self) -> list[RuleDescriptor]:
        return [r for r in self.rules if r.enabled]

    def inspectors(self) -> set[str]:
        return {r.inspector for r in self.rules if r.enabled}


def classify_issue(raw: RawFinding, registry: RuleRegistry) -> Issue | None:
    """Map a raw finding onto the taxonomy, or drop it.

    Findings of unknown or disabled rules are dropped. So are findings of a
    measurable rule that carry no metric value, since they cannot be graded.
    """
    rule = registry.rule(raw.inspector, raw.rule_id)
    if rule is None or not rule.enabled:
        return None
    spec = registry.subcategory(rule.subcategory_id)
    metric = raw.metric_value
    if spec.kind is SubcategoryKind.MEASURABLE:
        if metric is None:
            return None
    else:
        metric = None
    return Issue(
        rule_id=raw.rule_id,
        inspector=raw.inspector,
        line=raw.line,
        column=raw.column,
        message=raw.message,
        category=rule.category,
        difficulty=rule.difficulty,
        subcategory_id=rule.subcategory_id,
        metric_value=metric,
    )


# --- loading -----------------------------------------------------------------

def _schema() -> dict[str, Any]:
    text = resources.files("stylegrader.data").joinpath("registry.schema.json").read_text("utf-8")
    return json.loads(text)


def _field_path(error: jsonschema.ValidationError) -> str:
    parts = []
    for p in error.absolute_path:
        parts.append(f"[{p}]" if isinstance(p, int) else f".{p}")
    return "".join(parts).lstrip(".") or "<root>"


def registry_from_document(doc: Mapping[str, Any]) -> RuleRegistry:
    """Build a registry from an already-parsed document (TOML table or JSON object)."""
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        raise ParseError(first.message, _field_path(first))

    subcategories = []
    for n, s in enumerate(doc.get("subcategories", [])):
        category = IssueCategory(s["category"])
        try:
            subcategories.append(
                SubcategorySpec(
                    subcategory_id=s["id"],
                    display_name=s["name"],
                    category=category,
                    kind=SubcategoryKind(s["kind"]),
                    thresholds=tuple(float(t) for t in s["thresholds"]),
                    grading=s.get("grading", category.grading),
                )
            )
        except ValueError as exc:
            raise ParseError(str(exc), f"subcategories[{n}]") from None

    categories = {s.subcategory_id: s.category for s in subcategories}
    rules = []
    for n, r in enumerate(doc.get("rules", [])):
        sid = r["subcategory"]
        if sid not in categories:
            raise ValidationError(
                f"rules[{n}] ({r['inspector']}:{r['rule_id']}) references unknown subcategory {sid!r}"
            )
        rules.append(
            RuleDescriptor(
                inspector=r["inspector"],
                rule_id=r["rule_id"],
                category=categories[sid],
                difficulty=Difficulty.parse(r["difficulty"]),
                subcategory_id=sid,
                penalty=PenaltyCriteria(*r["penalty"]),
                custom_message=r.get("custom_message"),
                enabled=r.get("enabled", True),
            )
        )
    return RuleRegistry(language=doc["language"], rules=tuple(rules), subcategories=tuple(subcategories))


def load_registry(path: str | Path) -> RuleRegistry:
    """Read and validate a TOML registry file."""
    path = Path(path)
    raw = path.read_bytes()
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8", f"byte {exc.start}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return registry_from_document(doc)


def default_registry_path(language: str) -> Path:
    if language not in SUPPORTED_LANGUAGES:
        raise ValueError(f"no default registry for language {language!r}")
    return Path(str(resources.files("stylegrader.data").joinpath(f"registry_{language}.toml")))


def default_registry(language: str) -> RuleRegistry:
    return load_registry(default_registry_path(language))
