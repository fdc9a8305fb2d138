"""Code quality grading for programming assignments built on top of existing linters."""

from .baseline import BaselineRuleSet
from .errors import (
    HistoryIOError,
    InspectorTimeout,
    ParseError,
    SourceNotFound,
    SpawnFailure,
    StyleGraderError,
    ToolNotFound,
    UnknownSubcategory,
    ValidationError,
)
from .findings import RawFinding
from .grading import SubcategoryTally, aggregate, grade_countable, grade_measurable, tally
from .history import HistoryStore
from .inspectors import InspectorConfig, inspect, run_inspector
from .penalty import (
    PenaltyResult,
    SubmissionRecord,
    apply_penalty,
    find_recurring,
    penalty_coefficient,
    rule_coefficient,
)
from .report import MessageCatalog, QualityReport, build_report, filter_by_difficulty, resolve_message
from .taxonomy import (
    Difficulty,
    Grade,
    Issue,
    IssueCategory,
    PenaltyCriteria,
    RuleDescriptor,
    RuleRegistry,
    SubcategoryKind,
    SubcategorySpec,
    classify_issue,
    default_registry,
    grade_min,
    grade_to_score,
    load_registry,
)

__version__ = "0.1.0"
