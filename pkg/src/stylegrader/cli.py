"""Command-line interface.

Exit codes: 0 success (whatever the grade), 1 I/O or configuration failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

from .errors import ParseError, StyleGraderError, ValidationError
from .history import HistoryStore
from .inspectors import InspectorConfig, default_inspector_configs, load_inspector_configs
from .penalty import DEFAULT_WINDOW
from .taxonomy import SUPPORTED_LANGUAGES, Difficulty, RuleRegistry, default_registry, load_registry

log = logging.getLogger("stylegrader")

LEVELS = ("easy", "medium", "hard")


class UsageError(Exception):
    pass


def _registry_lookup(override: str | None) -> Callable[[str], RuleRegistry]:
    custom = load_registry(override) if override else None

    @lru_cache(maxsize=None)
    def lookup(language: str) -> RuleRegistry:
        if custom is not None and custom.language == language:
            return custom
        return default_registry(language)

    return lookup


def _configs(args: argparse.Namespace) -> list[InspectorConfig]:
    if args.no_external:
        return []
    if args.inspectors:
        return load_inspector_configs(args.inspectors)
    return default_inspector_configs()


def _emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")


def cmd_grade(args: argparse.Namespace) -> int:
    from .report import build_report

    if bool(args.history_dir) != bool(args.student):
        raise UsageError("--history-dir and --student must be given together")
    store = HistoryStore(args.history_dir) if args.history_dir else None
    report = build_report(
        args.path,
        args.language,
        Difficulty.parse(args.level),
        _registry_lookup(args.registry)(args.language),
        _configs(args),
        store,
        args.student,
        window=args.window,
    )
    sys.stdout.write(report.to_json())
    return 0


def cmd_batch(args: argparse.Namespace) -> int:
    from .corpus import batch

    stats = batch(
        args.corpus,
        _registry_lookup(args.registry),
        _configs(args),
        level=Difficulty.parse(args.level),
        history=not args.no_history,
        history_dir=args.history_dir,
        window=args.window,
    )
    _emit(stats.to_document())
    return 0


def cmd_distribution(args: argparse.Namespace) -> int:
    from .corpus import distribution

    _emit(distribution(args.corpus, _registry_lookup(args.registry), _configs(args)))
    return 0


def cmd_rules(args: argparse.Namespace) -> int:
    registry = _registry_lookup(args.registry)(args.language)
    out = sys.stdout
    out.write("inspector\trule\tcategory\tsubcategory\tdifficulty\tcriteria\n")
    for rule in registry.enabled_rules():
        criteria = ",".join(str(v) for v in rule.penalty.as_tuple())
        out.write(
            f"{rule.inspector}\t{rule.rule_id}\t{rule.category.value}\t"
            f"{rule.subcategory_id}\t{rule.difficulty.name}\t{criteria}\n"
        )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import create_app, serve

    store = HistoryStore(args.history_dir) if args.history_dir else None
    app = create_app(_registry_lookup(args.registry), _configs(args), store, args.window)
    serve(app, args.host, args.port)
    return 0


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stylegrader", description="Grade the code quality of student submissions.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--registry", help="rule registry file (TOML); replaces the default for its language")
    common.add_argument("--inspectors", help="inspector configuration file (TOML)")
    common.add_argument("--no-external", action="store_true", help="run only the built-in baseline checks")

    grading = argparse.ArgumentParser(add_help=False)
    grading.add_argument("--level", choices=LEVELS, default="hard", help="hide issues above this difficulty")
    grading.add_argument("--history-dir", help="directory of the submission history store")
    grading.add_argument("--window", type=_positive, default=DEFAULT_WINDOW, help="recent submissions to check for recurring errors")

    p = sub.add_parser("grade", parents=[common, grading], help="grade one file and print the JSON report")
    p.add_argument("path")
    p.add_argument("--language", required=True, choices=SUPPORTED_LANGUAGES)
    p.add_argument("--student", help="student id (needed with --history-dir)")
    p.set_defaults(func=cmd_grade)

    p = sub.add_parser("batch", parents=[common, grading], help="grade a corpus and print per-student medians")
    p.add_argument("corpus")
    p.add_argument("--no-history", action="store_true", help="grade every submission independently")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("distribution", parents=[common], help="per-subcategory value distributions for threshold tuning")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_distribution)

    p = sub.add_parser("rules", parents=[common], help="list the enabled rules for a language")
    p.add_argument("language", choices=SUPPORTED_LANGUAGES)
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--history-dir", help="directory of the submission history store")
    p.add_argument("--window", type=_positive, default=DEFAULT_WINDOW)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"stylegrader: error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, ValidationError) as exc:
        print(f"stylegrader: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except (StyleGraderError, OSError) as exc:
        print(f"stylegrader: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
