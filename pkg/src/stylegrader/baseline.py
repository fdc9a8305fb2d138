"""Built-in checks that need no external tool.

These keep the whole pipeline usable (and testable) on a machine with no
linters installed. Function detection is a heuristic based on indentation
(Python) or brace matching (Java); it is not a parser and can miss unusual
layouts such as parameter lists spread over several lines in Java.

========  ===============================================  ==============
rule      check                                            metric
========  ===============================================  ==============
BL001     line longer than the limit (tabs count as 4)     line length
BL002     trailing spaces or tabs
BL003     run of blank lines longer than the limit
BL004     function body longer than the limit              body lines
BL005     comparison with a boolean literal
========  ===============================================  ==============
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .findings import RawFinding

INSPECTOR = "baseline"
TAB_WIDTH = 4


@dataclass(frozen=True)
class BaselineRuleSet:
    max_line_length: int = 120
    max_function_lines: int = 40
    max_consecutive_blank_lines: int = 2

    def __post_init__(self) -> None:
        for name in ("max_line_length", "max_function_lines", "max_consecutive_blank_lines"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


def _lines(source: str) -> list[str]:
    lines = source.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [ln[:-1] if ln.endswith("\r") else ln for ln in lines]


def _finding(rule: str, line: int, column: int, message: str, metric: float | None = None) -> RawFinding:
    return RawFinding(INSPECTOR, rule, line, column, message, metric)


def check_line_length(source: str, limit: int = 120) -> list[RawFinding]:
    findings = []
    for n, line in enumerate(_lines(source), 1):
        length = len(line.expandtabs(TAB_WIDTH))
        if length > limit:
            findings.append(
                _finding("BL001", n, limit + 1, f"Line is too long ({length} > {limit} characters)", length)
            )
    return findings


def check_trailing_whitespace(source: str) -> list[RawFinding]:
    findings = []
    for n, line in enumerate(_lines(source), 1):
        stripped = line.rstrip(" \t")
        if stripped != line:
            findings.append(_finding("BL002", n, len(stripped) + 1, "Trailing whitespace"))
    return findings


def check_blank_runs(source: str, limit: int = 2) -> list[RawFinding]:
    findings = []
    run_start, run_len = 0, 0
    for n, line in enumerate([*_lines(source), "<end>"], 1):
        if not line.strip():
            if run_len == 0:
                run_start = n
            run_len += 1
            continue
        if run_len > limit:
            findings.append(
                _finding("BL003", run_start, 1, f"Too many blank lines ({run_len} > {limit})")
            )
        run_len = 0
    return findings


# --- string and comment masking ---------------------------------------------------
#
# The masks below replace the contents of comments and string literals with
# spaces so that pattern checks only see code. Column positions are kept.

_PY_STRING_START = re.compile(r"(?i)([rbuf]{0,2})('''|\"\"\"|'|\")")


def _is_word(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def _mask_python(lines: list[str]) -> list[str]:
    masked = []
    open_triple: str | None = None
    for line in lines:
        out = list(line)
        i = 0
        if open_triple is not None:
            end = line.find(open_triple)
            if end < 0:
                masked.append(" " * len(line))
                continue
            for k in range(end + 3):
                out[k] = " "
            i = end + 3
            open_triple = None
        while i < len(line):
            ch = line[i]
            if ch == "#":
                for k in range(i, len(line)):
                    out[k] = " "
                break
            m = None
            # A prefix letter only starts a string when it is not the tail of an identifier.
            if ch in "'\"" or (ch in "rRbBuUfF" and (i == 0 or not _is_word(line[i - 1]))):
                m = _PY_STRING_START.match(line, i)
            if m is None:
                i += 1
                continue
            quote = m.group(2)
            body = m.end()
            raw = "r" in m.group(1).lower()
            if len(quote) == 3:
                end = line.find(quote, body)
                if end < 0:
                    for k in range(i, len(line)):
                        out[k] = " "
                    open_triple = quote
                    break
                stop = end + 3
            else:
                j = body
                while j < len(line) and line[j] != quote:
                    j += 1 if raw or line[j] != "\\" else 2
                stop = min(j + 1, len(line))
            for k in range(i, stop):
                out[k] = " "
            i = stop
        masked.append("".join(out))
    return masked


def _mask_java(lines: list[str]) -> list[str]:
    masked = []
    in_block = False
    in_text_block = False
    for line in lines:
        out = list(line)
        i = 0
        while i < len(line):
            if in_block or in_text_block:
                close = "*/" if in_block else '"""'
                end = line.find(close, i)
                stop = len(line) if end < 0 else end + len(close)
                for k in range(i, stop):
                    out[k] = " "
                if end >= 0:
                    in_block = in_text_block = False
                i = stop
                continue
            two = line[i:i + 2]
            if two == "//":
                for k in range(i, len(line)):
                    out[k] = " "
                break
            if two == "/*":
                out[i:i + 2] = "  "
                i += 2
                in_block = True
                continue
            if line.startswith('"""', i):
                out[i:i + 3] = "   "
                i += 3
                in_text_block = True
                continue
            if line[i] in "\"'":
                quote = line[i]
                j = i + 1
                while j < len(line) and line[j] != quote:
                    j += 2 if line[j] == "\\" else 1
                stop = min(j + 1, len(line))
                for k in range(i, stop):
                    out[k] = " "
                i = stop
                continue
            i += 1
        masked.append("".join(out))
    return masked


def code_mask(source: str, language: str) -> list[str]:
    """Source lines with comments and string literals blanked out."""
    lines = _lines(source)
    if language == "python":
        return _mask_python(lines)
    if language == "java":
        return _mask_java(lines)
    return lines


# --- function length ------------------------------------------------------------------

_PY_DEF = re.compile(r"^(?P<indent>[ \t]*)(?:async[ \t]+)?def[ \t]+(?P<name>\w+)")

_JAVA_KEYWORDS = {"if", "for", "while", "switch", "catch", "return", "new", "else", "do", "try", "synchronized", "throw"}
_JAVA_METHOD = re.compile(
    r"^\s*(?:@\w+(?:\([^)]*\))?\s+)*"
    r"(?:(?:public|protected|private|static|final|abstract|synchronized|native|default|strictfp)\s+)*"
    r"(?:<[^>]*>\s*)?"
    r"(?:[\w$.]+(?:<[^;{}()]*>)?(?:\[\])*\s+)?"
    r"(?P<name>[A-Za-z_$][\w$]*)\s*\([^;{}]*\)\s*"
    r"(?:throws\s+[\w$., ]+)?\s*(?P<brace>\{)?\s*$"
)


def _indent_width(text: str) -> int:
    return len(text.expandtabs(TAB_WIDTH)) - len(text.expandtabs(TAB_WIDTH).lstrip())


def _python_functions(masked: list[str]) -> list[tuple[int, str, int, int]]:
    """(line, name, indent column, body line count) for every ``def``."""
    result = []
    for idx, line in enumerate(masked):
        m = _PY_DEF.match(line)
        if m is None:
            continue
        indent = _indent_width(line)
        # The signature may continue over several lines; it ends where the
        # brackets balance again.
        depth = 0
        end = idx
        while end < len(masked):
            text = masked[end]
            depth += sum(text.count(c) for c in "([{") - sum(text.count(c) for c in ")]}")
            if depth <= 0:
                break
            end += 1
        body = 0
        for text in masked[end + 1:]:
            if not text.strip():
                continue
            if _indent_width(text) <= indent:
                break
            body += 1
        result.append((idx + 1, m["name"], indent, body))
    return result


def _java_functions(masked: list[str]) -> list[tuple[int, str, int, int]]:
    result = []
    for idx, line in enumerate(masked):
        m = _JAVA_METHOD.match(line)
        if m is None or m["name"] in _JAVA_KEYWORDS:
            continue
        open_idx = idx
        if m["brace"] is None:
            nxt = idx + 1
            while nxt < len(masked) and not masked[nxt].strip():
                nxt += 1
            if nxt >= len(masked) or not masked[nxt].strip().startswith("{"):
                continue
            open_idx = nxt
        depth = 0
        close_idx = None
        for j in range(open_idx, len(masked)):
            for ch in masked[j]:
                if ch == "{":
                    depth += 1
                elif ch == "}":
                    depth -= 1
                    if depth == 0:
                        close_idx = j
                        break
            if close_idx is not None:
                break
        if close_idx is None:
            continue
        body = sum(1 for text in masked[open_idx + 1:close_idx] if text.strip())
        result.append((idx + 1, m["name"], _indent_width(line), body))
    return result


def check_function_length(source: str, language: str, limit: int = 40) -> list[RawFinding]:
    if language == "python":
        functions = _python_functions(code_mask(source, language))
        noun = "Function"
    elif language == "java":
        functions = _java_functions(code_mask(source, language))
        noun = "Method"
    else:
        return []
    return [
        _finding("BL004", line, indent + 1, f"{noun} '{name}' is too long ({body} > {limit} lines)", body)
        for line, name, indent, body in functions
        if body > limit
    ]


# --- boolean literal comparison ---------------------------------------------------------

_BOOL_CMP = {
    "python": re.compile(r"(?:==|!=)\s*(?:True|False)\b|\b(?:True|False)\s*(?:==|!=)"),
    "java": re.compile(r"(?:==|!=)\s*(?:true|false)\b|\b(?:true|false)\s*(?:==|!=)"),
}


def check_bool_literal_comparison(source: str, language: str) -> list[RawFinding]:
    pattern = _BOOL_CMP.get(language)
    if pattern is None:
        return []
    findings = []
    for n, line in enumerate(code_mask(source, language), 1):
        for m in pattern.finditer(line):
            literal = re.search(r"True|False|true|false", m.group()).group()
            findings.append(
                _finding("BL005", n, m.start() + 1, f"Comparison to boolean literal {literal}")
            )
    return findings


def run_all(source: str, language: str, rules: BaselineRuleSet | None = None) -> list[RawFinding]:
    """Every baseline check, in rule order."""
    rules = rules or BaselineRuleSet()
    return [
        *check_line_length(source, rules.max_line_length),
        *check_trailing_whitespace(source),
        *check_blank_runs(source, rules.max_consecutive_blank_lines),
        *check_function_length(source, language, rules.max_function_lines),
        *check_bool_literal_comparison(source, language),
    ]
