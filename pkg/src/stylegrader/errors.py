"""Exception types raised by stylegrader."""

from __future__ import annotations


class StyleGraderError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(StyleGraderError):
    """A config file or tool report could not be parsed.

    ``location`` carries a human-readable pointer (``line 12``, ``rules[3].penalty``)
    when one is known.
    """

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{message} ({location})" if location else message)


class ValidationError(StyleGraderError):
    """A registry parsed fine but violates a cross-reference invariant."""


class UnknownSubcategory(StyleGraderError):
    """An issue points at a subcategory the registry does not define."""


class SourceNotFound(StyleGraderError, FileNotFoundError):
    pass


class InspectorError(StyleGraderError):
    """Base for failures of an external inspector run."""

    def __init__(self, inspector: str, message: str):
        self.inspector = inspector
        super().__init__(f"{inspector}: {message}")


class ToolNotFound(InspectorError):
    pass


class InspectorTimeout(InspectorError):
    pass


class SpawnFailure(InspectorError):
    pass


class HistoryIOError(StyleGraderError, OSError):
    """The history store could not be read or written."""
