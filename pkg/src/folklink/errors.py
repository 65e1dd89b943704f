"""Exception hierarchy.

Errors about the *content* of input data derive from :class:`DataError`;
the CLI maps those to exit status 2 and everything else to 1.
"""


class FolkError(Exception):
    """Base class for all folklink errors."""


class DataError(FolkError, ValueError):
    """Input data is inconsistent or incomplete."""


class ParseError(DataError):
    """A line of an input file could not be parsed."""

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where = f"{path}:"
        if lineno is not None:
            where += f"{lineno}: "
        elif where:
            where += " "
        super().__init__(where + message)


class ValidationError(DataError):
    """A record parsed but violates a field constraint (e.g. empty id)."""


class NotFoundError(FolkError, KeyError):
    """A user (or other identifier) is unknown."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class DomainError(FolkError, ValueError):
    """Arguments outside the domain of an operation."""


class ImpossibleDrawError(DomainError):
    """A without-replacement draw asks for more distinct values than exist."""


class UndefinedCorrelationError(DomainError):
    """Correlation of a constant sequence."""


class EmptyStratumError(DomainError):
    """No sampled pairs at the requested distance."""


class DegenerateLabelsError(DomainError):
    """ROC input with only positive or only negative labels."""


class StateError(FolkError, RuntimeError):
    """An incremental update is inconsistent with the indexed state."""


class UnsupportedOperationError(FolkError, TypeError):
    """Operation not defined for the given configuration."""
