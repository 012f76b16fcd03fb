"""Exception hierarchy shared by the client, codec and simulator."""

from __future__ import annotations


class AfluxError(Exception):
    """Base class for every error raised by this package."""


class UsageError(AfluxError, ValueError):
    """A caller passed arguments that violate a documented precondition."""


# -- keyword schema -----------------------------------------------------------

class SchemaParseError(AfluxError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class DuplicateKeywordError(AfluxError):
    def __init__(self, name: str):
        super().__init__(f"duplicate keyword {name!r} in schema")
        self.name = name


class UnknownKeywordError(AfluxError, KeyError):
    def __init__(self, name: str, suggestions: tuple[str, ...] = ()):
        self.name = name
        self.suggestions = tuple(suggestions)
        msg = f"unknown keyword {name!r}"
        if self.suggestions:
            msg += "; did you mean " + ", ".join(self.suggestions) + "?"
        super().__init__(msg)

    def __str__(self) -> str:  # KeyError would repr() the message otherwise
        return self.args[0]


# -- filter expressions -------------------------------------------------------

class InvalidComparisonError(AfluxError, TypeError):
    pass


class ValidationError(AfluxError):
    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


# -- summons codec ------------------------------------------------------------

class SummonsSyntaxError(AfluxError):
    def __init__(self, message: str, offset: int, expected=()):
        self.offset = offset
        self.expected = tuple(expected)
        text = f"{message} at byte {offset}"
        if self.expected:
            text += ", expecting " + " or ".join(repr(t) for t in self.expected)
        super().__init__(text)


class MissingDirectiveError(AfluxError):
    pass


class UnknownDirectiveError(AfluxError):
    pass


class PagingRangeError(AfluxError):
    pass


class NotEncodableError(AfluxError):
    pass


class PatternTypeError(AfluxError, TypeError):
    """A filter pattern does not fit the kind of its keyword."""


# -- value serialization ------------------------------------------------------

class DecodeError(AfluxError, ValueError):
    def __init__(self, kind: str, offset: int, token: str, reason: str = "malformed token"):
        self.kind = kind
        self.offset = offset
        self.token = token
        super().__init__(f"{kind}: {reason} {token!r} at offset {offset}")


class EmptyValueError(DecodeError):
    def __init__(self, kind: str):
        super().__init__(kind, 0, "", "empty value")


class ShapeError(DecodeError):
    pass


class ValueTypeError(AfluxError, TypeError):
    pass


# -- transport / protocol -----------------------------------------------------

class TransportError(AfluxError):
    def __init__(self, url: str, attempts: int, cause: BaseException | None = None):
        self.url = url
        self.attempts = attempts
        self.cause = cause
        super().__init__(f"GET {url} failed after {attempts} attempt(s): {cause}")


class ProtocolError(AfluxError):
    pass


class MissingPropertyError(AfluxError, AttributeError):
    def __init__(self, keyword: str, aurl: str):
        self.keyword = keyword
        self.aurl = aurl
        super().__init__(f"entry {aurl} has no property {keyword!r}")


# -- structures / dataset -----------------------------------------------------

class IncompleteStructureError(AfluxError):
    def __init__(self, missing):
        self.missing = tuple(missing)
        super().__init__("structure needs missing properties: " + ", ".join(self.missing))


class ConsistencyError(AfluxError):
    pass


class DatasetError(AfluxError):
    def __init__(self, message: str, record=None, field=None):
        self.record = record
        self.field = field
        where = ""
        if record is not None:
            where = f"record {record}"
            if field is not None:
                where += f", field {field!r}"
            where += ": "
        super().__init__(where + message)
