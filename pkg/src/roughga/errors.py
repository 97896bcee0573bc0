"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class RoughGAError(Exception):
    """Base class for all library errors."""


class SchemaError(RoughGAError, ValueError):
    """Attribute schema is malformed or does not match the data."""


class RowError(RoughGAError, ValueError):
    """A data row could not be read; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ConfigurationError(RoughGAError, ValueError):
    """An operation was requested with an incompatible configuration."""


class ParameterError(RoughGAError, ValueError):
    """An argument is outside the operation's preconditions."""


class RangeError(RoughGAError, ValueError):
    """A value lies outside its attribute's domain bounds."""

    def __init__(self, record_id: int, attribute: str, value: object):
        super().__init__(
            f"record {record_id}: value {value!r} of attribute {attribute!r} "
            "is outside the attribute bounds"
        )
        self.record_id = record_id
        self.attribute = attribute
        self.value = value


class StateError(RoughGAError, RuntimeError):
    """An object is not in the state the operation requires."""
