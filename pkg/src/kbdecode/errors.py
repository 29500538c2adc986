"""Exception types shared across the toolkit."""

from __future__ import annotations


class KBDecodeError(Exception):
    """Base class for all toolkit errors."""


class UnknownTokenError(KBDecodeError):
    """A string cannot be tokenized under the active vocabulary."""

    def __init__(self, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f"cannot tokenize {text!r} at position {position}")


class CatalogFormatError(KBDecodeError):
    """A catalog name or catalog file violates the catalog contract."""


class UnknownEntityError(KBDecodeError):
    """An entity name was expected in the catalog but is absent."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"entity not in catalog: {name!r}")


class InvalidPrefixError(KBDecodeError):
    """A token sequence leaves the prefix index (not a prefix of any name)."""

    def __init__(self, prefix: tuple, position: int):
        self.prefix = prefix
        self.position = position
        super().__init__(f"token sequence leaves the index at position {position}")


class StrictParseError(KBDecodeError):
    """A token sequence is not a strictly valid linearization.

    Carries the first diagnostic encountered: ``kind`` (a ParseIssue) and the
    token ``position`` where the problem starts.
    """

    def __init__(self, kind, position: int):
        self.kind = kind
        self.position = position
        super().__init__(f"{kind.name} at token {position}")


class IllegalTransitionError(KBDecodeError):
    """A decoder state was advanced with a token that is not allowed."""


class NoValidContinuationError(KBDecodeError):
    """Constrained search exhausted its length budget with no finished output."""


class ScorerVocabularyMismatch(KBDecodeError):
    """A scorer and a catalog disagree on the token vocabulary."""


class SampleError(KBDecodeError):
    """A per-sample failure, tagged with the sample id it came from."""

    def __init__(self, sample_id: str, cause: Exception):
        self.sample_id = sample_id
        super().__init__(f"sample {sample_id!r}: {cause}")
        self.__cause__ = cause
