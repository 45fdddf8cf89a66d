"""Exception types raised on contract violations in input data."""


class DataError(Exception):
    """Input data violates a format or content contract."""


class CorpusError(DataError):
    pass


class UnknownCaseError(CorpusError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class JudgmentsError(DataError):
    pass


class IndexFormatError(DataError):
    """Persisted index is missing, truncated, or of another format version."""


class RunFileError(DataError):
    pass


class ConfigMismatchError(DataError):
    """Query-side analysis settings disagree with the ones the index was built with."""
