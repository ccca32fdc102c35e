class AnnReorderError(Exception):
    pass


class ContractViolation(AnnReorderError, ValueError):
    """Raised when a caller breaks an operation's precondition."""


class FormatError(AnnReorderError):
    """A file does not match the layout it claims to have."""

    def __init__(self, msg, path=None, offset=None, line=None):
        self.msg = msg
        self.path = path
        self.offset = offset
        self.line = line
        super().__init__(str(self))

    def __str__(self):
        where = []
        if self.path is not None:
            where.append(str(self.path))
        if self.offset is not None:
            where.append(f"byte {self.offset}")
        if self.line is not None:
            where.append(f"line {self.line}")
        if where:
            return f"{', '.join(where)}: {self.msg}"
        return self.msg


class TopologyError(FormatError):
    """An ingested graph breaks the fixed-degree invariants."""


class ConfigError(AnnReorderError):
    pass


class DegenerateCorrelation(AnnReorderError):
    """Rank correlation is undefined because one input has no rank variance."""


class RecallMismatch(AnnReorderError):
    """A reordered index returned different distances than its baseline."""
