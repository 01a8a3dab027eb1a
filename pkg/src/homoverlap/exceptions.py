"""Exception types raised by homoverlap."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class NormalizationError(DomainError):
    """The shoulder (normalization) count is zero, so no ratio can be formed."""


class DegenerateDesignError(DomainError):
    """The least-squares design matrix is rank deficient."""


class NoPhaseResolvableError(DomainError):
    """A fitted amplitude is not positive, so no phase can be extracted."""


class ConfigError(ValueError):
    """Malformed or unknown entry in a run configuration."""


class CountsParseError(ValueError):
    """Malformed row in a counts CSV file."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
