"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: usage problems exit 1, data problems
exit 2, anything unexpected exits 3.
"""


class EmbedvarError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(EmbedvarError):
    """Invalid configuration or experiment setup."""


class DataError(EmbedvarError):
    """Invalid or degenerate input data."""


class EncodingError(DataError):
    """Input file is not valid UTF-8; carries the 1-based line number."""

    def __init__(self, path, line_number, message="invalid UTF-8"):
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}: line {line_number}: {message}")


class SchemaError(DataError):
    """A delimited file is missing a required column."""


class ParseError(DataError):
    """A row or header could not be parsed; carries the 1-based line number."""

    def __init__(self, path, line_number, message):
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}: line {line_number}: {message}")


class EmptyVocabError(DataError):
    """No word survived the frequency threshold."""


class TrainingDivergenceError(EmbedvarError):
    """A non-finite value appeared during training; carries the update step."""

    def __init__(self, step):
        self.step = step
        super().__init__(f"non-finite value encountered at update step {step}")


class DegenerateVectorError(DataError):
    """A query word has a zero-norm vector; cosine similarity is undefined."""


class PoolError(DataError):
    """The neighbor candidate pool is smaller than the requested k."""


class ScheduleError(ConfigError):
    """Pair schedule cannot be built (too few runs per condition)."""


class MissingSpaceError(ConfigError):
    """A scheduled embedding space was not supplied."""


class JoinError(DataError):
    """Annotation resources have an empty intersection."""


class DegenerateVarianceError(DataError):
    """A statistic is undefined because the sample variance is zero."""


class CollinearDesignError(DataError):
    """The regression design matrix is rank deficient; names the columns."""

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(
            "design matrix is rank deficient; collinear columns: "
            + ", ".join(self.columns)
        )
