"""Exception hierarchy shared by all pipeline stages.

Every error carries a ``category`` that the CLI maps to an exit code:
``config`` -> 2, ``data`` -> 3, ``numerical`` -> 4.
"""


class PipeaError(Exception):
    """Base class for all errors raised by this package."""

    category = "config"


class ConfigError(PipeaError):
    """Invalid configuration: bad flag combination, unknown key, bad value."""

    category = "config"


class ParameterError(PipeaError):
    """An operation was called with arguments outside its precondition."""

    category = "config"


class DatasetFormatError(PipeaError):
    """A dataset or similarity file is missing or cannot be parsed."""

    category = "data"


class IntegrityError(PipeaError):
    """Parsed data is internally inconsistent (bad references, duplicates)."""

    category = "data"


class DomainError(PipeaError):
    """Numeric values outside the domain an operation requires."""

    category = "numerical"


class DegenerateInputError(PipeaError):
    """The computation degenerated (e.g. everything was thresholded away)."""

    category = "numerical"
