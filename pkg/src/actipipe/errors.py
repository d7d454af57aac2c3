"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: format problems exit 2, empty data
exits 3, degenerate label sets exit 4, anything else exits 1.
"""


class ActipipeError(Exception):
    """Base class for all pipeline errors."""


class FormatError(ActipipeError):
    """Malformed input file or out-of-range value."""


class EmptySeriesError(ActipipeError):
    """A series is empty, or became empty after cleaning."""


class DegenerateLabelsError(ActipipeError):
    """Target labels contain a single class."""


class InsufficientDataError(ActipipeError):
    """Not enough paired observations for a statistic."""


class UndefinedStatisticError(ActipipeError):
    """A statistic is undefined for the given input (e.g. zero variance)."""
