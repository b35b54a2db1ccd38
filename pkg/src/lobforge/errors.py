"""Exception hierarchy shared across the package."""


class LobforgeError(Exception):
    """Base class for all package-specific errors."""


class EmptySide(LobforgeError):
    """A book side required to anchor the level window is empty."""


class CrossedSpec(LobforgeError):
    """An initial book specification has best bid >= best ask."""


class InconsistentActivity(LobforgeError):
    """A cancellation count exceeds the orders resting at its level."""


class NotPositiveDefinite(LobforgeError):
    """A matrix that must be symmetric positive-definite is not."""


class InvalidConfig(LobforgeError):
    """A configuration object or flag combination is invalid."""


class InvalidRatio(LobforgeError):
    """A quote-to-trade ratio must be strictly greater than 1."""


class DegenerateSeries(LobforgeError):
    """A time series is constant or otherwise unusable for fitting."""


class DegenerateDay(LobforgeError):
    """A sampled interval lacks a two-sided book, so mid prices are undefined."""


class LengthMismatch(LobforgeError):
    """Two objective vectors being compared have different lengths."""


class InsufficientReplications(LobforgeError):
    """Too few re-simulations requested for a coverage analysis."""


class ParseError(LobforgeError):
    """A data file failed to parse; carries the offending line number."""

    def __init__(self, message, line_no=None):
        super().__init__(message if line_no is None else f"line {line_no}: {message}")
        self.line_no = line_no


class MonotonicityError(LobforgeError):
    """Event timestamps decrease within a file."""


class ReplayError(LobforgeError):
    """An event stream cannot be replayed into a consistent book."""


class DegenerateLevel(LobforgeError):
    """A price level has zero variance and cannot enter a correlation."""
