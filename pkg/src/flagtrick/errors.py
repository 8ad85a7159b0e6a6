"""Exception and warning types shared across the package."""


class InvalidInput(ValueError):
    """Malformed or out-of-contract argument (shape, rank, range, labels)."""


class DegenerateRetraction(RuntimeError):
    """Polar retraction target lost column rank; no orthonormal factor nearby."""


class NumericalBlowup(RuntimeError):
    """An objective or gradient evaluated to a non-finite value."""


class RankDeficient(RuntimeError):
    """A matrix whose rank must exceed the requested subspace dimension does not."""


class DegenerateDenominator(RuntimeError):
    """Trace-ratio denominator fell below the safe threshold."""


class ParseError(ValueError):
    """CSV content that cannot be interpreted; carries row/column location."""

    def __init__(self, message, row=None, col=None):
        loc = ""
        if row is not None:
            loc = f" (row {row}" + (f", column {col}" if col is not None else "") + ")"
        super().__init__(message + loc)
        self.row = row
        self.col = col


class FallbackToRandomInit(RuntimeError):
    """Bracket endpoints unavailable (singular B); caller should pick its own start."""


class NonUniqueWarning(UserWarning):
    """Eigengap at a cut point is numerically zero; the optimal flag is not unique."""
