"""Exception hierarchy shared by all qwcat modules."""


class QWCatError(Exception):
    """Base class for every error raised by qwcat."""


class SchemaError(QWCatError):
    """A walk or state document does not match the expected schema."""


class NonUnitaryError(QWCatError):
    """The symbol of a walk fails the unitarity gate."""

    def __init__(self, defect, worst_k):
        self.defect = float(defect)
        self.worst_k = tuple(float(x) for x in worst_k)
        super().__init__(
            f"symbol is not unitary: defect {self.defect:.3e} at k={self.worst_k}"
        )


class NonUnitarySymbol(QWCatError):
    """An eigenvalue of a symbol evaluation is off the unit circle."""


class DimensionMismatch(QWCatError):
    """Spatial dimension or degree of freedom of two objects disagree."""


class NotNormalized(QWCatError):
    """A distribution was requested from a vector that is not a unit vector."""


class TrackingAmbiguity(QWCatError):
    """Eigenvalue branches could not be continued unambiguously."""


class UnwrapFailure(QWCatError):
    """Adjacent phase samples jump too far to be unwrapped reliably."""


class WindowTooSmall(QWCatError):
    """A truncated computational window cannot hold the state."""


class NotRealizable(QWCatError):
    """The walk has an eigenvalue function with nonzero winding."""
