"""Exception hierarchy."""


class HelixProjError(Exception):
    """Base class for all package errors."""


class InvalidInput(HelixProjError, ValueError):
    """Malformed matrices, labels or parameters."""


class NotPSD(InvalidInput):
    """Matrix has an eigenvalue below the PSD tolerance."""


class ProjectionUndefined(HelixProjError):
    """Spherical projection of a point onto (the complement of) itself."""


class DimensionMismatch(InvalidInput):
    pass


# metric spaces

class InvalidMetric(InvalidInput):
    """Distance matrix violates the metric axioms."""


class CoincidentPoints(InvalidMetric):
    """Two distinct labels at distance zero."""


class DegenerateQuadruple(CoincidentPoints):
    pass


class NotTriangleEqual(HelixProjError):
    """Some triangle has its largest side strictly shorter than the other two combined."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotEmbeddable(HelixProjError):
    """Metric space admits no isometric embedding into the real line."""

    def __init__(self, message, quadruple=None):
        super().__init__(message)
        self.quadruple = quadruple


class InvalidParameters(InvalidInput):
    pass


# classification

class NotAdmissible(InvalidParameters):
    """Quadruple parameters whose Gram matrix is not PSD (or x == y)."""


class ZeroPivot(HelixProjError):
    pass


class SignInconsistency(HelixProjError):
    """Sign-adjusted correlations are not all positive."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class NonPositiveEntry(InvalidInput):
    pass


# processes

class DomainError(InvalidInput):
    pass


class DegenerateConditioning(HelixProjError):
    pass


class InsufficientSamples(InvalidInput):
    pass
