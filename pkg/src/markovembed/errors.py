"""Exception types shared across the package."""


class MarkovEmbedError(Exception):
    """Base class for all library-specific errors."""


class DimensionError(MarkovEmbedError):
    """Input matrix is not a finite real square matrix of dimension 2-4."""


class IllConditionedError(MarkovEmbedError):
    """A numerical decision (rank, conditioning) is too close to its threshold."""


class SpectrumOnCutError(MarkovEmbedError):
    """Principal logarithm undefined: an eigenvalue lies on (-inf, 0]."""


class DegenerateDenominatorError(MarkovEmbedError):
    """Closed-form log coefficients hit a (near-)vanishing denominator."""


class NonpositiveParameterError(MarkovEmbedError):
    """A parameter that must be strictly positive is not."""


class InfeasibleParamsError(MarkovEmbedError):
    """Model parameters violate their feasibility constraints."""


class NotTotallyPositiveError(MarkovEmbedError):
    """Operation requires a matrix with all entries strictly positive."""


class NotConvergedError(MarkovEmbedError):
    """Iterative series truncated before reaching the requested tolerance."""


class ClassificationError(MarkovEmbedError):
    """Jordan data does not match any known case pattern."""
