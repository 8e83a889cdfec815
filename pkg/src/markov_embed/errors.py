"""Exception hierarchy shared by all modules."""


class EmbeddingError(Exception):
    """Base class for every error raised by markov_embed."""


class ValidationError(EmbeddingError, ValueError):
    pass


class RowSumViolation(ValidationError):
    pass


class NegativeEntry(ValidationError):
    pass


class MetzlerViolation(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NotEqualInput(ValidationError):
    pass


class NotDoublyStochastic(ValidationError):
    pass


class ConstraintViolation(ValidationError):
    pass


class OutOfDomain(ValidationError):
    pass


class DegenerateSum(ValidationError):
    pass


class DimensionTooLarge(ValidationError):
    pass


class SingularMatrixError(EmbeddingError):
    pass


class SpectrumOnCut(EmbeddingError):
    """An eigenvalue lies on the closed negative real axis."""


class ConvergenceFailure(EmbeddingError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PeripheralSpectrum(EmbeddingError):
    """Eigenvalues other than 1 on the unit circle; M^n does not converge."""


class OracleMismatch(EmbeddingError):
    pass


class NotCyclic(EmbeddingError):
    pass


class ConsistencyError(EmbeddingError):
    """Internal cross-check between two derivations disagreed."""


class ParseError(EmbeddingError):
    def __init__(self, message, line=None, col=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {col}" if col is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.col = col
