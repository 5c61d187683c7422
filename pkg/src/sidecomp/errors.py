"""Exception hierarchy shared by all sidecomp modules."""


class SidecompError(Exception):
    """Base class for every error raised by this package."""


class GaussianDivisionByZero(SidecompError, ZeroDivisionError):
    """Division of a Gaussian rational by zero."""


class DimensionError(SidecompError, ValueError):
    """Operands have incompatible shapes."""


class SizeCapError(SidecompError, ValueError):
    """A matrix or model exceeds the configured size cap."""


class SingularMatrixError(SidecompError, ArithmeticError):
    """Raised by inversion; ``witness`` is a nonzero kernel vector."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotTriangularError(SidecompError, ValueError):
    pass


class FieldValidationError(SidecompError, ValueError):
    """Operator field violates a structural invariant.

    ``problems`` holds one human-readable string per violation.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class UnknownCellError(SidecompError, KeyError):
    pass


class SkeletonMismatchError(SidecompError, ValueError):
    pass


class HypothesisError(SidecompError):
    """A precondition taken from the underlying theorems does not hold."""


class InfiniteMultiplicityError(HypothesisError):
    """A finite matrix was requested for a summand of infinite multiplicity."""


class NotIdempotentError(SidecompError, ValueError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotInCommutantError(SidecompError, ValueError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotCommutingError(SidecompError, ValueError):
    pass


class NotMaximalError(SidecompError, ValueError):
    pass


class NotSimilarError(SidecompError, ValueError):
    """Two idempotents have different class vectors.

    ``obstruction`` maps (spectral value, block size) to the pair of
    normalized traces that differ.
    """

    def __init__(self, message, obstruction=None):
        super().__init__(message)
        self.obstruction = obstruction or {}


class NonCanonicalError(SidecompError, ValueError):
    pass


class ParseError(SidecompError, ValueError):
    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + loc)
        self.line = line
        self.column = column
