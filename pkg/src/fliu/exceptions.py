"""Exception hierarchy shared across the package."""


class FliuError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateInput(FliuError):
    """Input is degenerate for the requested operation (e.g. a zero matrix)."""


class SingularSystem(FliuError):
    """A linear system is singular to working tolerance."""

    def __init__(self, message, sigma_min=None, sigma_max=None):
        if sigma_min is not None and sigma_max is not None:
            message = f"{message} (sigma_min={sigma_min:.3e}, sigma_max={sigma_max:.3e})"
        super().__init__(message)
        self.sigma_min = sigma_min
        self.sigma_max = sigma_max


class InvalidBasis(FliuError):
    """Basis specification violates a structural constraint."""


class BasisKindError(FliuError):
    """Operation applied to the wrong kind of basis."""


class DomainError(FliuError):
    """Evaluation grid falls outside the basis domain."""


class GridMismatch(FliuError):
    """Curves do not share a common observation grid."""


class UnderdeterminedCurveFit(FliuError):
    """Too few grid points to identify basis scores."""


class DimensionError(FliuError):
    """Vector/matrix dimensions do not match the expected shape."""


class InvalidParam(FliuError):
    """Penalty or tuning parameter outside its admissible range."""


class SaturatedSmoother(FliuError):
    """Smoother trace equals the sample size; GCV undefined."""


class LeverageOne(FliuError):
    """A leverage value equals one; PRESS undefined."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class TuningFailed(FliuError):
    """No admissible point found during criterion optimization."""


class InsufficientDof(FliuError):
    """Residual degrees of freedom are not positive."""


class DegeneratePlugIn(FliuError):
    """Risk quadratic is not strongly convex; plug-in rule undefined."""


class InvalidSplit(FliuError):
    """Train/test split specification is empty or inconsistent."""


class JoinError(FliuError):
    """Curve and response records could not be matched."""


class ParseError(FliuError):
    """A data file contains a malformed cell."""

    def __init__(self, message, row=None, column=None):
        if row is not None:
            message = f"{message} (row {row}" + (f", column {column})" if column is not None else ")")
        super().__init__(message)
        self.row = row
        self.column = column
