"""Exception hierarchy.

Two families: :class:`ValidationError` for malformed input (CLI exit code 2)
and :class:`NumericalError` for computations that could not be completed to
the requested accuracy (CLI exit code 3).
"""


class ValidationError(ValueError):
    pass


class DomainError(ValidationError):
    """Laurent monomial evaluated at a point with a zero coordinate."""


class MissingMomentsError(ValidationError):
    def __init__(self, missing):
        self.missing = [tuple(int(a) for a in alpha) for alpha in missing]
        shown = ", ".join(str(a) for a in self.missing[:8])
        more = "" if len(self.missing) <= 8 else f" (+{len(self.missing) - 8} more)"
        super().__init__(f"moment table does not cover {len(self.missing)} indices: {shown}{more}")


class NumericalError(ArithmeticError):
    pass


class QuadratureError(NumericalError):
    def __init__(self, worst_alpha, estimate, tol):
        self.worst_alpha = tuple(int(a) for a in worst_alpha)
        self.estimate = float(estimate)
        self.tol = float(tol)
        super().__init__(
            f"quadrature error estimate {estimate:.3e} exceeds {tol:.1e} at alpha={self.worst_alpha}"
        )


class StabilizationError(NumericalError):
    def __init__(self, message, last_kernels=()):
        self.last_kernels = tuple(last_kernels)
        super().__init__(message)


class QuotientDependencyError(NumericalError):
    def __init__(self, message, dependency=None):
        self.dependency = dependency
        super().__init__(message)


class DegreeTooSmallError(NumericalError):
    pass


class RankDeficientError(NumericalError):
    pass


class NotPositiveDefiniteError(NumericalError):
    pass


class ParametrizationMismatchError(NumericalError):
    def __init__(self, residual, tol):
        self.residual = float(residual)
        super().__init__(
            f"ideal generators do not vanish on the supplied parametrization "
            f"(max residual {residual:.3e} > {tol:.1e})"
        )
