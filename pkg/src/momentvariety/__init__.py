"""Support recovery from moments via kernels of Hankel/Toeplitz moment matrices."""

from .errors import NumericalError, ValidationError
from .idealrecovery import DeltaBound, Fixed, IdealBasis, Stabilize, numerical_kernel, recover_truncated_ideal
from .measures import (
    AffineCurve,
    Atomic,
    MeasureSpec,
    MomentTable,
    QuadratureConfig,
    Space,
    TrigCurve,
    WeightedComponent,
    atomic_measure,
    moments,
    uniform_curve_moments,
)
from .momentmatrix import MomentMatrix, assemble, vandermonde
from .polyalgebra import FiltrationBasis, Poly, build_basis
from .pronysolver import AtomicRecovery, prony, solve_points, solve_weights

__version__ = "0.1.0"
