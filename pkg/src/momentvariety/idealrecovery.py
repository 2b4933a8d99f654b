"""Numerical kernels of moment matrices and truncated vanishing ideals.

The kernel of ``H_{d', d}`` always contains the degree-``d`` part of the
vanishing ideal of the support.  For non-negative measures the square matrix
already gives equality; for signed measures the kernels shrink as the row
degree ``d'`` grows and eventually settle on the truncated ideal, which is
what :func:`recover_truncated_ideal` with a :class:`Stabilize` policy tracks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
import scipy.linalg

from .errors import StabilizationError, ValidationError
from .measures import MomentTable
from .momentmatrix import MomentMatrix, assemble
from .polyalgebra import FiltrationBasis, Poly, RingKind, monomial_powers

log = logging.getLogger(__name__)

GAP_THRESHOLD = 1e3
KAPPA_GUARD = 1e3
PIVOT_TOL = 1e-10
ANGLE_TOL = 1e-8


@dataclass(frozen=True)
class KernelReport:
    singular_values: tuple[float, ...]
    rank: int
    nullity: int
    gap_ratio: float
    tolerance: float
    rule: str  # "gap", "threshold" or "zero"

    def to_json(self) -> dict:
        return {
            "singular_values": list(self.singular_values),
            "rank": self.rank,
            "nullity": self.nullity,
            "gap_ratio": self.gap_ratio if np.isfinite(self.gap_ratio) else None,
            "tolerance": self.tolerance,
            "rule": self.rule,
        }


@dataclass(frozen=True, eq=False)
class IdealBasis:
    """Truncated ideal recovered as a kernel, in the column basis ``R_{<=d}``.

    ``kernel`` holds orthonormal coordinates (columns); ``generators`` is the
    same space in reduced echelon form, one unit leading coefficient each.
    """

    basis: FiltrationBasis
    kernel: np.ndarray
    generators: tuple[Poly, ...]
    pivots: tuple[int, ...]
    report: KernelReport
    stabilized_at: int | None = None
    history: tuple[int, ...] = field(default=())

    @property
    def dim(self) -> int:
        return self.kernel.shape[1]

    @property
    def tolerance(self) -> float:
        return self.report.tolerance

    def contains_constant(self, tol: float = 1e-8) -> bool:
        """Whether ``1`` lies in the kernel (no point can satisfy all generators)."""
        e = np.zeros(len(self.basis), dtype=complex)
        e[self.basis.index[(0,) * self.basis.n]] = 1.0
        return subspace_residual(e[:, None], self.kernel) <= tol

    def leading_monomials(self) -> list[tuple[int, ...]]:
        return [self.basis.elements[i] for i in self.pivots]

    def residuals_at(self, points) -> np.ndarray:
        """Largest ``|p(xi)|`` over unit-norm kernel elements ``p``, per point."""
        if self.dim == 0:
            return np.zeros(np.atleast_2d(points).shape[0])
        vals = monomial_powers(points, self.basis.exponents) @ self.kernel
        return np.linalg.norm(vals, axis=1)

    def to_json(self) -> dict:
        return {
            "basis": self.basis.describe(),
            "generators": [g.to_json() for g in self.generators],
            "leading_monomials": [list(a) for a in self.leading_monomials()],
            "tolerance": self.report.tolerance,
            "singular_values": list(self.report.singular_values),
            "rank": self.report.rank,
            "rule": self.report.rule,
            "stabilized_at": self.stabilized_at,
        }


# -- rank decision -------------------------------------------------------------------


def decide_rank(s: np.ndarray, ncols: int, nrows: int, tol: float | str = "auto") -> tuple[int, float, float, str]:
    """Numerical rank from a singular spectrum.

    Auto mode: the largest ratio ``s[i] / s[i+1]`` (structural zeros included
    when the matrix is wide, values floored at roundoff level) decides if it
    exceeds ``GAP_THRESHOLD``;
    otherwise values ``<= tau * s_max`` with ``tau = max(m, n) * eps * 1e3``
    are dropped.  An explicit float ``tol`` uses the threshold rule only.
    """
    s = np.asarray(s, dtype=float)
    full = np.zeros(ncols)
    full[: s.size] = s[:ncols]
    auto = isinstance(tol, str)
    if auto:
        if tol != "auto":
            raise ValidationError(f"tolerance must be a float or 'auto', got {tol!r}")
        tau = max(nrows, ncols) * np.finfo(float).eps * KAPPA_GUARD
    else:
        tau = float(tol)
        if not 0 < tau < 1:
            raise ValidationError("relative tolerance must lie in (0, 1)")
    smax = full[0] if ncols else 0.0
    if smax == 0.0:
        return 0, np.inf, tau, "zero"
    # values below the roundoff floor all count as zero, so noise never forms a gap
    floored = np.maximum(full, max(nrows, ncols) * np.finfo(float).eps * smax)
    ratios = floored[:-1] / floored[1:]
    gap = float(ratios.max()) if ratios.size else np.inf
    if auto and ratios.size and gap > GAP_THRESHOLD:
        return int(np.argmax(ratios)) + 1, gap, tau, "gap"
    rank = int((full > tau * smax).sum())
    return rank, gap, tau, "threshold"


# -- echelon form ----------------------------------------------------------------------


def echelonize(kernel: np.ndarray, pivot_tol: float = PIVOT_TOL) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of the kernel, pivoting on the latest monomials.

    Returns ``(G, pivots)``: ``G`` has one row per kernel vector with a unit
    entry at its pivot column and zeros at every other pivot column.  Columns
    are swept from the end of the monomial order, so pivots are leading
    monomials for the graded order of :mod:`polyalgebra`.
    """
    a = np.array(kernel, dtype=complex).T.copy()
    m, k = a.shape
    if m == 0:
        return a, []
    scale = np.abs(a).max()
    pivots = []
    row = 0
    for col in range(k - 1, -1, -1):
        if row == m:
            break
        sub = np.abs(a[row:, col])
        best = int(np.argmax(sub))
        if sub[best] <= pivot_tol * scale:
            a[row:, col] = 0.0  # below tolerance for every remaining row
            continue
        best += row
        if best != row:
            a[[row, best]] = a[[best, row]]
        a[row] /= a[row, col]
        others = np.arange(m) != row
        a[others] -= np.outer(a[others, col], a[row])
        a[others, col] = 0.0
        a[row, col] = 1.0
        pivots.append(col)
        row += 1
    if row < m:
        log.warning("echelon form lost %d kernel vectors below pivot tolerance", m - row)
    return a[:row], pivots


# -- kernels --------------------------------------------------------------------------------


def _ideal_from_kernel(cols: FiltrationBasis, kernel: np.ndarray, report: KernelReport, **kw) -> IdealBasis:
    g, pivots = echelonize(kernel)
    order = np.argsort(pivots)
    gens = tuple(Poly(cols, g[i]) for i in order)
    return IdealBasis(cols, kernel, gens, tuple(int(pivots[i]) for i in order), report, **kw)


def numerical_kernel(H: MomentMatrix, tol: float | str = "auto") -> tuple[IdealBasis, KernelReport]:
    """Kernel of a moment matrix with its singular-value audit."""
    vals = H.values
    m, k = vals.shape
    if not isinstance(H.cols, FiltrationBasis):
        raise ValidationError("numerical_kernel needs a matrix with a monomial column basis")
    if m == 0 or k == 0:
        s = np.zeros(0)
        vh = np.eye(k, dtype=complex)
    else:
        _, s, vh = scipy.linalg.svd(vals, full_matrices=True, lapack_driver="gesvd")
    rank, gap, tau, rule = decide_rank(s, k, m, tol)
    kernel = vh[rank:].conj().T
    report = KernelReport(tuple(float(x) for x in s), rank, k - rank, gap, tau, rule)
    return _ideal_from_kernel(H.cols, kernel, report), report


# -- subspace comparison -------------------------------------------------------------


def subspace_residual(a: np.ndarray, b: np.ndarray) -> float:
    """Largest distance of a unit column of ``span(a)`` from ``span(b)``.

    Equals the sine of the largest principal angle when ``dim a <= dim b``;
    zero means containment.
    """
    if a.shape[1] == 0:
        return 0.0
    qa = scipy.linalg.orth(a) if a.shape[1] else a
    if qa.shape[1] == 0:
        return 0.0
    if b.shape[1] == 0:
        return 1.0
    qb = scipy.linalg.orth(b)
    r = qa - qb @ (qb.conj().T @ qa)
    return float(np.linalg.norm(r, 2))


def max_principal_angle(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape[1] == 0 and b.shape[1] == 0:
        return 0.0
    if a.shape[1] == 0 or b.shape[1] == 0:
        return np.pi / 2
    return float(np.max(scipy.linalg.subspace_angles(a, b)))


def same_subspace(a: np.ndarray, b: np.ndarray, tol: float = ANGLE_TOL) -> bool:
    return a.shape[1] == b.shape[1] and max_principal_angle(a, b) <= tol


# -- row policies ------------------------------------------------------------------


@dataclass(frozen=True)
class Fixed:
    row_degree: int


@dataclass(frozen=True)
class DeltaBound:
    delta: int


@dataclass(frozen=True)
class Stabilize:
    start: int | None = None
    step: int = 1
    max: int = 12


RowPolicy = Union[Fixed, DeltaBound, Stabilize]


def recover_truncated_ideal(
    table: MomentTable,
    degree: int,
    row_policy: RowPolicy = DeltaBound(0),
    tol: float | str = "auto",
    row_ring: RingKind | str | None = None,
    col_ring: RingKind | str = RingKind.POLYNOMIAL,
) -> IdealBasis:
    """Kernel of ``H_{d', d}`` for a row degree chosen by ``row_policy``.

    ``Fixed(d')`` and ``DeltaBound(delta)`` (``d' = d + delta``) assemble one
    matrix.  ``Stabilize(start, step, max)`` raises ``d'`` from ``start``
    (default ``d``) until two consecutive kernels agree in dimension and
    principal angles, and returns the later one; ``stabilized_at`` records
    the first row degree of the plateau.
    """
    if isinstance(row_policy, Fixed):
        rows = [row_policy.row_degree]
    elif isinstance(row_policy, DeltaBound):
        rows = [degree + row_policy.delta]
    elif isinstance(row_policy, Stabilize):
        start = degree if row_policy.start is None else row_policy.start
        if row_policy.step < 1:
            raise ValidationError("stabilization step must be positive")
        rows = list(range(start, row_policy.max + 1, row_policy.step))
        if len(rows) < 2:
            raise ValidationError("stabilization range needs at least two row degrees")
    else:
        raise ValidationError(f"unknown row policy {row_policy!r}")
    if any(r < 0 for r in rows):
        raise ValidationError("row degree must be non-negative")

    def kernel_at(d_row):
        H = assemble(table, d_row, degree, row_ring=row_ring, col_ring=col_ring)
        ideal, _ = numerical_kernel(H, tol)
        return ideal

    if not isinstance(row_policy, Stabilize):
        ideal = kernel_at(rows[0])
        return _with(ideal, stabilized_at=rows[0], history=(rows[0],))

    prev, prev_row = kernel_at(rows[0]), rows[0]
    for d_row in rows[1:]:
        cur = kernel_at(d_row)
        if same_subspace(prev.kernel, cur.kernel):
            return _with(cur, stabilized_at=prev_row, history=tuple(r for r in rows if r <= d_row))
        prev, prev_row = cur, d_row
    raise StabilizationError(
        f"kernel did not stabilize for row degrees {rows[0]}..{rows[-1]}",
        last_kernels=(prev,),
    )


def _with(ideal: IdealBasis, **kw) -> IdealBasis:
    return IdealBasis(
        ideal.basis, ideal.kernel, ideal.generators, ideal.pivots, ideal.report,
        kw.get("stabilized_at", ideal.stabilized_at), kw.get("history", ideal.history),
    )


# -- verification ---------------------------------------------------------------------


@dataclass(frozen=True)
class ContainmentReport:
    residuals: tuple[float, ...]
    max_residual: float
    tol: float
    ok: bool


def verify_containment(ideal_gens: Sequence[Poly], H: MomentMatrix, tol: float = 1e-8) -> ContainmentReport:
    """Check ``||H g|| <= tol * ||H|| * ||g||`` for each polynomial ``g``."""
    hn = H.norm()
    res = []
    for g in ideal_gens:
        c = g.embed(H.cols).coeffs
        gn = np.linalg.norm(c)
        if gn == 0 or hn == 0:
            res.append(0.0)
            continue
        res.append(float(np.linalg.norm(H.values @ c) / (hn * gn)))
    mx = max(res, default=0.0)
    return ContainmentReport(tuple(res), mx, tol, mx <= tol)


def kernel_contains(big: np.ndarray, small: np.ndarray, tol: float = ANGLE_TOL) -> bool:
    """``span(small) ⊆ span(big)`` within ``tol``."""
    return subspace_residual(small, big) <= tol
