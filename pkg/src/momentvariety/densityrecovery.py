"""Positive-dimensional recovery: variety, uniform moments, density.

Given ``mu = g * mu_plus`` with ``mu_plus`` the uniform measure on the
recovered curve, ``g`` modulo the ideal solves the positive-definite system
``G g_bar = (sigma_mu(conj(w)))_{w in B}`` where ``G`` is the ``mu_plus``
Gramian on a quotient basis ``B`` of ``F_delta``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefiniteError, ParametrizationMismatchError, ValidationError
from .idealrecovery import DeltaBound, IdealBasis, recover_truncated_ideal
from .measures import (
    AffineCurve,
    MomentTable,
    ParamTrig,
    QuadratureConfig,
    TrigCurve,
    sample_body,
    uniform_curve_moments,
)
from .momentmatrix import MomentMatrix, involution_for, quotient_gram
from .polyalgebra import FiltrationBasis, Poly, RingKind, build_basis, involve, monomial_powers
from .pronysolver import AtomicRecovery, rank_certificate, snap_real, solve_points, solve_weights

log = logging.getLogger(__name__)

SPD_PIVOT_TOL = 1e-12
PARAM_TOL = 1e-6
HOLDOUT_FRACTION = 0.2

Support = Union[TrigCurve, AffineCurve, np.ndarray]


@dataclass(frozen=True, eq=False)
class DensityRecovery:
    ideal: IdealBasis
    quotient_basis: tuple[Poly, ...]
    g_bar: Poly
    gram: MomentMatrix
    residual: float  # relative, all covered indices
    holdout_residual: float  # relative, highest-degree 20% of entries
    delta: int

    @property
    def coordinates(self) -> np.ndarray:
        idx = [self.g_bar.basis.index[next(iter(b.terms()))] for b in self.quotient_basis]
        return self.g_bar.coeffs[idx]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.gram.values).min())

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "quotient_basis": [list(next(iter(b.terms()))) for b in self.quotient_basis],
            "coordinates": [[float(z.real), float(z.imag)] for z in self.coordinates],
            "g_bar": self.g_bar.to_json(),
            "gram_min_eigenvalue": self.min_eigenvalue(),
            "residual": self.residual,
            "holdout_residual": self.holdout_residual,
        }


def _truncation(ideal: IdealBasis, delta: int) -> tuple[FiltrationBasis, list[Poly], set[int]]:
    basis = ideal.basis
    if delta > basis.degree:
        raise ValidationError(f"delta={delta} exceeds the ideal's column degree {basis.degree}")
    small = basis.truncate(delta)
    # graded pivots: a generator led by a monomial of degree <= delta lives in F_delta
    gens, pivots = [], set()
    for p, g in zip(ideal.pivots, ideal.generators):
        alpha = basis.elements[p]
        if alpha in small.index:
            gens.append(g.embed(small))
            pivots.add(small.index[alpha])
    return small, gens, pivots


def quotient_basis(ideal: IdealBasis, delta: int) -> list[Poly]:
    """Monomials of ``F_delta`` complementary to the echelon pivots of the ideal."""
    small, _, pivots = _truncation(ideal, delta)
    kw = dict(n=small.n, ring=small.ring, filtration=small.filtration)
    return [Poly.monomial(a, **kw) for i, a in enumerate(small.elements) if i not in pivots]


def _support_table(support: Support, like: MomentTable, degree: int, quad: QuadratureConfig | None) -> MomentTable:
    basis = build_basis(like.space.n, degree, like.basis.ring, like.basis.filtration)
    if isinstance(support, (TrigCurve, AffineCurve)):
        tab = uniform_curve_moments(support, basis, quad)
        if tab.space != like.space:
            raise ValidationError("curve does not live in the space of the moment table")
        return tab
    pts = np.atleast_2d(np.asarray(support, dtype=complex))
    if pts.shape[1] != like.space.n:
        raise ValidationError("support points have the wrong dimension")
    vals = monomial_powers(pts, basis.exponents).sum(axis=0)
    return MomentTable(like.space, basis, vals, "exact")


def _spd_solve(G: np.ndarray, b: np.ndarray) -> np.ndarray:
    herm = 0.5 * (G + G.conj().T)
    if np.abs(herm - G).max() > 1e-10 * max(1.0, np.abs(G).max()):
        raise NotPositiveDefiniteError("gram matrix is not Hermitian")
    try:
        c = scipy.linalg.cholesky(herm, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(
            "gram matrix is not positive definite; wrong variety or delta?"
        ) from exc
    piv = np.abs(np.diag(c)) ** 2
    if piv.min() <= SPD_PIVOT_TOL * piv.max():
        raise NotPositiveDefiniteError(
            f"gram matrix is numerically singular (pivot ratio {piv.min() / piv.max():.2e}); "
            "wrong variety or delta?"
        )
    return scipy.linalg.cho_solve((c, True), b)


def _holdout_mask(basis: FiltrationBasis) -> np.ndarray:
    k = max(1, math.ceil(HOLDOUT_FRACTION * len(basis)))
    mask = np.zeros(len(basis), dtype=bool)
    # basis elements are graded, so the tail holds the highest degrees
    mask[-k:] = True
    return mask


def recover_density(
    table: MomentTable,
    support: Support,
    delta: int,
    ideal: IdealBasis,
    quadrature: QuadratureConfig | None = None,
) -> DensityRecovery:
    """Solve for ``g`` modulo the ideal, with ``mu_plus`` uniform on ``support``.

    ``support`` is a curve (parametrized uniform measure) or an ``(r, n)``
    array of points (counting measure).
    """
    if delta < 0:
        raise ValidationError("delta must be non-negative")
    small, gens, _ = _truncation(ideal, delta)
    reps = quotient_basis(ideal, delta)
    if not reps:
        raise ValidationError("quotient basis is empty; the ideal contains the constants")
    plus = _support_table(support, table, table.max_degree + delta, quadrature)
    gram = quotient_gram(plus, reps, gens)
    inv = involution_for(table)
    rhs = np.array([table.apply(involve(w, inv)) for w in reps])
    coords = _spd_solve(gram.values, rhs)
    g_bar = Poly(small, np.zeros(len(small), dtype=complex))
    for c, w in zip(coords, reps):
        g_bar = g_bar + c * w

    # reconstruction: sigma_{g mu_plus}(x^a) = sum_b g_b mu_plus(x^(a+b))
    exps = table.basis.exponents
    shifts = np.array([next(iter(w.terms())) for w in reps], dtype=np.int64)
    pred = plus.lookup(exps[:, None, :] + shifts[None, :, :]) @ coords
    err = np.abs(pred - table.values)
    scale = max(float(np.abs(table.values).max()), np.finfo(float).tiny)
    mask = _holdout_mask(table.basis)
    return DensityRecovery(
        ideal, tuple(reps), g_bar, gram,
        float(err.max() / scale), float(err[mask].max() / scale), delta,
    )


# -- parametrization hints -------------------------------------------------------------


def _binomial_hint(ideal: IdealBasis, tol: float) -> list:
    hints = []
    if ideal.basis.n != 2:
        return hints
    for g in ideal.generators:
        terms = g.terms(atol=tol)
        if len(terms) != 2:
            continue
        (a, ca), (b, cb) = terms.items()
        if abs(abs(ca) - abs(cb)) > tol or abs(ca + cb) > tol:
            continue
        u = np.subtract(a, b)
        gcd = math.gcd(int(u[0]), int(u[1]))
        v = (-int(u[1]) // gcd, int(u[0]) // gcd)
        if v[0] < 0 or (v[0] == 0 and v[1] < 0):
            v = (-v[0], -v[1])
        hints.append(("binomial", TrigCurve(v)))
    return hints


def _conic_hint(ideal: IdealBasis, tol: float) -> list:
    basis = ideal.basis
    if basis.n != 2 or basis.ring is RingKind.LAURENT:
        return []
    quadrics = [g for g in ideal.generators if g.degree(tol) == 2]
    if len(quadrics) != 1 or any(g.degree(tol) < 2 for g in ideal.generators):
        return []
    t = quadrics[0].terms(atol=tol)
    if any(abs(c.imag) > tol for c in t.values()):
        return []
    c = {k: v.real for k, v in t.items()}
    A = np.array([[c.get((2, 0), 0.0), c.get((1, 1), 0.0) / 2], [c.get((1, 1), 0.0) / 2, c.get((0, 2), 0.0)]])
    bvec = np.array([c.get((1, 0), 0.0), c.get((0, 1), 0.0)])
    evals = np.linalg.eigvalsh(A)
    if evals[0] * evals[1] <= tol:
        return []  # not an ellipse
    center = -0.5 * np.linalg.solve(A, bvec) + 0.0  # no negative zeros
    level = center @ A @ center - c.get((0, 0), 0.0)
    w, R = np.linalg.eigh(A / level)
    if np.any(w <= 0):
        return []
    axes = 1.0 / np.sqrt(w)
    # x(t) = center + R @ diag(axes) @ (cos, sin)
    coords = tuple(
        ParamTrig(center[i], cos=(R[i, 0] * axes[0],), sin=(R[i, 1] * axes[1],)) for i in range(2)
    )
    return [("ellipse", AffineCurve(coords))]


def parametrization_hints(ideal: IdealBasis, tol: float = 1e-8) -> list[tuple[str, Support]]:
    """Candidate parametrizations for recognizable curves (binomial torus curves, ellipses)."""
    out = {}
    for name, body in _binomial_hint(ideal, tol) + _conic_hint(ideal, tol):
        out.setdefault(body, name)
    return [(name, body) for body, name in out.items()]


def check_parametrization(ideal: IdealBasis, curve: TrigCurve | AffineCurve, samples: int = 64,
                          tol: float = PARAM_TOL, seed: int = 42) -> float:
    pts = sample_body(curve, samples, np.random.default_rng(seed))
    res = float(ideal.residuals_at(pts).max()) if ideal.dim else 0.0
    if res > tol:
        raise ParametrizationMismatchError(res, tol)
    return res


@dataclass(frozen=True, eq=False)
class PipelineResult:
    ideal: IdealBasis
    hints: tuple
    density: DensityRecovery | None
    atoms: AtomicRecovery | None
    curve: Support | None


def full_pipeline(
    table: MomentTable,
    d: int,
    delta: int,
    curve: TrigCurve | AffineCurve | None = None,
    quadrature: QuadratureConfig | None = None,
    seed: int = 42,
    tol: float | str = "auto",
) -> PipelineResult:
    """Ideal via ``ker H_{d+delta,d}``, then the density on the supplied (or hinted) curve.

    Without a curve, a rank that has stopped growing in ``d`` is taken as a
    finite support: points come from the multiplication operators and the
    density is solved against the counting measure, which yields the weights.
    """
    col_ring = RingKind.LAURENT if table.space.is_torus else RingKind.POLYNOMIAL
    ideal = recover_truncated_ideal(table, d, DeltaBound(delta), tol=tol, col_ring=col_ring)
    hints = tuple(parametrization_hints(ideal))
    if curve is None:
        cert = rank_certificate(table, d, tol)
        if cert.stabilized:
            r = len(ideal.basis) - ideal.dim
            pts = snap_real(solve_points(ideal, r, seed=seed), table)
            lam, wres = solve_weights(pts, table)
            atoms = AtomicRecovery(pts, lam, float(ideal.residuals_at(pts).max()) if r else 0.0, wres)
            dens = recover_density(table, pts, min(delta, d), ideal)
            return PipelineResult(ideal, hints, dens, atoms, pts)
        if not hints:
            raise ValidationError("support is not finite and no parametrization was supplied or recognized")
        curve = hints[0][1]
        log.info("using %s parametrization hint %r", hints[0][0], curve)
    check_parametrization(ideal, curve, seed=seed)
    dens = recover_density(table, curve, delta, ideal, quadrature)
    return PipelineResult(ideal, hints, dens, None, curve)
