"""Zero-dimensional recovery: atoms and weights of a finitely supported measure.

Points come from the eigenstructure of multiplication operators on the
quotient ``R_{<=d} / ker H``; weights from a least-squares Vandermonde solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegreeTooSmallError, RankDeficientError, ValidationError
from .idealrecovery import IdealBasis, decide_rank, numerical_kernel
from .measures import MomentTable
from .momentmatrix import assemble, involution_for
from .polyalgebra import Involution, monomial_powers

log = logging.getLogger(__name__)

CLUSTER_TOL = 1e-7
MAX_REDRAWS = 5
REAL_SNAP = 1e-9


@dataclass(frozen=True, eq=False)
class AtomicRecovery:
    points: np.ndarray  # (r, n)
    weights: np.ndarray  # (r,)
    point_residual: float  # max |g(xi)| over normalized kernel elements
    weight_residual: float  # relative least-squares residual

    @property
    def rank(self) -> int:
        return self.points.shape[0]

    def to_json(self) -> dict:
        return {
            "points": [[[float(z.real), float(z.imag)] for z in p] for p in self.points],
            "weights": [[float(w.real), float(w.imag)] for w in self.weights],
            "residuals": {"points": self.point_residual, "weights": self.weight_residual},
        }


def _sort_points(pts: np.ndarray) -> np.ndarray:
    if pts.shape[0] == 0:
        return pts
    keys = np.round(pts, 8)
    order = np.lexsort([k for col in keys.T[::-1] for k in (col.imag, col.real)])
    return pts[order]


def multiplication_matrices(ideal: IdealBasis, r: int) -> tuple[list[np.ndarray], list[tuple[int, ...]]]:
    """Multiplication operators ``M_k : f -> x_k f`` on the quotient, in the normal set.

    The normal set holds the column monomials that are not echelon pivots.
    Column ``j`` of ``M_k`` holds the normal-set coordinates of ``x_k b_j``.
    """
    basis = ideal.basis
    pivots = set(ideal.pivots)
    normal = [i for i in range(len(basis)) if i not in pivots]
    if len(normal) != r:
        raise DegreeTooSmallError(
            f"quotient has dimension {len(normal)} but rank {r} was requested; "
            "kernel and rank disagree, try a larger degree"
        )
    where = {i: j for j, i in enumerate(normal)}
    reducer = {p: g for p, g in zip(ideal.pivots, ideal.generators)}
    mats = []
    for k in range(basis.n):
        m = np.zeros((r, r), dtype=complex)
        for j, i in enumerate(normal):
            alpha = list(basis.elements[i])
            alpha[k] += 1
            target = basis.index.get(tuple(alpha))
            if target is None:
                raise DegreeTooSmallError(
                    f"normal monomial {basis.elements[i]} times x{k + 1} leaves the column basis; "
                    "increase the degree d"
                )
            if target in where:
                m[where[target], j] = 1.0
            else:
                # x^alpha = pivot of g  ==  -(g - x^alpha), supported on the normal set
                g = reducer[target].coeffs
                m[:, j] = -g[normal]
        mats.append(m)
    return mats, [basis.elements[i] for i in normal]


def _separated(vals: np.ndarray) -> tuple[bool, float]:
    if vals.size < 2:
        return True, np.inf
    scale = max(1.0, float(np.abs(vals).max()))
    diff = np.abs(vals[:, None] - vals[None, :])
    np.fill_diagonal(diff, np.inf)
    gap = float(diff.min()) / scale
    return gap > CLUSTER_TOL, gap


def solve_points(ideal: IdealBasis, r: int, seed: int = 42) -> np.ndarray:
    """``r`` common zeros of the kernel, rows sorted lexicographically."""
    if r < 0:
        raise ValidationError("rank must be non-negative")
    n = ideal.basis.n
    if r == 0:
        return np.zeros((0, n), dtype=complex)
    mats, _ = multiplication_matrices(ideal, r)
    rng = np.random.default_rng(seed)
    for attempt in range(MAX_REDRAWS + 1):
        c = rng.uniform(-1.0, 1.0, size=n)
        mc = sum(ck * mk for ck, mk in zip(c, mats))
        vals, vecs = scipy.linalg.eig(mc)
        ok, gap = _separated(vals)
        if ok:
            break
        log.warning("eigenvalues of the random combination cluster (relative gap %.2e), redrawing", gap)
    else:
        log.warning("eigenvalues still clustered after %d redraws; condition estimate %.2e",
                    MAX_REDRAWS, 1.0 / max(gap, np.finfo(float).tiny))
    pts = np.empty((r, n), dtype=complex)
    norms = np.einsum("ij,ij->j", vecs.conj(), vecs)
    for k, mk in enumerate(mats):
        pts[:, k] = np.einsum("ij,ij->j", vecs.conj(), mk @ vecs) / norms
    return _sort_points(pts)


def snap_real(points: np.ndarray, table: MomentTable) -> np.ndarray:
    """Drop imaginary parts below ``REAL_SNAP`` for affine supports."""
    if involution_for(table) is not Involution.TRIVIAL:
        return points
    return np.where(np.abs(points.imag) < REAL_SNAP, points.real, points)


def solve_weights(points, table: MomentTable) -> tuple[np.ndarray, float]:
    """Least-squares weights from every moment in the table, with relative residual."""
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    if pts.shape[0] == 0:
        return np.zeros(0, dtype=complex), float(np.linalg.norm(table.values))
    v = monomial_powers(pts, table.basis.exponents)  # (r, |basis|)
    a = v.T
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] <= max(a.shape) * np.finfo(float).eps * s[0] * 1e2:
        raise RankDeficientError(
            f"Vandermonde matrix of the recovered points is rank deficient (cond {s[0] / max(s[-1], 1e-300):.2e}); "
            "points coincide"
        )
    lam, *_ = np.linalg.lstsq(a, table.values, rcond=None)
    nb = np.linalg.norm(table.values)
    res = float(np.linalg.norm(a @ lam - table.values) / nb) if nb else 0.0
    return lam, res


@dataclass(frozen=True)
class RankCertificate:
    rank: int
    previous_rank: int | None
    stabilized: bool
    singular_values: tuple[float, ...]


def rank_certificate(table: MomentTable, d: int, tol: float | str = "auto") -> RankCertificate:
    """Numerical rank of ``H_{d-1,d}``, compared against ``H_{d-2,d-1}``."""
    if d < 1:
        raise ValidationError("rank certificate needs d >= 1")

    def rank_of(rows, cols):
        H = assemble(table, rows, cols)
        if not H.values.size:
            return 0, ()
        s = np.linalg.svd(H.values, compute_uv=False)
        return decide_rank(s, H.shape[1], H.shape[0], tol)[0], tuple(float(x) for x in s)

    r, s = rank_of(d - 1, d)
    prev = rank_of(d - 2, d - 1)[0] if d >= 2 else None
    return RankCertificate(r, prev, prev == r, s)


def prony(table: MomentTable, d: int, rank: int | str = "auto", seed: int = 42,
          tol: float | str = "auto") -> tuple[AtomicRecovery, IdealBasis]:
    """Points and weights from the kernel of the square matrix ``H_{d,d}``."""
    H = assemble(table, d, d, row_ring=None if table.space.is_torus else "R")
    ideal, report = numerical_kernel(H, tol)
    r = report.rank
    if rank != "auto":
        if int(rank) != r:
            raise DegreeTooSmallError(f"numerical rank {r} of H_{{{d},{d}}} differs from requested rank {rank}")
    pts = snap_real(solve_points(ideal, r, seed=seed), table)
    lam, wres = solve_weights(pts, table)
    pres = float(ideal.residuals_at(pts).max()) if r else 0.0
    return AtomicRecovery(pts, lam, pres, wres), ideal
