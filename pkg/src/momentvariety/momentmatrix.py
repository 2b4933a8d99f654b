"""Generalized Hankel / Toeplitz moment matrices.

``H[i, j] = sigma(involve(w_i) * v_j)`` for row monomials ``w_i`` and column
monomials ``v_j``.  With the trivial involution (affine space) this is the
Hankel pattern ``sigma(x**(alpha + beta))``; with Laurent conjugation (torus)
the Toeplitz pattern ``sigma(x**(beta - alpha))``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import QuotientDependencyError, ValidationError
from .measures import MomentTable
from .polyalgebra import (
    FiltrationBasis,
    FiltrationKind,
    Involution,
    Poly,
    RingKind,
    build_basis,
    coefficient_matrix,
    enclosing_basis,
    involve,
    monomial_powers,
    multiply,
)

Index = Union[FiltrationBasis, tuple]


@dataclass(frozen=True, eq=False)
class MomentMatrix:
    """Dense Gramian with its row and column index descriptors.

    ``rows``/``cols`` are :class:`FiltrationBasis` objects for assembled
    matrices, or tuples of :class:`Poly` representatives for Gramians on a
    quotient (see :func:`quotient_gram`).
    """

    values: np.ndarray
    rows: Index
    cols: Index
    involution: Involution

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim != 2 or v.shape != (len(self.rows), len(self.cols)):
            raise ValidationError("matrix shape does not match its index sets")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def norm(self) -> float:
        return float(np.linalg.norm(self.values, 2)) if self.values.size else 0.0

    def __matmul__(self, other):
        return self.values @ other

    def to_csv(self) -> str:
        buf = io.StringIO()
        for row in self.values:
            buf.write(",".join(_fmt_complex(z) for z in row))
            buf.write("\n")
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "involution": self.involution.value,
            "rows": _describe_index(self.rows),
            "cols": _describe_index(self.cols),
            "shape": list(self.shape),
            "values": [[[float(z.real), float(z.imag)] for z in row] for row in self.values],
        }


def _fmt_complex(z: complex) -> str:
    return f"{float(z.real)!r}{float(z.imag):+}j"


def _describe_index(idx: Index) -> dict:
    if isinstance(idx, FiltrationBasis):
        d = idx.describe()
        d["elements"] = [list(a) for a in idx.elements]
        return d
    return {"representatives": [p.to_json() for p in idx]}


def involution_for(table: MomentTable) -> Involution:
    return Involution.LAURENT if table.space.is_torus else Involution.TRIVIAL


def _index_exponents(rows: FiltrationBasis, cols: FiltrationBasis, inv: Involution) -> np.ndarray:
    sign = -1 if inv is Involution.LAURENT else 1
    return sign * rows.exponents[:, None, :] + cols.exponents[None, :, :]


def gram(table: MomentTable, rows: FiltrationBasis, cols: FiltrationBasis) -> np.ndarray:
    """Raw Gramian values of the moment form on two monomial bases."""
    inv = involution_for(table)
    if not (len(rows) and len(cols)):
        return np.zeros((len(rows), len(cols)), dtype=complex)
    return table.lookup(_index_exponents(rows, cols, inv))


def _validate(table, mat, rng, samples=10):
    m, k = mat.shape
    if m == 0 or k == 0:
        return
    inv = mat.involution
    for _ in range(samples):
        i, j = int(rng.integers(m)), int(rng.integers(k))
        w = Poly.monomial(mat.rows.elements[i], n=mat.rows.n, ring=mat.rows.ring, filtration=mat.rows.filtration)
        v = Poly.monomial(mat.cols.elements[j], n=mat.cols.n, ring=mat.cols.ring, filtration=mat.cols.filtration)
        expect = table.apply(multiply(involve(w, inv), v))
        if abs(expect - mat.values[i, j]) > 1e-12 * (1 + abs(expect)):
            raise AssertionError(f"moment matrix entry ({i}, {j}) breaks the Hankel/Toeplitz pattern")


def assemble(
    table: MomentTable,
    row_degree: int,
    col_degree: int,
    row_ring: RingKind | str | None = None,
    col_ring: RingKind | str = RingKind.POLYNOMIAL,
    validate: bool = __debug__,
) -> MomentMatrix:
    """Moment matrix ``H_{d', d}`` with rows of degree ``row_degree``.

    Parameters
    ----------
    table : MomentTable
        Must cover every index ``alpha + beta`` (affine) or ``beta - alpha``
        (torus) that occurs; otherwise :class:`MissingMomentsError` lists them.
    row_degree, col_degree : int
        Filtration degrees ``d'`` and ``d`` of the row and column bases.
    row_ring : {"R", "L"}, optional
        Ring indexing the rows.  Defaults to Laurent rows on the torus and
        polynomial rows in affine space (where ``"L"`` is rejected).
    col_ring : {"R", "L"}
        Column ring; ``"L"`` gives the symmetric trigonometric variant.
    validate : bool
        Re-derive ten random entries through polynomial multiplication.
    """
    space = table.space
    row_ring = RingKind(row_ring) if row_ring is not None else space.default_ring()
    col_ring = RingKind(col_ring)
    if not space.is_torus and RingKind.LAURENT in (row_ring, col_ring):
        raise ValidationError("Laurent-indexed rows or columns need a torus moment table")
    filtration = table.filtration
    if filtration is FiltrationKind.TOTAL and RingKind.LAURENT in (row_ring, col_ring):
        raise ValidationError("Laurent bases require the max-degree filtration")
    rows = build_basis(space.n, row_degree, row_ring, filtration)
    cols = build_basis(space.n, col_degree, col_ring, filtration)
    mat = MomentMatrix(gram(table, rows, cols), rows, cols, involution_for(table))
    if validate:
        _validate(table, mat, np.random.default_rng(row_degree * 7919 + col_degree))
    return mat


def vandermonde(
    points,
    weights,
    rows: FiltrationBasis | int,
    cols: FiltrationBasis | int,
    involution: Involution = Involution.TRIVIAL,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Factors ``(V_rows, Lambda, V_cols)`` with ``V_rows.T @ Lambda @ V_cols == H``.

    Integer ``rows``/``cols`` select total-degree polynomial bases.  Under
    Laurent conjugation the row factor evaluates ``x**-alpha``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    n = pts.shape[1]
    if isinstance(rows, (int, np.integer)):
        rows = build_basis(n, int(rows))
    if isinstance(cols, (int, np.integer)):
        cols = build_basis(n, int(cols))
    sign = -1 if Involution(involution) is Involution.LAURENT else 1
    v_rows = monomial_powers(pts, sign * rows.exponents)
    v_cols = monomial_powers(pts, cols.exponents)
    lam = np.diag(np.broadcast_to(np.asarray(weights, dtype=complex), (pts.shape[0],)))
    return v_rows, lam, v_cols


def _independence_check(reps, ideal_gens, tol):
    polys = list(ideal_gens) + list(reps)
    big = polys[0].basis
    for p in polys[1:]:
        big = enclosing_basis(big, p.basis)
    g = coefficient_matrix(ideal_gens, big)
    a = coefficient_matrix(reps, big)
    full = np.hstack([g, a]) if g.size else a
    if full.shape[1] == 0:
        return
    _, s, vh = np.linalg.svd(full)
    scale = s[0] if s.size else 0.0
    rank = int((s > tol * scale).sum()) if scale > 0 else 0
    if rank < full.shape[1]:
        null = vh[-1].conj()
        dep = null[g.shape[1]:]
        raise QuotientDependencyError(
            "representatives are linearly dependent modulo the ideal truncation; "
            f"combination coefficients {np.round(dep, 10).tolist()}",
            dependency=dep,
        )


def quotient_gram(
    table: MomentTable,
    reps: Sequence[Poly],
    ideal_gens: Sequence[Poly] = (),
    tol: float = 1e-10,
) -> MomentMatrix:
    """Gramian of the moment form on representatives of a quotient ``W / (a ∩ W)``.

    On the torus ``<q, p> = sigma(involve(q) p)`` conjugates coefficients of
    ``q``; in affine space the involution is trivial and nothing is conjugated.
    """
    reps = tuple(reps)
    if not reps:
        raise ValidationError("need at least one representative")
    _independence_check(reps, tuple(ideal_gens), tol)
    inv = involution_for(table)
    big = reps[0].basis
    for p in reps[1:]:
        big = enclosing_basis(big, p.basis)
    if inv is Involution.LAURENT and big.ring is RingKind.POLYNOMIAL:
        big = build_basis(big.n, big.degree, RingKind.LAURENT, FiltrationKind.MAX)
    a = coefficient_matrix(reps, big)
    m = gram(table, big, big)
    left = a.conj() if inv is Involution.LAURENT else a
    return MomentMatrix(left.T @ m @ a, reps, reps, inv)
