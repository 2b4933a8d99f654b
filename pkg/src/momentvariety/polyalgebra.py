"""Multi-indices, filtered monomial bases and (Laurent) polynomials.

Monomials ``x**alpha`` are exponent tuples.  A :class:`FiltrationBasis` is the
ordered monomial basis of one filtered component: total degree ``<= d`` in the
polynomial ring, or max-degree ``<= d`` in the polynomial or Laurent ring.

Ordering is graded: degree shells in increasing order, and inside a shell the
exponent tuples in decreasing lexicographic order, e.g. ``1, x1, x2, x1**2,
x1*x2, x2**2``.  The basis of degree ``d`` is therefore a prefix of the basis
of degree ``d + 1``.  Read backwards, the order is a graded monomial order,
which is what the echelon routines downstream rely on: the *leading* monomial
of a polynomial is the one that appears last in the basis.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from math import comb
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError, ValidationError

MultiIndex = tuple[int, ...]


class RingKind(enum.Enum):
    POLYNOMIAL = "R"
    LAURENT = "L"


class FiltrationKind(enum.Enum):
    TOTAL = "total"
    MAX = "max"


class Involution(enum.Enum):
    """Trivial involution (affine space) or Laurent conjugation (torus)."""

    TRIVIAL = "trivial"
    LAURENT = "laurent"


def total_degree(alpha: Sequence[int]) -> int:
    if any(a < 0 for a in alpha):
        raise ValidationError(f"total degree undefined for {tuple(alpha)}")
    return int(sum(alpha))


def max_degree(alpha: Sequence[int]) -> int:
    return int(max(abs(a) for a in alpha)) if len(alpha) else 0


def _shell(n: int, k: int, ring: RingKind, filtration: FiltrationKind) -> list[MultiIndex]:
    if filtration is FiltrationKind.TOTAL:
        # compositions of k into n non-negative parts
        out = []
        for bars in itertools.combinations(range(k + n - 1), n - 1):
            parts, prev = [], -1
            for b in bars:
                parts.append(b - prev - 1)
                prev = b
            parts.append(k + n - 1 - prev - 1)
            out.append(tuple(parts))
    else:
        lo = -k if ring is RingKind.LAURENT else 0
        out = [
            a for a in itertools.product(range(lo, k + 1), repeat=n)
            if max(abs(x) for x in a) == k
        ]
    out.sort(reverse=True)
    return out


@dataclass(frozen=True)
class FiltrationBasis:
    """Ordered monomial basis of a filtered component ``F_d``.

    Use :func:`build_basis` rather than the constructor; it validates the
    combination and caches the result.
    """

    n: int
    degree: int
    ring: RingKind
    filtration: FiltrationKind
    elements: tuple[MultiIndex, ...] = field(compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, alpha) -> bool:
        return tuple(alpha) in self.index

    @cached_property
    def index(self) -> dict[MultiIndex, int]:
        return {a: i for i, a in enumerate(self.elements)}

    @cached_property
    def exponents(self) -> np.ndarray:
        arr = np.array(self.elements, dtype=np.int64).reshape(len(self.elements), self.n)
        arr.setflags(write=False)
        return arr

    @cached_property
    def shell_degrees(self) -> np.ndarray:
        """Filtration degree of every element, aligned with ``elements``."""
        exps = self.exponents
        if self.filtration is FiltrationKind.TOTAL:
            return exps.sum(axis=1)
        return np.abs(exps).max(axis=1) if self.n else np.zeros(0, dtype=np.int64)

    def degree_of(self, alpha: Sequence[int]) -> int:
        if self.filtration is FiltrationKind.TOTAL:
            return total_degree(alpha)
        return max_degree(alpha)

    def truncate(self, degree: int) -> "FiltrationBasis":
        return build_basis(self.n, degree, self.ring, self.filtration)

    def describe(self) -> dict:
        return {
            "ring": self.ring.value,
            "filtration": self.filtration.value,
            "n": self.n,
            "degree": self.degree,
            "size": len(self),
        }


def expected_size(n: int, d: int, ring: RingKind, filtration: FiltrationKind) -> int:
    if filtration is FiltrationKind.TOTAL:
        return comb(n + d, n)
    if ring is RingKind.POLYNOMIAL:
        return (d + 1) ** n
    return (2 * d + 1) ** n


@lru_cache(maxsize=256)
def _build_basis(n: int, d: int, ring: RingKind, filtration: FiltrationKind) -> FiltrationBasis:
    elements = tuple(a for k in range(d + 1) for a in _shell(n, k, ring, filtration))
    return FiltrationBasis(n, d, ring, filtration, elements)


def build_basis(
    n: int,
    d: int,
    ring: RingKind = RingKind.POLYNOMIAL,
    filtration: FiltrationKind = FiltrationKind.TOTAL,
) -> FiltrationBasis:
    """Monomial basis of the degree-``d`` filtered component in ``n`` variables.

    >>> [a for a in build_basis(2, 1)]
    [(0, 0), (1, 0), (0, 1)]
    """
    ring, filtration = RingKind(ring), FiltrationKind(filtration)
    if n < 1:
        raise ValidationError("dimension n must be >= 1")
    if d < 0:
        raise ValidationError("degree must be >= 0")
    if ring is RingKind.LAURENT and filtration is FiltrationKind.TOTAL:
        raise ValidationError("total degree is undefined for Laurent monomials; use max degree")
    return _build_basis(int(n), int(d), ring, filtration)


def monomial_powers(points: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """Matrix ``(xi_j ** alpha_i)`` of shape ``(len(points), len(exponents))``.

    Raises :class:`DomainError` if a negative exponent meets a zero coordinate.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    exps = np.asarray(exponents, dtype=np.int64)
    if exps.size and (exps < 0).any():
        neg_vars = (exps < 0).any(axis=0)
        if (pts[:, neg_vars] == 0).any():
            raise DomainError("Laurent monomial evaluated at a point with zero coordinate")
    out = np.ones((pts.shape[0], exps.shape[0]), dtype=complex)
    for k in range(exps.shape[1] if exps.ndim == 2 else 0):
        col = exps[:, k]
        if not col.any():
            continue
        out *= pts[:, k : k + 1] ** col[None, :]
    return out


@dataclass(frozen=True, eq=False)
class Poly:
    """Polynomial with complex coefficients aligned to ``basis.elements``."""

    basis: FiltrationBasis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.shape[0] != len(self.basis):
            raise ValidationError(
                f"coefficient vector has length {c.shape[0]}, basis has {len(self.basis)} elements"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_terms(
        cls,
        terms: Mapping[Sequence[int], complex],
        n: int | None = None,
        ring: RingKind | None = None,
        filtration: FiltrationKind = FiltrationKind.TOTAL,
        degree: int | None = None,
    ) -> "Poly":
        """Embed a sparse ``{alpha: coeff}`` map into the smallest enclosing basis."""
        terms = {tuple(int(a) for a in k): complex(v) for k, v in terms.items()}
        if n is None:
            if not terms:
                raise ValidationError("cannot infer dimension of an empty polynomial")
            n = len(next(iter(terms)))
        if any(len(a) != n for a in terms):
            raise ValidationError("exponent vectors of inconsistent length")
        filtration = FiltrationKind(filtration)
        if ring is None:
            ring = RingKind.LAURENT if any(x < 0 for a in terms for x in a) else RingKind.POLYNOMIAL
        ring = RingKind(ring)
        if ring is RingKind.LAURENT:
            filtration = FiltrationKind.MAX
        degfn = total_degree if filtration is FiltrationKind.TOTAL else max_degree
        need = max((degfn(a) for a in terms), default=0)
        if ring is RingKind.POLYNOMIAL and any(x < 0 for a in terms for x in a):
            raise ValidationError("negative exponent in a polynomial-ring element")
        if degree is None:
            degree = need
        elif degree < need:
            raise ValidationError(f"terms need degree {need} > requested {degree}")
        basis = build_basis(n, degree, ring, filtration)
        coeffs = np.zeros(len(basis), dtype=complex)
        for a, v in terms.items():
            coeffs[basis.index[a]] += v
        return cls(basis, coeffs)

    @classmethod
    def monomial(cls, alpha: Sequence[int], coeff: complex = 1.0, **kw) -> "Poly":
        return cls.from_terms({tuple(alpha): coeff}, **kw)

    @property
    def n(self) -> int:
        return self.basis.n

    def terms(self, atol: float = 0.0) -> dict[MultiIndex, complex]:
        return {
            a: complex(c) for a, c in zip(self.basis.elements, self.coeffs) if abs(c) > atol
        }

    def degree(self, atol: float = 0.0) -> int:
        nz = np.flatnonzero(np.abs(self.coeffs) > atol)
        if nz.size == 0:
            return 0
        return int(self.basis.shell_degrees[nz].max())

    def embed(self, basis: FiltrationBasis) -> "Poly":
        """Re-express in a larger (or equal) basis containing all terms."""
        if basis.n != self.n:
            raise ValidationError("dimension mismatch")
        coeffs = np.zeros(len(basis), dtype=complex)
        for a, c in zip(self.basis.elements, self.coeffs):
            if c == 0:
                continue
            i = basis.index.get(a)
            if i is None:
                raise ValidationError(f"term x^{a} does not fit into {basis}")
            coeffs[i] += c
        return Poly(basis, coeffs)

    def __add__(self, other: "Poly") -> "Poly":
        big = enclosing_basis(self.basis, other.basis)
        return Poly(big, self.embed(big).coeffs + other.embed(big).coeffs)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + other * -1.0

    def __neg__(self) -> "Poly":
        return self * -1.0

    def __mul__(self, other) -> "Poly":
        if isinstance(other, Poly):
            return multiply(self, other)
        return Poly(self.basis, self.coeffs * complex(other))

    __rmul__ = __mul__

    def __call__(self, point) -> complex:
        return evaluate(self, point)

    def allclose(self, other: "Poly", atol: float = 1e-12) -> bool:
        big = enclosing_basis(self.basis, other.basis)
        return bool(np.allclose(self.embed(big).coeffs, other.embed(big).coeffs, rtol=0, atol=atol))

    def to_json(self) -> dict:
        return {
            "ring": self.basis.ring.value,
            "filtration": self.basis.filtration.value,
            "n": self.n,
            "degree": self.basis.degree,
            "terms": [
                {"alpha": list(a), "coeff": [float(c.real), float(c.imag)]}
                for a, c in zip(self.basis.elements, self.coeffs)
                if c != 0
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "Poly":
        try:
            ring = RingKind(obj.get("ring", "R"))
            filtration = FiltrationKind(obj.get("filtration", "total"))
            n = int(obj["n"])
            terms = {}
            for t in obj["terms"]:
                re, im = t["coeff"] if isinstance(t["coeff"], (list, tuple)) else (t["coeff"], 0.0)
                alpha = tuple(int(a) for a in t["alpha"])
                terms[alpha] = terms.get(alpha, 0) + complex(re, im)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed Poly JSON: {exc}") from exc
        return cls.from_terms(terms, n=n, ring=ring, filtration=filtration, degree=obj.get("degree"))

    def __repr__(self) -> str:
        parts = []
        for a, c in self.terms(atol=1e-14).items():
            mono = "*".join(f"x{i + 1}^{e}" if e != 1 else f"x{i + 1}" for i, e in enumerate(a) if e)
            cs = f"{c.real:.6g}" if abs(c.imag) < 1e-15 else f"({c:.6g})"
            parts.append(f"{cs}*{mono}" if mono else cs)
        return f"Poly({' + '.join(parts) or '0'})"


def enclosing_basis(a: FiltrationBasis, b: FiltrationBasis) -> FiltrationBasis:
    if a.n != b.n:
        raise ValidationError("dimension mismatch")
    ring = RingKind.LAURENT if RingKind.LAURENT in (a.ring, b.ring) else RingKind.POLYNOMIAL
    if a.filtration is b.filtration:
        filtration = a.filtration
    elif ring is RingKind.LAURENT:
        filtration = FiltrationKind.MAX
    else:
        raise ValidationError("cannot combine total- and max-degree bases")
    # total degree <= d implies max degree <= d, so max() of degrees suffices
    return build_basis(a.n, max(a.degree, b.degree), ring, filtration)


def multiply(p: Poly, q: Poly) -> Poly:
    """Product by exponent addition, re-embedded into the smallest enclosing basis."""
    if p.n != q.n:
        raise ValidationError("dimension mismatch")
    big = enclosing_basis(p.basis, q.basis)
    terms: dict[MultiIndex, complex] = {}
    pt, qt = p.terms(), q.terms()
    for a, ca in pt.items():
        for b, cb in qt.items():
            s = tuple(x + y for x, y in zip(a, b))
            terms[s] = terms.get(s, 0) + ca * cb
    return Poly.from_terms(terms, n=p.n, ring=big.ring, filtration=big.filtration,
                           degree=None if terms else 0)


def involve(p: Poly, kind: Involution | RingKind = Involution.LAURENT) -> Poly:
    """Apply the ring involution.

    The trivial involution is the identity.  Laurent conjugation maps
    ``sum c_a x^a`` to ``sum conj(c_a) x^(-a)``; a polynomial-ring input in
    the max-degree filtration is promoted to the Laurent basis of the same
    degree, which is closed under negation.
    """
    if isinstance(kind, RingKind):
        kind = Involution.LAURENT if kind is RingKind.LAURENT else Involution.TRIVIAL
    kind = Involution(kind)
    if kind is Involution.TRIVIAL:
        return p
    basis = p.basis
    if basis.filtration is not FiltrationKind.MAX:
        raise ValidationError("Laurent involution needs a max-degree basis")
    lbasis = build_basis(basis.n, basis.degree, RingKind.LAURENT, FiltrationKind.MAX)
    coeffs = np.zeros(len(lbasis), dtype=complex)
    for a, c in zip(basis.elements, p.coeffs):
        if c != 0:
            coeffs[lbasis.index[tuple(-x for x in a)]] += np.conj(c)
    return Poly(lbasis, coeffs)


def evaluate(p: Poly, point) -> complex | np.ndarray:
    """Evaluate at one point (length-``n`` vector) or at a stack of points."""
    pts = np.asarray(point, dtype=complex)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != p.n:
        raise ValidationError(f"point has {pts.shape[1]} coordinates, polynomial has {p.n} variables")
    nz = np.flatnonzero(p.coeffs)
    vals = monomial_powers(pts, p.basis.exponents[nz]) @ p.coeffs[nz]
    return complex(vals[0]) if single else vals


def coefficient_matrix(polys: Iterable[Poly], basis: FiltrationBasis) -> np.ndarray:
    """Stack coefficient vectors (as columns) after embedding into ``basis``."""
    cols = [p.embed(basis).coeffs for p in polys]
    if not cols:
        return np.zeros((len(basis), 0), dtype=complex)
    return np.column_stack(cols)
