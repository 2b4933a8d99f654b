"""Declarative signed measures and their moment tables.

A :class:`MeasureSpec` is a finite linear combination of components living
either in real affine space or on the complex torus.  Each component is an
atom, a one-dimensional subtorus (:class:`TrigCurve`), or a parametrized
affine curve (:class:`AffineCurve`), optionally multiplied by a polynomial
density.  :func:`moments` turns a spec into a :class:`MomentTable` holding
``sigma(x**alpha)`` for every monomial of a filtration basis.

Atoms and subtorus characters are integrated exactly; affine curves use
Gauss-Legendre quadrature, or the periodic trapezoid rule when every
coordinate is a trigonometric polynomial of the period-one parameter.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import MissingMomentsError, QuadratureError, ValidationError
from .polyalgebra import (
    FiltrationBasis,
    FiltrationKind,
    Poly,
    RingKind,
    build_basis,
    evaluate,
    involve,
    monomial_powers,
)


class SpaceKind(enum.Enum):
    AFFINE = "affine"
    TORUS = "torus"


@dataclass(frozen=True)
class Space:
    kind: SpaceKind
    n: int

    def __post_init__(self):
        object.__setattr__(self, "kind", SpaceKind(self.kind))
        if self.n < 1:
            raise ValidationError("space dimension must be >= 1")

    @property
    def is_torus(self) -> bool:
        return self.kind is SpaceKind.TORUS

    def default_ring(self) -> RingKind:
        return RingKind.LAURENT if self.is_torus else RingKind.POLYNOMIAL

    def default_filtration(self) -> FiltrationKind:
        return FiltrationKind.MAX if self.is_torus else FiltrationKind.TOTAL

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "n": self.n}

    @classmethod
    def affine(cls, n: int) -> "Space":
        return cls(SpaceKind.AFFINE, n)

    @classmethod
    def torus(cls, n: int) -> "Space":
        return cls(SpaceKind.TORUS, n)


# -- bodies -----------------------------------------------------------------


@dataclass(frozen=True)
class Atomic:
    """Dirac mass.  On the torus ``point`` holds phases ``t`` with ``xi = exp(2 pi i t)``."""

    point: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(float(x) for x in self.point))

    def location(self, space: Space) -> np.ndarray:
        p = np.asarray(self.point, dtype=float)
        if space.is_torus:
            return np.exp(2j * np.pi * p)
        return p.astype(complex)


@dataclass(frozen=True)
class TrigCurve:
    """One-dimensional subtorus ``t -> exp(2 pi i v t)``, ``t in [0, 1)``.

    Its uniform measure has moments ``1`` if ``<alpha, v> == 0`` else ``0``.
    For ``v = (2, 1)`` the curve is the zero set of ``x1 - x2**2``.
    """

    v: tuple[int, ...]

    def __post_init__(self):
        v = tuple(int(x) for x in self.v)
        if not any(v):
            raise ValidationError("trig curve direction must be non-zero")
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return len(self.v)

    def frequency_bound(self) -> int:
        return int(sum(abs(x) for x in self.v))

    def at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float).reshape(-1, 1)
        return np.exp(2j * np.pi * t * np.asarray(self.v)[None, :])


@dataclass(frozen=True)
class ParamPoly:
    """Coordinate ``x(t) = sum_k c_k t**k``."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs) or (0.0,))

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), self.coeffs)

    def degree(self) -> int:
        return max(len(self.coeffs) - 1, 0)


@dataclass(frozen=True)
class ParamTrig:
    """Coordinate ``x(t) = c0 + sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t)``."""

    const: float = 0.0
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "const", float(self.const))
        object.__setattr__(self, "cos", tuple(float(c) for c in self.cos))
        object.__setattr__(self, "sin", tuple(float(c) for c in self.sin))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.const)
        for k, a in enumerate(self.cos, start=1):
            out = out + a * np.cos(2 * np.pi * k * t)
        for k, b in enumerate(self.sin, start=1):
            out = out + b * np.sin(2 * np.pi * k * t)
        return out

    def degree(self) -> int:
        return max(len(self.cos), len(self.sin))


Coordinate = Union[ParamPoly, ParamTrig]


@dataclass(frozen=True)
class AffineCurve:
    """Curve ``t -> (x_1(t), ..., x_n(t))`` over the compact interval ``domain``.

    The attached measure is ``dt`` pushed forward (not normalized): a curve on
    ``[0, 1]`` has total mass one, the interval ``[-1, 1]`` has mass two.
    """

    coords: tuple[Coordinate, ...]
    domain: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        a, b = (float(x) for x in self.domain)
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise ValidationError(f"curve domain must be a compact interval, got {self.domain}")
        if not self.coords:
            raise ValidationError("curve needs at least one coordinate")
        object.__setattr__(self, "domain", (a, b))

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def periodic(self) -> bool:
        return all(isinstance(c, ParamTrig) for c in self.coords) and self.domain == (0.0, 1.0)

    def frequency_bound(self) -> int:
        return max(1, max(c.degree() for c in self.coords))

    def at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float).reshape(-1)
        return np.column_stack([c(t) for c in self.coords]).astype(complex)

    @classmethod
    def circle(cls, radius: float = 1.0, center=(0.0, 0.0)) -> "AffineCurve":
        return cls(
            (ParamTrig(center[0], cos=(radius,)), ParamTrig(center[1], sin=(radius,))),
            (0.0, 1.0),
        )

    @classmethod
    def interval(cls, a: float, b: float) -> "AffineCurve":
        return cls((ParamPoly((0.0, 1.0)),), (a, b))


Body = Union[Atomic, TrigCurve, AffineCurve]


@dataclass(frozen=True)
class WeightedComponent:
    weight: complex
    body: Body
    density: Poly | None = None

    def __post_init__(self):
        object.__setattr__(self, "weight", complex(self.weight))


@dataclass(frozen=True)
class MeasureSpec:
    space: Space
    terms: tuple[WeightedComponent, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValidationError("measure needs at least one component")
        for comp in self.terms:
            _check_component(self.space, comp)

    def is_real_signed(self) -> bool:
        """All weights real and all densities real-valued on the support."""
        for c in self.terms:
            if abs(c.weight.imag) > 0:
                return False
            if c.density is not None:
                if self.space.is_torus:
                    if not involve(c.density).allclose(c.density, atol=0):
                        return False
                elif np.any(c.density.coeffs.imag != 0):
                    return False
        return True

    def sample_support(self, m: int, rng: np.random.Generator | None = None) -> np.ndarray:
        """Up to ``m`` points drawn from the union of component supports."""
        rng = np.random.default_rng(0) if rng is None else rng
        pieces = []
        curves = [c.body for c in self.terms if not isinstance(c.body, Atomic)]
        for c in self.terms:
            if isinstance(c.body, Atomic):
                pieces.append(c.body.location(self.space)[None, :])
        per = max(1, m // max(1, len(curves))) if curves else 0
        for body in curves:
            pieces.append(sample_body(body, per, rng))
        return np.vstack(pieces)


def _check_component(space: Space, comp: WeightedComponent):
    body = comp.body
    if isinstance(body, Atomic):
        if len(body.point) != space.n:
            raise ValidationError("atom dimension does not match space")
    elif isinstance(body, TrigCurve):
        if not space.is_torus:
            raise ValidationError("trig curves live on the torus")
        if body.n != space.n:
            raise ValidationError("trig curve dimension does not match space")
    elif isinstance(body, AffineCurve):
        if space.is_torus:
            raise ValidationError("affine curves live in affine space")
        if body.n != space.n:
            raise ValidationError("curve dimension does not match space")
    else:
        raise ValidationError(f"unknown body {body!r}")
    if comp.density is not None:
        if comp.density.n != space.n:
            raise ValidationError("density dimension does not match space")
        if not space.is_torus and comp.density.basis.ring is RingKind.LAURENT:
            raise ValidationError("Laurent density outside the torus")


def sample_body(body: Body, m: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(body, TrigCurve):
        return body.at(rng.random(m))
    if isinstance(body, AffineCurve):
        a, b = body.domain
        return body.at(a + (b - a) * rng.random(m))
    raise ValidationError("atoms are sampled through their spec")


# -- quadrature ---------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureConfig:
    """Quadrature settings.

    ``nodes=None`` picks ``4 * (table degree + density degree) * p + 1`` nodes,
    ``p`` the parametrization degree (harmonic count for trigonometric
    coordinates, ``sum |v_i|`` for subtori).  With ``check`` the result is
    compared against a refined rule and :class:`QuadratureError` is raised if
    they disagree by more than ``tol``.
    """

    nodes: int | None = None
    tol: float = 1e-12
    check: bool = True
    exact_characters: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.nodes is not None and self.nodes < 1:
            raise ValidationError("node count must be positive")


def gauss_legendre(n_nodes: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def periodic_trapezoid(n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    return np.arange(n_nodes) / n_nodes, np.full(n_nodes, 1.0 / n_nodes)


def _integrand_degree(basis: FiltrationBasis, density: Poly | None) -> int:
    deg = basis.degree
    if basis.filtration is FiltrationKind.MAX and basis.ring is RingKind.POLYNOMIAL:
        deg *= basis.n
    if density is not None:
        deg += density.degree() * (density.n if density.basis.filtration is FiltrationKind.MAX else 1)
    return deg


def default_node_count(body: TrigCurve | AffineCurve, basis: FiltrationBasis, density=None) -> int:
    return 4 * _integrand_degree(basis, density) * body.frequency_bound() + 1


def _curve_rule(body, n_nodes):
    if isinstance(body, TrigCurve):
        t, w = periodic_trapezoid(n_nodes)
        return body.at(t), w
    if body.periodic:
        t, w = periodic_trapezoid(n_nodes)
    else:
        t, w = gauss_legendre(n_nodes, *body.domain)
    return body.at(t), w


def _quadrature_moments(body, exps, density, n_nodes):
    pts, w = _curve_rule(body, n_nodes)
    if density is not None:
        w = w * evaluate(density, pts)
    return w @ monomial_powers(pts, exps)


def _character_moments(body: TrigCurve, exps: np.ndarray, density: Poly | None) -> np.ndarray:
    v = np.asarray(body.v, dtype=np.int64)
    if density is None:
        return (exps @ v == 0).astype(complex)
    out = np.zeros(exps.shape[0], dtype=complex)
    for beta, c in density.terms().items():
        out += c * ((exps + np.asarray(beta)) @ v == 0)
    return out


def _component_moments(space, comp, basis, quad):
    """Returns (values, provenance, nodes) for a single unweighted component."""
    exps = basis.exponents
    body = comp.body
    if isinstance(body, Atomic):
        xi = body.location(space)
        vals = monomial_powers(xi[None, :], exps)[0]
        if comp.density is not None:
            vals = vals * evaluate(comp.density, xi)
        return vals, "exact", None
    if isinstance(body, TrigCurve) and quad.exact_characters:
        return _character_moments(body, exps, comp.density), "exact", None
    n_nodes = quad.nodes or default_node_count(body, basis, comp.density)
    vals = _quadrature_moments(body, exps, comp.density, n_nodes)
    if quad.check:
        ref = _quadrature_moments(body, exps, comp.density, 2 * n_nodes + 1)
        err = np.abs(vals - ref) / np.maximum(1.0, np.abs(ref))
        worst = int(np.argmax(err)) if err.size else 0
        if err.size and err[worst] > quad.tol:
            raise QuadratureError(basis.elements[worst], err[worst], quad.tol)
    return vals, "quadrature", n_nodes


# -- tables -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MomentTable:
    """Moments ``sigma(x**alpha)`` for every ``alpha`` in ``basis``."""

    space: Space
    basis: FiltrationBasis
    values: np.ndarray
    provenance: str = "exact"
    nodes: int | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex).reshape(-1)
        if vals.shape[0] != len(self.basis):
            raise ValidationError("moment table does not cover its basis")
        if self.basis.n != self.space.n:
            raise ValidationError("basis dimension does not match space")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def max_degree(self) -> int:
        return self.basis.degree

    @property
    def ring(self) -> RingKind:
        return self.basis.ring

    @property
    def filtration(self) -> FiltrationKind:
        return self.basis.filtration

    def __getitem__(self, alpha) -> complex:
        i = self.basis.index.get(tuple(int(a) for a in alpha))
        if i is None:
            raise MissingMomentsError([alpha])
        return complex(self.values[i])

    def lookup(self, alphas: np.ndarray) -> np.ndarray:
        """Vectorized lookup of an ``(..., n)`` array of exponents."""
        alphas = np.asarray(alphas, dtype=np.int64)
        flat = alphas.reshape(-1, self.space.n)
        uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
        idx = np.empty(uniq.shape[0], dtype=np.int64)
        missing = []
        for k, a in enumerate(map(tuple, uniq.tolist())):
            i = self.basis.index.get(a)
            if i is None:
                missing.append(a)
            else:
                idx[k] = i
        if missing:
            raise MissingMomentsError(missing)
        return self.values[idx[inverse.reshape(-1)]].reshape(alphas.shape[:-1])

    def covers(self, alphas) -> bool:
        return all(tuple(int(x) for x in a) in self.basis.index for a in alphas)

    def entries(self) -> dict:
        return {a: complex(v) for a, v in zip(self.basis.elements, self.values)}

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        """``sigma(x**-alpha) == conj(sigma(x**alpha))`` on a negation-closed table."""
        neg = -self.basis.exponents
        return bool(np.allclose(self.lookup(neg), np.conj(self.values), rtol=0, atol=atol))

    def apply(self, p: Poly) -> complex:
        """``sigma(p)`` for a polynomial whose terms are covered."""
        terms = p.terms()
        if not terms:
            return 0j
        alphas = np.array(list(terms), dtype=np.int64)
        return complex(self.lookup(alphas) @ np.array(list(terms.values())))

    def restrict(self, basis: FiltrationBasis) -> "MomentTable":
        return MomentTable(self.space, basis, self.lookup(basis.exponents), self.provenance, self.nodes)

    def to_json(self) -> dict:
        out = {
            "space": self.space.to_json(),
            "ring": self.basis.ring.value,
            "filtration": self.basis.filtration.value,
            "max_degree": self.basis.degree,
            "entries": [
                {"alpha": list(a), "value": [float(v.real), float(v.imag)]}
                for a, v in zip(self.basis.elements, self.values)
            ],
            "provenance": self.provenance,
        }
        if self.nodes is not None:
            out["nodes"] = self.nodes
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "MomentTable":
        try:
            space = space_from_json(obj["space"])
            filtration = FiltrationKind(obj.get("filtration", space.default_filtration().value))
            ring = RingKind(obj.get("ring", space.default_ring().value))
            if ring is RingKind.LAURENT:
                filtration = FiltrationKind.MAX
            basis = build_basis(space.n, int(obj["max_degree"]), ring, filtration)
            vals = np.full(len(basis), np.nan, dtype=complex)
            for e in obj["entries"]:
                alpha = tuple(int(a) for a in e["alpha"])
                i = basis.index.get(alpha)
                if i is None:
                    raise ValidationError(f"entry {alpha} lies outside the declared basis")
                re, im = _pair(e["value"])
                vals[i] = complex(re, im)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"malformed moment table JSON: {exc}") from exc
        holes = np.flatnonzero(np.isnan(vals.real))
        if holes.size:
            raise MissingMomentsError([basis.elements[i] for i in holes])
        return cls(space, basis, vals, obj.get("provenance", "exact"), obj.get("nodes"))


def _pair(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValidationError(f"complex value must be a [re, im] pair, got {v}")
        return float(v[0]), float(v[1])
    return float(v), 0.0


def table_basis(space: Space, degree: int) -> FiltrationBasis:
    """Default full basis for a space: Laurent max-degree on the torus, total degree otherwise."""
    return build_basis(space.n, degree, space.default_ring(), space.default_filtration())


def moments(
    spec: MeasureSpec,
    basis: FiltrationBasis | int,
    quadrature: QuadratureConfig | None = None,
) -> MomentTable:
    """Moment table of ``spec`` over ``basis`` (an int selects :func:`table_basis`)."""
    quad = quadrature or QuadratureConfig()
    if isinstance(basis, (int, np.integer)):
        basis = table_basis(spec.space, int(basis))
    if basis.n != spec.space.n:
        raise ValidationError("basis dimension does not match measure")
    if not spec.space.is_torus and basis.ring is RingKind.LAURENT:
        raise ValidationError("affine measures need a polynomial-ring basis")

    def work(comp):
        return _component_moments(spec.space, comp, basis, quad)

    if quad.threads > 1 and len(spec.terms) > 1:
        with ThreadPoolExecutor(max_workers=quad.threads) as pool:
            parts = list(pool.map(work, spec.terms))
    else:
        parts = [work(c) for c in spec.terms]

    total = np.zeros(len(basis), dtype=complex)
    for comp, (vals, _, _) in zip(spec.terms, parts):
        total = total + comp.weight * vals
    used = [n for _, prov, n in parts if prov == "quadrature"]
    provenance = "quadrature" if used else "exact"
    return MomentTable(spec.space, basis, total, provenance, max(used) if used else None)


def uniform_curve_moments(
    body: TrigCurve | AffineCurve,
    basis: FiltrationBasis | int,
    quadrature: QuadratureConfig | None = None,
) -> MomentTable:
    """Moments of the (parameter-)uniform measure on a curve."""
    if isinstance(body, TrigCurve):
        space = Space.torus(body.n)
    elif isinstance(body, AffineCurve):
        space = Space.affine(body.n)
    else:
        raise ValidationError("uniform moments need a curve body")
    return moments(MeasureSpec(space, (WeightedComponent(1.0, body),)), basis, quadrature)


def atomic_measure(points, weights, torus: bool = False) -> MeasureSpec:
    """Convenience constructor.  On the torus ``points`` are phases."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    space = Space(SpaceKind.TORUS if torus else SpaceKind.AFFINE, points.shape[1])
    weights = np.broadcast_to(np.asarray(weights, dtype=complex), (points.shape[0],))
    return MeasureSpec(space, tuple(WeightedComponent(w, Atomic(p)) for p, w in zip(points, weights)))


# -- JSON ---------------------------------------------------------------------------


def space_from_json(obj: Mapping) -> Space:
    try:
        return Space(SpaceKind(obj["kind"]), int(obj["n"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise ValidationError(f"malformed space: {obj!r}") from exc


def body_to_json(body: Body) -> dict:
    if isinstance(body, Atomic):
        return {"kind": "atomic", "point": list(body.point)}
    if isinstance(body, TrigCurve):
        return {"kind": "trig_curve", "v": list(body.v)}
    coords = []
    for c in body.coords:
        if isinstance(c, ParamPoly):
            coords.append({"poly": list(c.coeffs)})
        else:
            coords.append({"trig": {"const": c.const, "cos": list(c.cos), "sin": list(c.sin)}})
    return {"kind": "affine_curve", "coords": coords, "domain": list(body.domain)}


def body_from_json(obj: Mapping) -> Body:
    try:
        kind = obj["kind"]
        if kind == "atomic":
            return Atomic(tuple(obj["point"]))
        if kind == "trig_curve":
            return TrigCurve(tuple(obj["v"]))
        if kind == "affine_curve":
            coords = []
            for c in obj["coords"]:
                if "poly" in c:
                    coords.append(ParamPoly(tuple(c["poly"])))
                else:
                    t = c["trig"]
                    coords.append(ParamTrig(t.get("const", 0.0), tuple(t.get("cos", ())), tuple(t.get("sin", ()))))
            return AffineCurve(tuple(coords), tuple(obj.get("domain", (0.0, 1.0))))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed body JSON: {exc}") from exc
    raise ValidationError(f"unknown body kind {obj.get('kind')!r}")


def spec_to_json(spec: MeasureSpec) -> dict:
    return {
        "space": spec.space.to_json(),
        "terms": [
            {
                "weight": [c.weight.real, c.weight.imag],
                "body": body_to_json(c.body),
                "density": None if c.density is None else c.density.to_json(),
            }
            for c in spec.terms
        ],
    }


def spec_from_json(obj: Mapping) -> MeasureSpec:
    try:
        space = space_from_json(obj["space"])
        terms = []
        for t in obj["terms"]:
            re, im = _pair(t.get("weight", 1.0))
            dens = t.get("density")
            terms.append(
                WeightedComponent(
                    complex(re, im),
                    body_from_json(t["body"]),
                    None if dens is None else Poly.from_json(dens),
                )
            )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed measure JSON: {exc}") from exc
    return MeasureSpec(space, tuple(terms))
