"""Named measures used by the reproduction scripts and the test-suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import (
    AffineCurve,
    MeasureSpec,
    Space,
    TrigCurve,
    WeightedComponent,
    atomic_measure,
)
from .polyalgebra import Poly, involve


def torus_signed() -> MeasureSpec:
    """Difference of the uniform measures on ``x1 = x2**2`` and ``x2 = x1**2``."""
    return MeasureSpec(
        Space.torus(2),
        (WeightedComponent(1.0, TrigCurve((2, 1))), WeightedComponent(-1.0, TrigCurve((1, 2)))),
    )


def torus_certificates() -> tuple[Poly, Poly]:
    """``h_j = conj(f_j) f_j`` with ``f_1 = x1**2 - x2`` and ``f_2 = x1 - x2**2``.

    ``f_1`` vanishes on the second curve, ``f_2`` on the first.
    """
    f1 = Poly.from_terms({(2, 0): 1, (0, 1): -1}, n=2, ring="L")
    f2 = Poly.from_terms({(1, 0): 1, (0, 2): -1}, n=2, ring="L")
    return involve(f1) * f1, involve(f2) * f2


def neg_density() -> MeasureSpec:
    """``x dx`` on ``[-1, 1]``."""
    return MeasureSpec(
        Space.affine(1),
        (WeightedComponent(1.0, AffineCurve.interval(-1.0, 1.0), Poly.from_terms({(1,): 1.0}, n=1)),),
    )


TWO_ATOMS = np.array([[0.3, -0.2], [-0.5, 0.6]])


def two_atoms() -> MeasureSpec:
    """``ev_xi1 - ev_xi2``: total mass zero, so ``H_{0,0} = (0)``."""
    return atomic_measure(TWO_ATOMS, [1.0, -1.0])


def circle() -> MeasureSpec:
    return MeasureSpec(Space.affine(2), (WeightedComponent(1.0, AffineCurve.circle()),))


def circle_density() -> MeasureSpec:
    """``(1 + x/2)`` times the uniform measure on the unit circle."""
    g = Poly.from_terms({(0, 0): 1.0, (1, 0): 0.5}, n=2)
    return MeasureSpec(Space.affine(2), (WeightedComponent(1.0, AffineCurve.circle(), g),))


@dataclass(frozen=True)
class PronyInstance:
    points: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def r(self) -> int:
        return self.points.shape[0]

    @property
    def degree(self) -> int:
        return self.r + 1

    def spec(self) -> MeasureSpec:
        return atomic_measure(self.points, self.weights)


def random_prony_instance(rng: np.random.Generator, n: int | None = None, r: int | None = None,
                          min_dist: float = 0.2) -> PronyInstance:
    """Atoms in ``[-1, 1]^n`` at pairwise distance ``>= min_dist``, weights of modulus in ``[0.1, 2]``."""
    n = int(rng.integers(1, 4)) if n is None else n
    r = int(rng.integers(1, 7)) if r is None else r
    while True:
        pts = rng.uniform(-1.0, 1.0, size=(r, n))
        dist = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
        np.fill_diagonal(dist, np.inf)
        if dist.min() >= min_dist:
            break
    w = rng.uniform(0.1, 2.0, size=r) * np.exp(2j * np.pi * rng.uniform(size=r))
    return PronyInstance(pts, w)


def prony_corpus(count: int = 100, seed: int = 42) -> list[PronyInstance]:
    rng = np.random.default_rng(seed)
    return [random_prony_instance(rng) for _ in range(count)]
