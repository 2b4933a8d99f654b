"""Scripted reproductions of the worked examples, each scored PASS/FAIL."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from . import corpus
from .densityrecovery import full_pipeline
from .idealrecovery import DeltaBound, Stabilize, max_principal_angle, numerical_kernel, recover_truncated_ideal
from .measures import AffineCurve, MeasureSpec, moments
from .momentmatrix import assemble
from .polyalgebra import build_basis, evaluate, monomial_powers
from .pronysolver import prony


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool

    def to_json(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold, "passed": self.passed}


@dataclass
class Report:
    example: str
    checks: list[Check] = field(default_factory=list)

    def check(self, name: str, value: float, threshold: float, passed: bool | None = None):
        ok = bool(value <= threshold) if passed is None else bool(passed)
        self.checks.append(Check(name, float(value), float(threshold), ok))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "example": self.example,
            "status": "PASS" if self.passed else "FAIL",
            "checks": [c.to_json() for c in self.checks],
        }


def sampled_ideal_dim(spec: MeasureSpec, basis, samples: int = 200, seed: int = 0) -> int:
    """Dimension of the polynomials in ``basis`` vanishing on sampled support points."""
    pts = spec.sample_support(samples, np.random.default_rng(seed))
    V = monomial_powers(pts, basis.exponents)
    s = np.linalg.svd(V, compute_uv=False)
    return len(basis) - int((s > 1e-10 * s[0]).sum())


def torus_signed() -> Report:
    rep = Report("torus-signed")
    spec = corpus.torus_signed()
    tab = moments(spec, 10)
    worst = 0.0
    for dr in range(6):
        for d in range(6):
            ideal, _ = numerical_kernel(assemble(tab, dr, d, row_ring="R"))
            e = np.zeros(len(ideal.basis))
            e[0] = 1.0
            if ideal.dim == 0:
                worst = 1.0
                continue
            proj = ideal.kernel @ (ideal.kernel.conj().T @ e)
            worst = max(worst, float(np.linalg.norm(e - proj)))
    rep.check("constant in ker H_{d',d} with R rows, d',d <= 5", worst, 1e-12)
    return rep


def neg_density() -> Report:
    rep = Report("neg-density")
    tab = moments(corpus.neg_density(), 14)
    for d in (2, 4, 6):
        H = assemble(tab, d, d)
        det = abs(np.linalg.det(H.values))
        rep.check(f"|det H_{{{d},{d}}}| / ||H||^{d + 1}", det / H.norm() ** (d + 1), 1e-10)
    worst = max(numerical_kernel(assemble(tab, d + 1, d))[1].nullity for d in range(7))
    rep.check("max nullity of H_{d+1,d}, d <= 6", worst, 0)
    return rep


def two_atoms() -> Report:
    rep = Report("two-atoms-h00")
    spec = corpus.two_atoms()
    tab = moments(spec, 12)
    ideal, _ = numerical_kernel(assemble(tab, 0, 0))
    rep.check("ker H_{0,0} == span{1}", abs(ideal.dim - 1), 0)
    worst = 0.0
    for d in (2, 3, 4):
        null = scipy.linalg.null_space(monomial_powers(corpus.TWO_ATOMS, build_basis(2, d).exponents))
        for dr in (d, d + 1, d + 2):
            k, _ = numerical_kernel(assemble(tab, dr, d))
            ok = k.dim == null.shape[1]
            worst = max(worst, max_principal_angle(k.kernel, null) if ok else np.pi / 2)
    rep.check("max principal angle to Vandermonde nullspace, d >= 2", worst, 1e-9)
    return rep


def circle() -> Report:
    rep = Report("circle")
    tab = moments(corpus.circle(), 8)
    ideal, _ = numerical_kernel(assemble(tab, 2, 2))
    rep.check("dim ker H_{2,2} == 1", abs(ideal.dim - 1), 0)
    if ideal.dim == 1:
        g = ideal.generators[0].embed(build_basis(2, 2)).coeffs
        target = np.array([-1, 0, 0, 1, 0, 1], dtype=complex)
        rep.check("generator vs x^2 + y^2 - 1", float(np.abs(g - target).max()), 1e-8)
    for d in (3, 4):
        k, _ = numerical_kernel(assemble(tab, d, d))
        expect = (d + 2) * (d + 1) // 2 - (2 * d + 1)
        rep.check(f"dim ker H_{{{d},{d}}} == {expect}", abs(k.dim - expect), 0)
    return rep


def mixture_delta2() -> Report:
    rep = Report("mixture-delta2")
    spec = corpus.torus_signed()
    tab = moments(spec, 12)
    pts = spec.sample_support(200, np.random.default_rng(1))
    ideal = recover_truncated_ideal(tab, 3, DeltaBound(2), col_ring="L")
    rep.check("kernel residual on both curves", float(ideal.residuals_at(pts).max()), 1e-8)
    oracle = sampled_ideal_dim(spec, ideal.basis)
    rep.check(f"dim ker H_{{5,3}} == sampled ideal dim {oracle}", abs(ideal.dim - oracle), 0)
    stab = recover_truncated_ideal(tab, 3, Stabilize(), col_ring="L")
    rep.check("stabilized kernel equals the delta=2 kernel",
              max_principal_angle(stab.kernel, ideal.kernel) if stab.dim == ideal.dim else np.pi / 2, 1e-8)
    h1, h2 = corpus.torus_certificates()
    t = np.random.default_rng(2).random((10_000, 2))
    z = np.exp(2j * np.pi * t)
    vals = np.concatenate([evaluate(h1, z), evaluate(h2, z)])
    rep.check("certificates h_j >= 0 on torus samples", max(0.0, -float(vals.real.min())), 1e-12)
    return rep


def prony_zero_dim(seed: int = 42, count: int = 100) -> Report:
    rep = Report("prony-zero-dim")
    worst_fit, worst_fwd = 0.0, 0.0
    for inst in corpus.prony_corpus(count, seed):
        tab = moments(inst.spec(), 2 * inst.degree)
        rec, _ = prony(tab, inst.degree, seed=seed)
        if rec.rank != inst.r:
            worst_fit = np.inf
            continue
        cost = np.linalg.norm(rec.points[:, None] - inst.points[None], axis=-1)
        i, j = linear_sum_assignment(cost)
        worst_fit = max(worst_fit, float(cost[i, j].max()), float(np.abs(rec.weights[i] - inst.weights[j]).max()))
        fwd = monomial_powers(rec.points, tab.basis.exponents).T @ rec.weights
        worst_fwd = max(worst_fwd, float(np.abs(fwd - tab.values).max()))
    rep.check("points and weights after matching", worst_fit, 1e-8)
    rep.check("forward moments vs table", worst_fwd, 1e-8)
    return rep


def density_circle() -> Report:
    rep = Report("density-circle")
    tab = moments(corpus.circle_density(), 8)
    out = full_pipeline(tab, 3, 1, AffineCurve.circle())
    dens = out.density
    rep.check("coordinates vs (1, 1/2, 0)", float(np.abs(dens.coordinates - [1, 0.5, 0]).max()), 1e-6)
    rep.check("held-out moment residual", dens.holdout_residual, 1e-6)
    lam = dens.min_eigenvalue()
    rep.check("gram min eigenvalue (lower bound)", lam, 0.1, passed=lam >= 0.1)
    return rep


EXAMPLES = {
    "torus-signed": torus_signed,
    "neg-density": neg_density,
    "two-atoms-h00": two_atoms,
    "circle": circle,
    "mixture-delta2": mixture_delta2,
    "prony-zero-dim": prony_zero_dim,
    "density-circle": density_circle,
}
