"""Acceptance checks, one per criterion, each printing a PASS/FAIL line."""

from math import comb

import numpy as np
import pytest
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from momentvariety import corpus
from momentvariety.densityrecovery import full_pipeline
from momentvariety.idealrecovery import (
    DeltaBound,
    Stabilize,
    kernel_contains,
    max_principal_angle,
    numerical_kernel,
    recover_truncated_ideal,
    verify_containment,
)
from momentvariety.measures import AffineCurve, MeasureSpec, moments
from momentvariety.momentmatrix import assemble, vandermonde
from momentvariety.polyalgebra import Poly, build_basis, monomial_powers
from momentvariety.pronysolver import prony


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def instances():
    return corpus.prony_corpus(100, seed=42)


def sampled_nullspace(spec: MeasureSpec, basis, samples=200, seed=0):
    """Polynomials in ``basis`` vanishing on sampled support points (truncated ideal oracle)."""
    pts = spec.sample_support(samples, np.random.default_rng(seed))
    V = monomial_powers(pts, basis.exponents)
    _, s, vh = np.linalg.svd(V)
    rank = int((s > 1e-10 * s[0]).sum())
    return vh[rank:].conj().T


def test_criterion_1_prony_round_trip(instances, report):
    worst_fit = worst_fwd = 0.0
    bad_rank = 0
    for inst in instances:
        tab = moments(inst.spec(), 2 * inst.degree)
        rec, _ = prony(tab, inst.degree)
        if rec.rank != inst.r:
            bad_rank += 1
            continue
        cost = np.linalg.norm(rec.points[:, None] - inst.points[None], axis=-1)
        i, j = linear_sum_assignment(cost)
        worst_fit = max(worst_fit, cost[i, j].max(), np.abs(rec.weights[i] - inst.weights[j]).max())
        fwd = monomial_powers(rec.points, tab.basis.exponents).T @ rec.weights
        worst_fwd = max(worst_fwd, np.abs(fwd - tab.values).max())
    ok = bad_rank == 0 and worst_fit <= 1e-8 and worst_fwd <= 1e-8
    report(1, ok, f"rank mismatches={bad_rank} matched error={worst_fit:.2e} forward error={worst_fwd:.2e} (<= 1e-8)")


def test_criterion_2_vandermonde(instances, report):
    worst = 0.0
    for inst in instances:
        d = inst.degree
        tab = moments(inst.spec(), 2 * d)
        H = assemble(tab, d, d)
        vr, lam, vc = vandermonde(inst.points, inst.weights, H.rows, H.cols)
        worst = max(worst, np.abs(H.values - vr.T @ lam @ vc).max() / H.norm())
    report(2, worst <= 1e-12, f"max |H - V^T L V| / ||H|| = {worst:.2e} (<= 1e-12)")


def test_criterion_3_circle(report):
    tab = moments(corpus.circle(), 8)
    ideal, _ = numerical_kernel(assemble(tab, 2, 2))
    coeff_err = np.inf
    if ideal.dim == 1:
        g = ideal.generators[0]
        target = Poly.from_terms({(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0}).embed(g.basis).coeffs
        k = np.argmax(np.abs(target))
        c = g.coeffs * target[k] / g.coeffs[k]
        coeff_err = np.abs(c - target).max()
    dims = {d: numerical_kernel(assemble(tab, d, d))[0].dim for d in (3, 4)}
    expect = {d: comb(d + 2, 2) - (2 * d + 1) for d in (3, 4)}
    ok = ideal.dim == 1 and coeff_err <= 1e-8 and dims == expect
    report(3, ok, f"d=2 dim={ideal.dim} coeff error={coeff_err:.2e}; dims {dims} expected {expect}")


def test_criterion_4_torus_counterexample(report):
    spec = corpus.torus_signed()
    tab = moments(spec, 12)
    worst = 0.0
    for dr in range(6):
        for d in range(6):
            H = assemble(tab, dr, d, row_ring="R")
            const = Poly.monomial((0, 0), n=2, ring=H.cols.ring).embed(H.cols).coeffs
            worst = max(worst, np.linalg.norm(H.values @ const) / max(H.norm(), 1.0))
    ideal = recover_truncated_ideal(tab, 3, DeltaBound(2), col_ring="L")
    stab = recover_truncated_ideal(tab, 3, Stabilize(), col_ring="L")
    pts = spec.sample_support(200, np.random.default_rng(1))
    vanish = ideal.residuals_at(pts).max()
    oracle = sampled_nullspace(spec, ideal.basis, seed=7)
    same = stab.dim == ideal.dim and max_principal_angle(stab.kernel, ideal.kernel) <= 1e-8
    ok = worst <= 1e-12 and vanish <= 1e-8 and ideal.dim == oracle.shape[1] and same
    report(4, ok, f"R rows residual={worst:.2e}; L rows delta=2 d=3: vanishing={vanish:.2e}, "
                  f"dim={ideal.dim} oracle={oracle.shape[1]}, stabilized agrees={same}")


def test_criterion_5_negative_density(report):
    tab = moments(corpus.neg_density(), 14)
    ratios = {}
    for d in (2, 4, 6):
        H = assemble(tab, d, d)
        ratios[d] = abs(np.linalg.det(H.values)) / H.norm() ** (d + 1)
    nullities = [numerical_kernel(assemble(tab, d + 1, d))[1].nullity for d in range(7)]
    ok = max(ratios.values()) <= 1e-10 and max(nullities) == 0
    detail = ", ".join(f"d={d}: {v:.1e}" for d, v in ratios.items())
    report(5, ok, f"|det| / ||H||^(d+1) {detail}; nullities of H_(d+1,d) = {nullities}")


def test_criterion_6_two_atoms(report):
    tab = moments(corpus.two_atoms(), 14)
    h00, _ = numerical_kernel(assemble(tab, 0, 0))
    span_one = h00.dim == 1 and abs(abs(h00.kernel[0, 0]) - 1) < 1e-15
    worst = 0.0
    for d in (2, 3, 4):
        null = scipy.linalg.null_space(monomial_powers(corpus.TWO_ATOMS, build_basis(2, d).exponents))
        for dr in (d, d + 1, d + 2):
            k, _ = numerical_kernel(assemble(tab, dr, d))
            worst = max(worst, max_principal_angle(k.kernel, null) if k.dim == null.shape[1] else np.pi / 2)
    ok = span_one and worst <= 1e-9
    report(6, ok, f"ker H_(0,0) = span(1): {span_one}; max angle for d=2..4, d'=d..d+2: {worst:.2e} (<= 1e-9)")


def test_criterion_7_density(report):
    tab = moments(corpus.circle_density(), 8)
    dens = full_pipeline(tab, 3, 1, AffineCurve.circle()).density
    err = np.abs(dens.coordinates - [1, 0.5, 0]).max()
    lam = dens.min_eigenvalue()
    ok = err <= 1e-6 and dens.holdout_residual <= 1e-6 and lam >= 0.1
    report(7, ok, f"coordinate error={err:.2e}; held-out residual={dens.holdout_residual:.2e}; "
                  f"gram min eigenvalue={lam:.3f}")


def _suite_instances(instances):
    """(spec, col degree, column ring, moment degree) for every corpus measure."""
    out = [(inst.spec(), inst.degree, "R", 2 * inst.degree + 2) for inst in instances]
    for d in (1, 2, 3):
        out.append((corpus.circle(), d, "R", 2 * d + 2))
        out.append((corpus.circle_density(), d, "R", 2 * d + 2))
        out.append((corpus.neg_density(), d, "R", 2 * d + 2))
        out.append((corpus.two_atoms(), d, "R", 2 * d + 2))
        out.append((corpus.torus_signed(), d, "L", 2 * d + 2))
    return out


def test_criterion_8_containment_and_monotonicity(instances, report):
    contain_bad = mono_bad = checked = 0
    worst = 0.0
    for spec, d, ring, deg in _suite_instances(instances):
        tab = moments(spec, deg)
        cols = assemble(tab, d, d, col_ring=ring).cols
        null = sampled_nullspace(spec, cols)
        gens = [Poly(cols, null[:, k]) for k in range(null.shape[1])]
        prev = None
        for dr in range(d, d + 2):
            H = assemble(tab, dr, d, col_ring=ring)
            rep = verify_containment(gens, H, 1e-8)
            worst = max(worst, rep.max_residual)
            contain_bad += not rep.ok
            k, _ = numerical_kernel(H)
            if prev is not None:
                mono_bad += not kernel_contains(prev.kernel, k.kernel)
            prev = k
            checked += 1
    ok = contain_bad == 0 and mono_bad == 0
    report(8, ok, f"{checked} matrices: containment violations={contain_bad} (worst {worst:.2e}), "
                  f"monotonicity violations={mono_bad}")
