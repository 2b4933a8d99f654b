import numpy as np
import pytest

from momentvariety.errors import DegreeTooSmallError, RankDeficientError
from momentvariety.idealrecovery import numerical_kernel
from momentvariety.measures import Atomic, MeasureSpec, Space, WeightedComponent, atomic_measure, moments
from momentvariety.momentmatrix import Involution, MomentMatrix
from momentvariety.polyalgebra import build_basis, monomial_powers
from momentvariety.pronysolver import prony, rank_certificate, solve_points, solve_weights


def test_factored_kernel_gives_roots():
    # kernel spanned by (x - 1)(x - 2) = 2 - 3x + x^2
    H = MomentMatrix(np.array([[3.0, 2.0, 0.0], [1.0, 0.0, -2.0]]), build_basis(1, 1), build_basis(1, 2),
                     Involution.TRIVIAL)
    ideal, rep = numerical_kernel(H)
    assert ideal.dim == 1
    pts = solve_points(ideal, rep.rank)
    assert np.allclose(pts[:, 0], [1, 2], atol=1e-12)


def test_three_atoms_in_the_plane():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    tab = moments(atomic_measure(pts, [1, 1, 1]), 4)
    rec, ideal = prony(tab, 2)
    assert rec.rank == 3
    # lexicographic output order: (0, 0), (0, 1), (1, 0)
    assert np.abs(rec.points - pts[[0, 2, 1]]).max() < 1e-10
    assert np.abs(rec.weights - 1).max() < 1e-10
    assert rec.point_residual < 1e-8
    assert np.all(rec.points.imag == 0)


def test_torus_atoms_are_unimodular():
    t = np.array([0.1, 0.37])
    tab = moments(atomic_measure(t[:, None], [1.0, -0.5j], torus=True), 6)
    rec, _ = prony(tab, 3)
    expect = np.exp(2j * np.pi * t)
    got = rec.points[:, 0]
    order = np.argsort(np.angle(got))
    assert np.abs(got[order] - expect[np.argsort(np.angle(expect))]).max() < 1e-10
    assert np.abs(np.abs(got) - 1).max() < 1e-10


def test_single_atom_weight():
    tab = moments(atomic_measure([[2.0]], [3.0]), 4)
    lam, res = solve_weights(np.array([[2.0]]), tab)
    assert lam[0] == pytest.approx(3.0)
    assert res < 1e-14


def test_signed_complex_weights():
    rng = np.random.default_rng(7)
    pts = rng.uniform(-1, 1, (3, 2))
    w = np.array([-1.5, 0.3 + 0.9j, -0.2j])
    tab = moments(atomic_measure(pts, w), 8)
    lam, res = solve_weights(pts, tab)
    assert np.abs(lam - w).max() < 1e-10 and res < 1e-12


def test_coincident_points_rejected():
    tab = moments(atomic_measure([[0.5, 0.5]], [1.0]), 4)
    with pytest.raises(RankDeficientError):
        solve_weights(np.array([[0.5, 0.5], [0.5, 0.5]]), tab)


def test_rank_certificate_examples():
    line = atomic_measure([[0.1, 0.2], [0.5, 0.4]], [1.0, 2.0])
    cert = rank_certificate(moments(line, 6), 2)
    assert cert.rank == 2
    zero = MeasureSpec(Space.affine(2), (WeightedComponent(0.0, Atomic((0.3, 0.3))),))
    assert rank_certificate(moments(zero, 4), 2).rank == 0
    rng = np.random.default_rng(11)
    for r in range(1, 5):
        pts = rng.uniform(-1, 1, (r, 2))
        c = rank_certificate(moments(atomic_measure(pts, np.ones(r)), 2 * r + 1), r + 1)
        assert c.rank == r and c.stabilized


def test_degree_too_small():
    tab = moments(atomic_measure([[-0.5], [0.1], [0.7]], [1, 1, 1]), 4)
    with pytest.raises(DegreeTooSmallError):
        prony(tab, 2)
    with pytest.raises(DegreeTooSmallError):
        prony(moments(atomic_measure([[-0.5], [0.7]], [1, 1]), 6), 3, rank=3)


def test_permutation_invariance_and_determinism():
    rng = np.random.default_rng(5)
    pts = rng.uniform(-1, 1, (4, 2))
    w = rng.uniform(0.5, 1.5, 4) * np.exp(1j * rng.uniform(0, 6, 4))
    perm = rng.permutation(4)
    a, _ = prony(moments(atomic_measure(pts, w), 10), 5)
    b, _ = prony(moments(atomic_measure(pts[perm], w[perm]), 10), 5)
    assert np.abs(a.points - b.points).max() < 1e-10
    assert np.abs(a.weights - b.weights).max() < 1e-10
    c, _ = prony(moments(atomic_measure(pts, w), 10), 5)
    assert np.array_equal(a.points, c.points) and np.array_equal(a.weights, c.weights)


def test_weight_scaling_keeps_points():
    rng = np.random.default_rng(9)
    pts = rng.uniform(-1, 1, (3, 3))
    w = rng.uniform(0.5, 1.5, 3)
    a, _ = prony(moments(atomic_measure(pts, w), 8), 4)
    b, _ = prony(moments(atomic_measure(pts, (2 - 3j) * w), 8), 4)
    assert np.abs(a.points - b.points).max() < 1e-10


def test_recovered_points_satisfy_kernel():
    rng = np.random.default_rng(13)
    pts = rng.uniform(-1, 1, (5, 2))
    tab = moments(atomic_measure(pts, rng.uniform(0.2, 1, 5)), 12)
    rec, ideal = prony(tab, 6)
    assert ideal.residuals_at(rec.points).max() < 1e-8
    again = monomial_powers(rec.points, tab.basis.exponents).T @ rec.weights
    assert np.abs(again - tab.values).max() < 1e-8


def test_json_output():
    tab = moments(atomic_measure([[0.2], [0.8]], [1.0, 1j]), 6)
    obj = prony(tab, 3)[0].to_json()
    assert len(obj["points"]) == 2 and len(obj["weights"]) == 2
    assert set(obj["residuals"]) == {"points", "weights"}
