import numpy as np
import pytest

from momentvariety import corpus
from momentvariety.errors import MissingMomentsError, QuotientDependencyError, ValidationError
from momentvariety.measures import atomic_measure, moments
from momentvariety.momentmatrix import Involution, assemble, quotient_gram, vandermonde
from momentvariety.polyalgebra import Poly, build_basis


def test_hankel_pattern():
    tab = moments(corpus.circle(), 6)
    H = assemble(tab, 3, 2)
    rows, cols = H.rows.elements, H.cols.elements
    for i, a in enumerate(rows):
        for j, b in enumerate(cols):
            assert H.values[i, j] == tab[tuple(x + y for x, y in zip(a, b))]
    assert H.involution is Involution.TRIVIAL
    sq = assemble(tab, 2, 2)
    assert np.allclose(sq.values, sq.values.T)


def test_toeplitz_pattern_and_hermitian():
    tab = moments(corpus.torus_signed(), 6)
    H = assemble(tab, 2, 2, row_ring="L", col_ring="L")
    assert H.involution is Involution.LAURENT
    for i, a in enumerate(H.rows.elements):
        for j, b in enumerate(H.cols.elements):
            assert H.values[i, j] == tab[tuple(y - x for x, y in zip(a, b))]
    assert np.allclose(H.values, H.values.conj().T)


def test_assemble_validation():
    tab = moments(corpus.circle(), 3)
    with pytest.raises(MissingMomentsError):
        assemble(tab, 2, 2)
    with pytest.raises(ValidationError):
        assemble(tab, 1, 1, row_ring="L")


def test_vandermonde_factorization_affine_and_torus():
    pts = np.array([[0.3, -0.4], [0.9, 0.1], [-0.2, -0.8]])
    w = np.array([1.0, -0.5 + 1j, 2.0])
    tab = moments(atomic_measure(pts, w), 6)
    H = assemble(tab, 3, 3)
    vr, lam, vc = vandermonde(pts, w, 3, 3)
    assert np.abs(H.values - vr.T @ lam @ vc).max() <= 1e-14 * H.norm()

    phases = np.array([[0.1, 0.7], [0.4, 0.25]])
    ttab = moments(atomic_measure(phases, [1.0, 1j], torus=True), 4)
    T = assemble(ttab, 2, 2)
    vr, lam, vc = vandermonde(np.exp(2j * np.pi * phases), [1.0, 1j], T.rows, T.cols, Involution.LAURENT)
    assert np.abs(T.values - vr.T @ lam @ vc).max() <= 1e-14 * T.norm()


def test_quotient_gram_positive_on_circle():
    tab = moments(corpus.circle(), 4)
    reps = [Poly.monomial(a, n=2) for a in [(0, 0), (1, 0), (0, 1)]]
    G = quotient_gram(tab, reps)
    assert np.allclose(G.values, np.diag([1.0, 0.5, 0.5]))
    assert np.linalg.eigvalsh(G.values).min() > 0


def test_quotient_gram_rejects_dependent_representatives():
    tab = moments(corpus.circle(), 4)
    ideal = [Poly.from_terms({(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0})]
    reps = [Poly.monomial((0, 0), n=2), Poly.monomial((2, 0), n=2), Poly.monomial((0, 2), n=2)]
    with pytest.raises(QuotientDependencyError):
        quotient_gram(tab, reps, ideal)
    with pytest.raises(ValidationError):
        quotient_gram(tab, [])


def test_serialization():
    tab = moments(corpus.circle(), 2)
    H = assemble(tab, 1, 1)
    csv = H.to_csv().strip().splitlines()
    assert len(csv) == 3 and all(len(line.split(",")) == 3 for line in csv)
    assert complex(csv[0].split(",")[0]) == 1
    obj = H.to_json()
    assert obj["shape"] == [3, 3] and obj["rows"]["elements"][1] == [1, 0]


def test_empty_row_basis_shapes():
    tab = moments(corpus.two_atoms(), 2)
    H = assemble(tab, 0, 0)
    assert H.shape == (1, 1) and H.values[0, 0] == 0
    assert build_basis(2, 0).elements == ((0, 0),)
