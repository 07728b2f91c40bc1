import numpy as np
import pytest
from scipy import stats

from freedim.covering import flatten_tuple
from freedim.derivation import TensorElement, d_s, m_f
from freedim.ncpoly import PolyTuple, parse, random_polynomial
from freedim.repn import (BigMatrix, MatrixTuple, adjoint_map, assemble, complexify,
                          conjugation_orbit, eval_poly, eval_tuple, eval_word, haar_unitary,
                          phi_embed, real_derivative, realify, rng_stream, sample, sigma_eval)
from freedim.suites import ginibre_tuple


def test_eval_zero_examples():
    xi = sample("commuting_diagonal", 5, 2, seed=1)
    assert np.allclose(eval_poly(parse("X1 X2 - X2 X1", 2), xi), 0)
    u = sample("haar_unitary", 6, 1, seed=2)
    assert np.abs(eval_poly(parse("X1' X1 - I", 1), u)).max() < 1e-12
    nil = MatrixTuple(np.array([[[0, 1], [0, 0]]], dtype=complex))
    assert np.allclose(eval_poly(parse("X1^2", 1), nil), 0)


def test_eval_word_matches_products(rng):
    xi = ginibre_tuple(rng, 2, 4)
    w = parse("X1 X2' X1", 2).single_word()
    a, b = xi.mats
    assert np.allclose(eval_word(w, xi), a @ b.conj().T @ a)


def test_sigma_eval_examples(rng):
    xi = ginibre_tuple(rng, 2, 2)
    assert np.allclose(sigma_eval(TensorElement.one(), xi).data, np.eye(4))
    a = xi.mats[0]
    t = TensorElement.from_polys(parse("X1", 2), parse("I", 2))
    M = sigma_eval(t, xi).data
    # entry ((r,q),(p,s)) equals a[r,p] delta_{qs}
    for r in range(2):
        for q in range(2):
            for p in range(2):
                for s in range(2):
                    assert np.isclose(M[2 * r + q, 2 * p + s], a[r, p] * (q == s))
    d = np.array([0.3, 1.1, 2.0])
    xi = MatrixTuple(np.array([np.eye(3), np.diag(d)], dtype=complex))
    t = TensorElement.from_polys(parse("X2", 2), parse("I", 2)) - \
        TensorElement.from_polys(parse("I", 2), parse("X2", 2))
    assert np.allclose(sigma_eval(t, xi).data, np.diag(np.subtract.outer(d, d).ravel()))


def test_assemble_structure():
    xi = sample("haar_unitary", 8, 1, seed=3)
    A = assemble(d_s([parse("X1' X1 - I", 1)]), xi).data
    assert A.shape == (128, 128)
    assert np.allclose(A[64:], 0)
    assert not np.allclose(A[:64], 0)
    from freedim.derivation import TensorMatrix
    Z = assemble(TensorMatrix.zeros(2, 2), xi).data
    assert np.allclose(Z, 0)


def test_real_derivative_examples(rng):
    xi = ginibre_tuple(rng, 1, 3)
    assert np.allclose(real_derivative([parse("X1", 1)], xi), np.eye(18))
    J = real_derivative([parse("X1'", 1)], xi)
    assert np.allclose(J, adjoint_map(3))
    assert np.allclose(J @ J, np.eye(18))


def _fd_setup(seed):
    rng = rng_stream(seed, 0)
    n, k = int(rng.integers(1, 3)), int(rng.integers(2, 5))
    F = PolyTuple([random_polynomial(rng, n, 3, 3) for _ in range(2)])
    xi = ginibre_tuple(rng, n, k)
    xi = MatrixTuple(xi.mats / max(np.linalg.norm(m, 2) for m in xi.mats))
    delta = ginibre_tuple(rng, n, k)
    return F, xi, delta, k


def _fd(F, xi, delta, h, central):
    lo = xi - delta.scale(h) if central else xi
    den = 2 * h if central else h
    return (flatten_tuple(eval_tuple(F, xi + delta.scale(h)))
            - flatten_tuple(eval_tuple(F, lo))) / den


@pytest.mark.parametrize("seed", range(20))
def test_real_derivative_central_difference(seed):
    F, xi, delta, k = _fd_setup(seed)
    lin = real_derivative(F, xi) @ flatten_tuple(delta)
    err = np.linalg.norm(_fd(F, xi, delta, 1e-5, True) - lin) / np.sqrt(k)
    assert err < 1e-7


@pytest.mark.parametrize("seed", range(5))
def test_real_derivative_forward_difference_is_first_order(seed):
    F, xi, delta, k = _fd_setup(seed)
    lin = real_derivative(F, xi) @ flatten_tuple(delta)
    e1 = np.linalg.norm(_fd(F, xi, delta, 1e-3, False) - lin)
    e2 = np.linalg.norm(_fd(F, xi, delta, 1e-4, False) - lin)
    if e1 > 1e-9:  # zero second derivative makes both errors round-off
        assert 5 < e1 / e2 < 20


def test_phi_embed_matches_assemble(rng):
    for _ in range(20):
        n, k = int(rng.integers(1, 3)), int(rng.integers(1, 5))
        F = PolyTuple([random_polynomial(rng, n, 3, 3) for _ in range(int(rng.integers(1, 3)))])
        xi = ginibre_tuple(rng, n, k)
        lhs = phi_embed(real_derivative(F, xi), k).data
        rhs = assemble(d_s(F), xi).data
        assert np.allclose(lhs, rhs, atol=1e-12)


def test_phi_embed_left_multiplication(rng):
    xi = ginibre_tuple(rng, 1, 3)
    x = xi.mats[0]
    R = realify(np.kron(x, np.eye(3)))
    assert np.allclose(phi_embed(R, 3).data, assemble(m_f(parse("X1", 1)), xi).data)
    assert np.allclose(phi_embed(np.eye(18), 3).data, np.eye(18))


def test_phi_embed_preserves_trace(rng):
    for _ in range(100):
        k = int(rng.integers(1, 4))
        R = rng.standard_normal((2 * k * k, 2 * k * k))
        assert abs(np.trace(R) - np.trace(phi_embed(R, k).data)) < 1e-10


def test_realify_roundtrip(rng):
    C = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    assert np.allclose(complexify(realify(C)), 2 * C)


def test_samples():
    u = sample("haar_unitary", 10, 2, seed=4)
    for m in u.mats:
        assert np.abs(m.conj().T @ m - np.eye(10)).max() < 1e-12
    again = sample("haar_unitary", 10, 2, seed=4)
    assert np.array_equal(u.mats, again.mats)
    with pytest.raises(ValueError):
        sample("nope", 3)
    with pytest.raises(ValueError):
        sample("user", 3)


def test_gue_semicircle():
    x = sample("gue_selfadjoint", 200, 1, seed=5).mats[0]
    ev = np.linalg.eigvalsh(x)
    # semicircle on [-2, 2]
    assert stats.kstest(ev, "semicircular", args=(0, 2)).statistic < 0.05


def test_conjugation_orbit_moments():
    xi = sample("gue_selfadjoint", 5, 2, seed=6)
    orbit = conjugation_orbit(xi, 4, seed=1)
    words = [parse(t, 2).single_word() for t in ("X1", "X1 X2", "X2 X1 X1", "X1 X2 X1 X2")]
    for y in orbit:
        for w in words:
            assert abs(np.trace(eval_word(w, y)) - np.trace(eval_word(w, xi))) / 5 < 1e-10
    scalar = MatrixTuple(np.array([2.0 * np.eye(3)], dtype=complex))
    assert all(np.allclose(y.mats, scalar.mats) for y in conjugation_orbit(scalar, 3))
    diag = sample("commuting_diagonal", 4, 1, seed=2)
    pts = [flatten_tuple(y) for y in conjugation_orbit(diag, 10, seed=3)]
    dists = [np.linalg.norm(a - b) for i, a in enumerate(pts) for b in pts[i + 1:]]
    assert min(dists) > 0


def test_matrix_tuple_json_roundtrip(rng):
    xi = ginibre_tuple(rng, 2, 3)
    assert np.allclose(MatrixTuple.from_json(xi.to_json()).mats, xi.mats)


def test_haar_is_unitary_on_stream():
    u = haar_unitary(7, rng_stream(0, 3))
    assert np.allclose(u @ u.conj().T, np.eye(7))
