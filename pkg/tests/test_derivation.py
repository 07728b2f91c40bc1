import numpy as np
import pytest

from freedim.derivation import (TensorElement, d_s, d_sa, d_u, d_u_blocks, linnell_witness,
                                m_f, partial_deriv, raw_deriv)
from freedim.ncpoly import Polynomial, parse, random_polynomial, random_word

T = TensorElement.from_polys


def P(text, n=2):
    return parse(text, n)


def test_partial_examples():
    assert partial_deriv(P("X1^2", 1), 1, "sa") == T(P("I", 1), P("X1", 1)) + T(P("X1", 1), P("I", 1))
    assert partial_deriv(P("X1'", 1), 1, "sk") == TensorElement.one().scale(-1)
    assert partial_deriv(P("X2 X1 X2'"), 1, "sa") == T(P("X2"), P("X2'"))
    assert partial_deriv(P("X2"), 1, "sa").is_zero()
    with pytest.raises(IndexError):
        partial_deriv(P("X1"), 3)
    with pytest.raises(ValueError):
        partial_deriv(P("X1"), 1, "bogus")


def test_raw_flags_starred_occurrences():
    t = raw_deriv(P("X1 X1'", 1), 1)
    assert {d for (_, _, d) in t.terms} == {0, 1}


def test_d_s_generator_blocks():
    D = d_s([P("X1", 1)])
    one = TensorElement.one()
    assert D[0, 0] == one and D[0, 1].is_zero()
    assert D[1, 0].is_zero() and D[1, 1] == one


def test_d_s_constant_is_zero():
    assert d_s([P("I", 1)]).is_zero()


def test_d_s_unitary_relation_row():
    D = d_s([P("X1' X1 - I", 1)])
    X1s, X1, I = P("X1'", 1), P("X1", 1), P("I", 1)
    assert D[0, 0] == T(X1s, I) + T(I, X1)
    assert D[0, 1] == T(X1s, I) - T(I, X1)
    assert D[1, 0].is_zero() and D[1, 1].is_zero()


def test_d_sa_examples():
    D = d_sa([P("X2 X1 - X1' X2'")], identify_adjoints=True)
    assert D[0, 0] == T(P("X2"), P("I")) - T(P("I"), P("X2"))
    assert D[0, 1] == T(P("I"), P("X1")) - T(P("X1"), P("I"))
    raw = d_sa([P("X2 X1 - X1' X2'")])
    assert raw[0, 0] == T(P("X2"), P("I")) - T(P("I"), P("X2'"))
    assert d_sa([(P("X1", 1) + P("X1'", 1)).scale(0.5)])[0, 0] == TensorElement.one()
    D = d_sa([P("X1 X2 X1 + X1' X2' X1'")])
    assert D[0, 1] == T(P("X1"), P("X1")) + T(P("X1'"), P("X1'"))
    with pytest.raises(ValueError):
        d_sa([P("X1 X2")])


def test_m_f_examples():
    one = TensorElement.one()
    I = Polynomial.const(1.0, 1)
    M = m_f(I)
    assert M[0, 0] == one and M[1, 1] == one and M[0, 1].is_zero()
    M = m_f(Polynomial.const(1j, 1))
    assert M[0, 0].is_zero() and M[0, 1] == one.scale(1j) and M[1, 0] == one.scale(1j)
    X1, X1s = P("X1", 1), P("X1'", 1)
    M = m_f(X1)
    assert M[0, 0] == (T(X1, I) + T(I, X1s)).scale(0.5)
    assert M[0, 1] == (T(X1, I) - T(I, X1s)).scale(0.5)


def test_d_u_examples():
    D = d_u([P("X2 X1 X2 X1")])
    assert D[0, 0] == T(P("X1' X2'"), P("X2 X1")) + TensorElement.one()
    assert d_u([P("X2")])[0, 0].is_zero()
    assert d_u([P("X1", 1)])[0, 0] == TensorElement.one()
    with pytest.raises(ValueError):
        d_u([P("X1 + X2")])


def test_d_u_blocks_are_diagonal_and_routes_agree():
    rng = np.random.default_rng(5)
    for _ in range(150):
        n = int(rng.integers(1, 4))
        f = Polynomial.word(random_word(rng, n, int(rng.integers(1, 6))), n)
        assert d_u([f], "definition") == d_u([f], "remark_rule")
        for j in range(1, n + 1):
            B = d_u_blocks(f, j)
            assert B[0, 1].is_zero() and B[1, 0].is_zero()


def test_linnell_witness():
    w = linnell_witness(P("X1 X2"), 1)
    assert len(w.signed_terms) == 1 and w.distinct
    w = linnell_witness(P("X1 X2 X1 X2'"), 1)
    assert len(w.signed_terms) == 2 and w.distinct
    w = linnell_witness(P("X1 X1", 1), 1)
    rights = sorted(len(b) for _, _, b in w.signed_terms)
    assert rights == [0, 1] and w.distinct
    with pytest.raises(ValueError):
        linnell_witness(P("X2"), 1)


@pytest.mark.parametrize("seed", range(5))
def test_leibniz_random(seed):
    rng = np.random.default_rng(seed)
    for _ in range(60):
        n = int(rng.integers(1, 4))
        p = random_polynomial(rng, n, 3, 3, integer_coeffs=True)
        q = random_polynomial(rng, n, 2, 3, integer_coeffs=True)
        for j in range(1, n + 1):
            for fl in ("sa", "sk"):
                lhs = partial_deriv(p * q, j, fl)
                rhs = partial_deriv(p, j, fl).act(right=q) + partial_deriv(q, j, fl).act(left=p)
                assert lhs.allclose(rhs)
            assert raw_deriv(p * q, j).allclose(raw_deriv(p, j).act(right=q)
                                                + raw_deriv(q, j).act(left=p))


def test_act_orders_legs():
    t = TensorElement.simple((), ())
    a, b = P("X1"), P("X2")
    assert t.act(left=a, right=b) == T(a, b)
    assert T(a, b).act(right=a) == T(a, b * a)


def test_tensor_product_rule():
    a, b, c, d = P("X1"), P("X2"), P("X1'"), P("X2'")
    assert T(a, b) * T(c, d) == T(a * c, d * b)
