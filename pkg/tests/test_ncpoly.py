import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freedim.ncpoly import (ArityError, Letter, Polynomial, PolySyntaxError, arith, free_reduce,
                            is_selfadjoint, is_skewadjoint, parse, parse_tuple, random_polynomial,
                            sa_parts, stats, word_star)

X = lambda j, n=2, s=False: Polynomial.gen(j, n, s)


def test_parse_two_terms():
    f = parse("X1 X2 - X2' X1'", 2)
    assert f.terms == {(Letter(1, False), Letter(2, False)): 1,
                       (Letter(2, True), Letter(1, True)): -1}


def test_parse_zero_and_merge():
    assert parse("0", 3).is_zero()
    f = parse("X1^2 + X1 X1", 1)
    assert f.terms == {(Letter(1, False),) * 2: 2}


def test_parse_complex_coefficients_and_groups():
    f = parse("(2+1i) I", 1)
    assert f.terms == {(): 2 + 1j}
    # a leading sign binds to the real part of a literal only
    assert parse("-1-1i", 1).terms == {(): -1 - 1j}
    assert parse("-2+1i X1", 1) == Polynomial.gen(1, 1).scale(-2 + 1j)
    assert parse("-i X1", 1) == Polynomial.gen(1, 1).scale(-1j)
    g = parse("(X1 + X2)(X1 - X2)", 2)
    assert g == X(1) * X(1) - X(1) * X(2) + X(2) * X(1) - X(2) * X(2)


@pytest.mark.parametrize("text", ["X1 +", "X3", "X1^", "(X1", "X0", ""])
def test_parse_errors(text):
    with pytest.raises((PolySyntaxError, ArityError)):
        parse(text, 2)


def test_arity_checked():
    with pytest.raises(ArityError):
        parse("X1", 0)


def test_star_rules():
    assert (X(1) * X(2)).star() == X(2, s=True) * X(1, s=True)
    assert Polynomial.const(2 + 1j, 1).star() == Polynomial.const(2 - 1j, 1)
    f = parse("X2 X1 - X1' X2'", 2)
    assert f.star() == -f
    assert is_skewadjoint(f) and not is_selfadjoint(f)


def test_arith():
    assert arith(X(1), X(2), "mul") == X(1) * X(2)
    assert arith(X(1), -X(1), "add").is_zero()
    assert arith(X(1) + X(2), X(1) - X(2), "mul") == parse("X1 X1 - X1 X2 + X2 X1 - X2 X2", 2)
    with pytest.raises(ValueError):
        arith(X(1), None, "mul")


def test_sa_parts():
    a, b = sa_parts(X(1, 1))
    assert a == (X(1, 1) + X(1, 1, True)).scale(0.5)
    assert b == (X(1, 1) - X(1, 1, True)).scale(0.5)
    f = parse("X1 X2 + X2' X1'", 2)
    assert sa_parts(f) == (f, Polynomial.zero(2))
    g = parse("i X1 X1'", 1)
    a, b = sa_parts(g)
    assert a.is_zero() and b == g


@pytest.mark.parametrize("text,n,expected", [
    ("X2 X1 - X1' X2'", 2, (2.0, 2)),
    ("3 X1", 1, (3.0, 1)),
    ("I", 1, (1.0, 0)),
])
def test_stats(text, n, expected):
    assert stats(parse_tuple(text, n)) == expected


def test_free_reduce():
    w = parse("X1 X2 X2' X1' X1", 2).single_word()
    assert free_reduce(w) == (Letter(1, False),)
    assert free_reduce(()) == ()


def test_random_star_is_involutive_antihomomorphism():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = int(rng.integers(1, 4))
        p = random_polynomial(rng, n, 4, 3, integer_coeffs=True)
        q = random_polynomial(rng, n, 4, 3, integer_coeffs=True)
        assert p.star().star() == p
        assert (p * q).star() == q.star() * p.star()
        assert (p + q).star() == p.star() + q.star()


def test_text_roundtrip_random():
    rng = np.random.default_rng(2)
    for _ in range(200):
        n = int(rng.integers(1, 4))
        p = random_polynomial(rng, n, 5, 4, integer_coeffs=True)
        assert parse(str(p), n) == p


letters = st.builds(Letter, st.integers(1, 3), st.booleans())


@settings(max_examples=200, deadline=None)
@given(st.lists(letters, max_size=8))
def test_word_star_involution(w):
    w = tuple(w)
    assert word_star(word_star(w)) == w
    assert free_reduce(free_reduce(w)) == free_reduce(w)


@settings(max_examples=200, deadline=None)
@given(st.lists(letters, max_size=8), st.lists(letters, max_size=8))
def test_free_reduce_is_multiplicative(a, b):
    a, b = tuple(a), tuple(b)
    assert free_reduce(a + b) == free_reduce(free_reduce(a) + free_reduce(b))
    # w w* reduces to the identity
    assert free_reduce(a + word_star(a)) == ()
