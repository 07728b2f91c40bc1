import numpy as np
import pytest

from freedim.projections import (cheb_projection, meet, ntrace, opnorm, product_projection,
                                 proj_from_basis, range_fit_projection)
from freedim.repn import norm2


def _rand(rng, k, spread=1.5):
    g = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
    return g @ np.diag(np.exp(spread * rng.standard_normal(k)))


def _rand_proj(rng, k, r):
    q, _ = np.linalg.qr(rng.standard_normal((k, r)) + 1j * rng.standard_normal((k, r)))
    return proj_from_basis(q, k)


def test_cheb_example():
    z = np.diag([0.1, 10.0])
    c = cheb_projection(z, 1.0)
    assert norm2(z) == pytest.approx(7.0714, abs=1e-4)
    assert np.allclose(c.p, np.diag([1, 0]))
    assert c.trace == pytest.approx(0.5)
    assert c.bound_achieved == pytest.approx(0.1)
    assert c.holds()


def test_cheb_identity_when_already_bounded():
    c = cheb_projection(np.eye(4) * 3.0, 1.0)
    assert np.allclose(c.p, np.eye(4))
    c = cheb_projection(np.zeros((3, 3)), 2.0)
    assert np.allclose(c.p, np.eye(3)) and c.note
    with pytest.raises(ValueError):
        cheb_projection(np.eye(2), 0.0)


def test_cheb_random_bounds(rng):
    worst = 1.0
    for _ in range(300):
        c = cheb_projection(_rand(rng, 16), 2.0)
        assert c.holds() and c.is_projection()
        worst = min(worst, c.trace)
    assert worst >= 0.75


def test_range_fit_examples(rng):
    x = _rand(rng, 6)
    assert np.allclose(range_fit_projection(x, np.eye(6)).p, np.eye(6))
    assert np.allclose(range_fit_projection(np.zeros((6, 6)), _rand_proj(rng, 6, 2)).p, np.eye(6))


def test_range_fit_random(rng):
    k = 8
    for _ in range(100):
        a = rng.standard_normal((k, k // 2)) + 1j * rng.standard_normal((k, k // 2))
        b = rng.standard_normal((k // 2, k)) + 1j * rng.standard_normal((k // 2, k))
        q = _rand_proj(rng, k, k // 2)
        c = range_fit_projection(a @ b, q)
        assert c.trace >= 0.5 - 1e-9
        assert opnorm((np.eye(k) - q) @ (a @ b) @ c.p) < 1e-10
        assert c.holds()


def test_meet_law(rng):
    k = 10
    for _ in range(100):
        p = _rand_proj(rng, k, int(rng.integers(0, k + 1)))
        q = _rand_proj(rng, k, int(rng.integers(0, k + 1)))
        m = meet(p, q)
        assert np.allclose(m @ m, m, atol=1e-10)
        assert ntrace(m) >= ntrace(p) + ntrace(q) - 1 - 1e-10
        assert np.allclose(p @ m, m, atol=1e-8) and np.allclose(q @ m, m, atol=1e-8)


def test_meet_shared_subspace(rng):
    k = 6
    base = _rand_proj(rng, k, 2)
    extra1 = _rand_proj(rng, k, 1)
    p = meet(np.eye(k), base)
    assert np.allclose(p, base, atol=1e-10)
    assert ntrace(meet(base, np.zeros((k, k)))) == 0.0
    assert ntrace(meet(base, base)) == pytest.approx(2 / 6)
    assert ntrace(meet(base, extra1)) == pytest.approx(0.0, abs=1e-12)


def test_product_examples(rng):
    z = _rand(rng, 8)
    a = product_projection([z], 2.0)
    b = cheb_projection(z, 2.0)
    assert np.allclose(a.p, b.p)
    c = product_projection([np.eye(5), np.eye(5)], 1.0)
    assert np.allclose(c.p, np.eye(5))
    with pytest.raises(ValueError):
        product_projection([], 2.0)
    with pytest.raises(ValueError):
        product_projection([z], 2.0, "two_sided")
    with pytest.raises(ValueError):
        product_projection([z], 2.0, "diagonal")


@pytest.mark.parametrize("side", ["right", "left"])
def test_product_random(rng, side):
    for _ in range(100):
        zs = [_rand(rng, 16) for _ in range(int(rng.integers(1, 4)))]
        c = product_projection(zs, 3.0, side)
        assert c.holds()
        assert c.trace >= 1 - len(zs) / 9 - 1e-10


def test_two_sided_random(rng):
    for _ in range(60):
        L = int(rng.integers(2, 5))
        zs = [_rand(rng, 12) for _ in range(L)]
        c = product_projection(zs, 3.0, "two_sided", split=int(rng.integers(0, L + 1)))
        assert c.holds() and c.trace >= 1 - L / 9 - 1e-10


def test_certificate_json(rng):
    c = cheb_projection(_rand(rng, 4), 2.0)
    assert "p" not in c.to_json() and "p" in c.to_json(include_matrix=True)
