"""Volumes of Schatten balls in ``M_k(C)`` and the constants around them.

``M_k(C)`` is identified with ``R^{2k^2}`` through ``<x, y> = Re Tr(y* x)``.
Everything is evaluated in log-domain with ``gammaln``. Singular values in
this module are listed in nondecreasing order; :mod:`freedim.spectral` uses
the opposite order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .repn import norm2, rng_stream

__all__ = [
    "VolumeConstants", "unit_ball_log_volume", "log_ck", "schatten2_ball_log_volume",
    "lemma_a3_sequence", "wh_tail_check", "e_set_cover_bound", "mc_containment_check",
    "mc_ball_volume", "schatten_ratio_report", "quasi_norm_constant", "ascending_singular_values",
]


def unit_ball_log_volume(d: int) -> float:
    """``log v_d`` with ``v_d = pi^{d/2} / Gamma(d/2 + 1)``.

    Examples
    --------
    >>> bool(np.isclose(unit_ball_log_volume(2), np.log(np.pi)))
    True
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return float(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1))


def log_ck(k: int) -> float:
    """``log c_k`` for ``c_k = (2 pi)^{-k} (prod_{j<=k} 2 j v_{2j})^2``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    j = np.arange(1, k + 1)
    log_v2j = j * math.log(math.pi) - gammaln(j + 1)
    return float(-k * math.log(2 * math.pi) + 2 * np.sum(np.log(2 * j) + log_v2j))


@dataclass(frozen=True)
class VolumeConstants:
    k: int
    log_vk_table: np.ndarray  # log v_j for j = 1..2k^2
    log_ck: float

    @classmethod
    def build(cls, k: int) -> "VolumeConstants":
        d = np.arange(1, 2 * k * k + 1)
        table = 0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1)
        return cls(k, table, log_ck(k))

    def to_json(self) -> dict:
        return {"k": self.k, "log_vk_table": self.log_vk_table.tolist(), "log_ck": self.log_ck}


def schatten2_ball_log_volume(k: int, r: float) -> float:
    """Log-volume of ``{x in M_k : ||x||_2 <= r}`` for the normalized trace.

    The ball is the Euclidean ball of radius ``r sqrt(k)`` in ``R^{2k^2}``,
    so the volume is ``v_{2k^2} (r^2 k)^{k^2}``.
    """
    if k < 1 or r <= 0:
        raise ValueError("need k >= 1 and r > 0")
    return unit_ball_log_volume(2 * k * k) + k * k * math.log(r * r * k)


def lemma_a3_sequence(kmax: int) -> list[tuple[int, float]]:
    """``g(k) = k^-2 (log v_{2k^2} + k^2 log k - log c_k)`` for ``k = 1..kmax``; tends to -1/2."""
    if kmax < 2:
        raise ValueError("kmax must be >= 2")
    return [(k, (unit_ball_log_volume(2 * k * k) + k * k * math.log(k) - log_ck(k)) / (k * k))
            for k in range(1, kmax + 1)]


def ascending_singular_values(z: np.ndarray) -> np.ndarray:
    return np.sort(np.linalg.svd(z, compute_uv=False))


def wh_tail_check(x: np.ndarray, y: np.ndarray, eps: float, d: int | None = None,
                  rank_tol: float = 1e-10) -> dict:
    """Tail bound for ``z = x + y`` with ``rank x <= d`` and ``||y||_2 < eps``.

    The smallest ``k - d`` singular values of ``z`` have unnormalized
    ``l^2`` norm at most ``eps sqrt(k)``.
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    k = x.shape[0]
    if norm2(y) >= eps:
        raise ValueError(f"precondition failed: ||y||_2 = {norm2(y):.6g} >= eps")
    sx = np.linalg.svd(x, compute_uv=False)
    rank = int(np.count_nonzero(sx > rank_tol * max(1.0, sx[0] if sx.size else 0.0)))
    if d is None:
        d = rank
    elif rank > d:
        raise ValueError(f"precondition failed: rank {rank} > d = {d}")
    s = ascending_singular_values(x + y)
    tail = float(np.linalg.norm(s[:k - d]))
    bound = eps * math.sqrt(k)
    return {"k": k, "d": d, "tail": tail, "bound": bound, "slack": bound - tail,
            "holds": bool(tail <= bound)}


def quasi_norm_constant(p: float) -> float:
    """``Q_p = 2^{1/p - 1}``, the quasi-triangle constant of the Schatten ``p``-quasinorm."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    return 2.0 ** (1 / p - 1)


def _schatten_tr(s: np.ndarray, p: float) -> float:
    return float(np.mean(s ** p) ** (1 / p))


def e_set_cover_bound(r: float, p: float, k: int, delta: float, eps: float, D_p: float) -> dict:
    """``log`` of ``(D_p (r+1)^2 / eps)^{8 sqrt(delta) k^2}``, with base and exponent."""
    if not 0 < p < 1 or not 0 < delta < 0.5 or not 0 < eps < 1 or r <= 0 or k < 1 or D_p <= 0:
        raise ValueError("parameters out of range")
    base = D_p * (r + 1) ** 2 / eps
    expo = 8 * math.sqrt(delta) * k * k
    return {"base": base, "exponent": expo, "log_bound": expo * math.log(base)}


def _random_rank_d(k: int, d: int, r: float, p: float, rng) -> np.ndarray:
    """Rank ``<= d`` matrix scaled to ``||x||_{tr,p} = r u`` with ``u`` uniform in (0, 1]."""
    if d == 0:
        return np.zeros((k, k), dtype=complex)
    a = rng.standard_normal((k, d)) + 1j * rng.standard_normal((k, d))
    b = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    x = a @ b
    s = np.linalg.svd(x, compute_uv=False)
    return x * (r * rng.uniform(1e-3, 1.0) / _schatten_tr(s, p))


def mc_containment_check(r: float, p: float, k: int, d: int, eps: float, samples: int,
                         seed: int = 0) -> dict:
    """Sample ``z = x + y`` near ``E(r, p, k, d)`` and test both D-set conditions.

    ``x`` has rank ``<= d`` and ``||x||_{tr,p} <= r``; ``||y||_2 < eps``.
    The conditions are ``||s(z)_{1..k-d}||_{l^2} <= eps sqrt(k)`` and
    ``||s(z)||_{l^p} <= Q_p (r + eps) k^{1/p}``.
    """
    if k > 16:
        raise ValueError("k is limited to 16")
    if not 0 < p < 1 or eps <= 0 or r <= 0 or not 0 <= d <= k:
        raise ValueError("parameters out of range")
    rng = rng_stream(seed, 0)
    Q = quasi_norm_constant(p)
    tail_bound = eps * math.sqrt(k)
    lp_bound = Q * (r + eps) * k ** (1 / p)
    tail_viol = lp_viol = 0
    worst_tail = worst_lp = 0.0
    for _ in range(samples):
        x = _random_rank_d(k, d, r, p, rng)
        g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        y = g * (eps * rng.uniform(0, 1) / norm2(g))
        s = ascending_singular_values(x + y)
        tail = float(np.linalg.norm(s[:k - d]))
        lp = float(np.sum(s ** p) ** (1 / p))
        worst_tail = max(worst_tail, tail / tail_bound)
        worst_lp = max(worst_lp, lp / lp_bound)
        tail_viol += tail > tail_bound
        lp_viol += lp > lp_bound
    return {"samples": samples, "k": k, "p": p, "d": d, "eps": eps, "r": r, "Q_p": Q,
            "tail_violations": int(tail_viol), "lp_violations": int(lp_viol),
            "worst_tail_ratio": worst_tail, "worst_lp_ratio": worst_lp,
            "holds": bool(tail_viol == 0 and lp_viol == 0)}


def mc_ball_volume(k: int, r: float = 1.0, p: float = 2.0, samples: int = 10 ** 6,
                   seed: int = 0, batch: int = 200_000) -> dict:
    """Monte Carlo volume of ``{x in M_k : ||x||_{tr,p} <= r}``.

    Points are drawn uniformly from a cube containing the ball; the report
    carries the estimate, its standard error and (for ``p = 2``) the
    z-score against :func:`schatten2_ball_log_volume`.
    """
    if k < 1 or r <= 0 or p <= 0:
        raise ValueError("need k >= 1, r > 0, p > 0")
    dim = 2 * k * k
    # every entry is bounded by the largest singular value, at most r k^{1/p}
    half = r * math.sqrt(k) if p >= 2 else r * k ** (1 / p)
    rng = rng_stream(seed, 0)
    hits = 0
    left = samples
    while left > 0:
        m = min(batch, left)
        left -= m
        v = rng.uniform(-half, half, (m, dim))
        z = v[:, : k * k] + 1j * v[:, k * k:]
        if p == 2:
            inside = np.sum(v * v, axis=1) <= r * r * k
        else:
            s = np.linalg.svd(z.reshape(m, k, k), compute_uv=False)
            inside = np.mean(s ** p, axis=1) <= r ** p
        hits += int(np.count_nonzero(inside))
    frac = hits / samples
    cube = (2 * half) ** dim
    est = frac * cube
    se = math.sqrt(frac * (1 - frac) / samples) * cube
    out = {"k": k, "r": r, "p": p, "samples": samples, "estimate": est, "stderr": se}
    if p == 2:
        exact = math.exp(schatten2_ball_log_volume(k, r))
        out.update(exact=exact, z_score=(est - exact) / se if se > 0 else math.inf)
    return out


def schatten_ratio_report(k: int, p: float, C_p2: float | None = None, samples: int = 10 ** 5,
                          seed: int = 0) -> dict:
    """Empirical ``vol(B_{tr,p,1}) / vol(B_{tr,2,1})`` and the implied per-dimension constant.

    ``implied_constant = ratio^{1/(2k^2)}`` is the smallest ``C`` that makes
    ``vol_p <= C^{2k^2} vol_2`` on this instance. When ``C_p2`` is supplied,
    the comparison with it is reported; nothing is asserted.
    """
    mc = mc_ball_volume(k, 1.0, p, samples, seed)
    vol2 = math.exp(schatten2_ball_log_volume(k, 1.0))
    ratio = mc["estimate"] / vol2
    out = {"k": k, "p": p, "vol_p": mc["estimate"], "vol_p_stderr": mc["stderr"], "vol_2": vol2,
           "ratio": ratio, "implied_constant": ratio ** (1 / (2 * k * k)) if ratio > 0 else 0.0,
           "note": "report only; the constant is a free parameter"}
    if C_p2 is not None:
        out["C_p2"] = C_p2
        out["within_supplied_constant"] = bool(ratio <= C_p2 ** (2 * k * k))
    return out
