"""Singular-value statistics of evaluated derivatives.

Measures are normalized by the column count: a ``(rows x cols)`` matrix
gives ``cols`` values (zeros padded when ``rows < cols``), each with mass
``1/cols``. This is the spectral distribution of ``|A| = (A* A)^{1/2}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "SpectralMeasure", "DecayReport", "svd_measure", "nullity_rank", "fkl_det",
    "decay_diagnostic", "weyl_check", "counting_function", "window_check",
    "DEFAULT_REL_TAU",
]

DEFAULT_REL_TAU = 1e-10


@dataclass(frozen=True)
class SpectralMeasure:
    """Descending singular values of ``|A|``.

    Attributes
    ----------
    values : ndarray
        Nonincreasing, nonnegative, length ``ambient_dim``.
    ambient_dim : int
        Number of atoms (columns of the source matrix).
    norm_unit : int
        ``k^2``, the size of one ``M_k (x) M_k^op`` block.
    """

    values: np.ndarray
    ambient_dim: int
    norm_unit: int = 1

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float))[::-1]
        if v.size and v[-1] < 0:
            raise ValueError("singular values must be nonnegative")
        object.__setattr__(self, "values", v)

    @property
    def blocks(self) -> float:
        """Number of ``k^2``-blocks, the ``n`` in ``[0, n]`` nullity ranges."""
        return self.ambient_dim / self.norm_unit

    def default_tau(self) -> float:
        return DEFAULT_REL_TAU * (self.values[0] if self.values.size else 0.0)

    def mass(self, lo: float, hi: float, closed_lo=True, closed_hi=True) -> float:
        v = self.values
        a = v >= lo if closed_lo else v > lo
        b = v <= hi if closed_hi else v < hi
        return float(np.count_nonzero(a & b)) / self.ambient_dim

    def to_json(self) -> dict:
        return {"ambient_dim": self.ambient_dim, "norm_unit": self.norm_unit,
                "values": self.values.tolist()}

    def to_csv(self) -> str:
        return "index,value\n" + "\n".join(f"{i},{float(x)!r}" for i, x in enumerate(self.values))


def svd_measure(A, norm_unit: int | None = None) -> SpectralMeasure:
    """Full singular value spectrum of ``A`` as a measure on ``cols`` atoms.

    ``A`` may be an ndarray or anything exposing ``data``/``normalization``.
    """
    if hasattr(A, "normalization"):
        norm_unit = norm_unit or A.normalization ** 2
        A = A.data
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError("expected a matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("non-finite entries")
    try:
        s = np.linalg.svd(A, compute_uv=False) if A.size else np.zeros(0)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"SVD did not converge: {exc}") from exc
    cols = A.shape[1]
    if s.size < cols:
        s = np.concatenate([s, np.zeros(cols - s.size)])
    return SpectralMeasure(s, cols, norm_unit or 1)


def nullity_rank(sm: SpectralMeasure, tau: float | None = None, scale: float | None = None):
    """Normalized nullity and rank.

    Parameters
    ----------
    tau : float, optional
        Kernel threshold; default ``1e-10 * max value``.
    scale : float, optional
        Output range ``[0, scale]``. Defaults to the number of ``k^2`` blocks,
        which is ``2n`` for the two-by-two calculus and ``n`` for the plain one.

    Returns
    -------
    nullity, rank, gap
        ``gap`` is the smallest value above ``tau`` divided by ``tau``.
    """
    if tau is None:
        tau = sm.default_tau()
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if scale is None:
        scale = sm.blocks
    nz = int(np.count_nonzero(sm.values <= tau))
    nullity = scale * nz / sm.ambient_dim
    above = sm.values[sm.values > tau]
    if above.size == 0:
        gap = np.inf
    elif tau == 0:
        gap = np.inf
    else:
        gap = float(above.min() / tau)
    return nullity, scale - nullity, gap


def kernel_count(sm: SpectralMeasure, tau: float | None = None) -> int:
    if tau is None:
        tau = sm.default_tau()
    return int(np.count_nonzero(sm.values <= tau))


__all__.append("kernel_count")


def fkl_det(sm: SpectralMeasure, tau: float | None = None) -> float:
    """Fuglede-Kadison-Luck determinant ``exp(int_{(tau, inf)} log t dmu)``.

    Returns 0 when every value is at most ``tau``.
    """
    if tau is None:
        tau = 0.0
    v = sm.values[sm.values > tau]
    if v.size == 0:
        return 0.0
    return float(np.exp(np.sum(np.log(v)) / sm.ambient_dim))


def counting_function(values: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``#{values <= t}`` for each entry of ``t``."""
    s = np.sort(np.asarray(values))
    return np.searchsorted(s, np.asarray(t), side="right")


@dataclass
class DecayReport:
    eps0: float
    tau: float
    tail_sums: list
    log_integral: float
    zero_mass: float
    per_k: list = field(default_factory=list)
    note: str = ("finite-size spectra always decay; compare trends across k, "
                 "no verdict is implied")

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _decay_one(sm: SpectralMeasure, eps0: float, tau: float, nmax: int):
    v = sm.values
    live = v[v > tau]
    tails = []
    acc = 0.0
    for n in range(1, nmax + 1):
        acc += np.count_nonzero(live < eps0 ** n) / sm.ambient_dim
        tails.append(acc)
    logint = float(np.sum(np.abs(np.log(live))) / sm.ambient_dim) if live.size else 0.0
    zero = float(np.count_nonzero(v <= tau)) / sm.ambient_dim
    return tails, logint, zero


def decay_diagnostic(sm, eps0: float = 0.5, tau: float | None = None, nmax: int = 40,
                     ks: Sequence[int] | None = None) -> DecayReport:
    """Partial sums ``S_N = sum_{n<=N} mu((tau, eps0^n))`` and the log-integral.

    ``sm`` may be one measure or a sequence over increasing ``k`` (with the
    matching ``ks``); then the per-k rows are filled so trends can be read.
    """
    if not 0 < eps0 < 1:
        raise ValueError("eps0 must lie in (0, 1)")
    family = list(sm) if isinstance(sm, (list, tuple)) else [sm]
    rows = []
    for i, m in enumerate(family):
        t = m.default_tau() if tau is None else tau
        tails, logint, zero = _decay_one(m, eps0, t, nmax)
        rows.append({"k": None if ks is None else ks[i], "tau": t, "tail_sums": tails,
                     "log_integral": logint, "zero_mass": zero})
    last = rows[-1]
    return DecayReport(eps0, last["tau"], last["tail_sums"], last["log_integral"],
                       last["zero_mass"], rows if len(rows) > 1 else [])


def _psd_eig(A, name: str) -> np.ndarray:
    A = np.asarray(getattr(A, "data", A))
    if not np.allclose(A, A.conj().T, atol=1e-10):
        raise ValueError(f"{name} is not Hermitian")
    return np.linalg.eigvalsh(A)


def weyl_check(A, B, tgrid: np.ndarray | None = None, tol: float = 1e-10) -> dict:
    """Check ``#{eig(A) <= t} >= #{eig(B) <= t}`` for ``0 <= A <= B``.

    The comparison is made with a relative slack ``tol`` on ``t`` so that
    exact ties do not flip on rounding.
    """
    a = _psd_eig(A, "A")
    b = _psd_eig(B, "B")
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if a.min(initial=0) < -tol * scale:
        raise ValueError("A is not positive semidefinite")
    gap = np.linalg.eigvalsh(np.asarray(getattr(B, "data", B)) - np.asarray(getattr(A, "data", A)))
    if gap.min(initial=0) < -tol * scale:
        raise ValueError("B - A is not positive semidefinite")
    if tgrid is None:
        tgrid = np.unique(np.concatenate([a, b, np.linspace(0, b.max(initial=1.0), 64)]))
    ca = counting_function(a, tgrid + tol * scale)
    cb = counting_function(b, tgrid)
    # eigenvalue form: sorted a_i <= b_i
    viol = float(max(0.0, np.max(np.sort(a) - np.sort(b), initial=0.0)))
    return {"holds": bool(np.all(ca >= cb)), "max_violation": viol,
            "count_deficit": int(np.max(cb - ca, initial=0))}


def window_check(S_values, T_values, c: float, tgrid: np.ndarray) -> dict:
    """Check ``#{S <= t} <= #{T <= c t}`` on ``tgrid``."""
    cs = counting_function(S_values, tgrid)
    ct = counting_function(T_values, c * np.asarray(tgrid))
    return {"holds": bool(np.all(cs <= ct)), "worst": int(np.max(cs - ct, initial=0))}
