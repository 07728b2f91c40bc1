"""Evaluation of polynomials and tensor matrices at k x k matrix tuples.

Conventions
-----------
* Matrices are flattened row-major: ``E_pq`` sits at index ``p*k + q``.
* The realification of ``M_k`` uses coordinates ``[Re vec(x); Im vec(x)]``.
  With the unnormalized real inner product ``Re Tr(y* x)`` these coordinates
  are orthonormal.
* A tensor ``w (x) v`` acts on ``M_k`` as ``eta -> w eta v`` and is stored
  as ``kron(w, v.T)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .derivation import TensorElement, TensorMatrix, raw_deriv
from .ncpoly import Polynomial, PolyTuple

__all__ = [
    "MatrixTuple", "BigMatrix", "eval_word", "eval_poly", "eval_tuple",
    "sigma_eval", "assemble", "real_derivative", "phi_embed", "realify",
    "complexify", "adjoint_map", "sample", "conjugation_orbit", "rng_stream",
    "haar_unitary", "norm2", "tuple_norm2",
]


@dataclass(frozen=True)
class MatrixTuple:
    """An ``n``-tuple of ``k x k`` complex matrices, stored as ``(n, k, k)``."""

    mats: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mats, dtype=complex)
        if m.ndim == 2:
            m = m[None]
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise ValueError(f"expected (n, k, k) array, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("non-finite entries")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "mats", m)

    @property
    def n(self) -> int:
        return self.mats.shape[0]

    @property
    def k(self) -> int:
        return self.mats.shape[1]

    def __getitem__(self, j):
        return self.mats[j]

    def __add__(self, other: "MatrixTuple") -> "MatrixTuple":
        return MatrixTuple(self.mats + other.mats)

    def __sub__(self, other: "MatrixTuple") -> "MatrixTuple":
        return MatrixTuple(self.mats - other.mats)

    def scale(self, t: float) -> "MatrixTuple":
        return MatrixTuple(t * self.mats)

    def to_json(self) -> dict:
        return {"k": self.k, "n": self.n,
                "mats": [{"re": m.real.tolist(), "im": m.imag.tolist()} for m in self.mats]}

    @classmethod
    def from_json(cls, obj: dict) -> "MatrixTuple":
        mats = [np.asarray(m["re"]) + 1j * np.asarray(m.get("im", np.zeros_like(m["re"])))
                for m in obj["mats"]]
        out = cls(np.array(mats))
        if "k" in obj and out.k != obj["k"] or "n" in obj and out.n != obj["n"]:
            raise ValueError("declared k/n do not match the matrices")
        return out


@dataclass(frozen=True)
class BigMatrix:
    """Dense complex matrix on ``(M_k)^cols -> (M_k)^rows`` with trace normalization ``k``."""

    data: np.ndarray
    normalization: int

    def __post_init__(self):
        if self.normalization <= 0:
            raise ValueError("normalization must be positive")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "normalization": self.normalization,
                "re": self.data.real.tolist(), "im": self.data.imag.tolist()}


def norm2(x: np.ndarray) -> float:
    """Normalized Hilbert-Schmidt norm ``(tr_k |x|^2)^{1/2}``."""
    x = np.asarray(x)
    return float(np.linalg.norm(x) / np.sqrt(x.shape[-1]))


def tuple_norm2(xi: MatrixTuple | np.ndarray) -> float:
    m = xi.mats if isinstance(xi, MatrixTuple) else np.asarray(xi)
    return float(np.linalg.norm(m) / np.sqrt(m.shape[-1]))


# ------------------------------------------------------------ evaluation

class _WordCache:
    def __init__(self, xi: MatrixTuple):
        self.xi = xi
        self.adj = np.conj(np.transpose(xi.mats, (0, 2, 1)))
        self.memo = {(): np.eye(xi.k, dtype=complex)}

    def __call__(self, w) -> np.ndarray:
        if w in self.memo:
            return self.memo[w]
        head = self(w[:-1])
        l = w[-1]
        if l.gen > self.xi.n:
            raise ValueError(f"X{l.gen} needs a tuple of arity >= {l.gen}, got {self.xi.n}")
        m = self.adj[l.gen - 1] if l.starred else self.xi.mats[l.gen - 1]
        out = head @ m
        self.memo[w] = out
        return out


def eval_word(w, xi: MatrixTuple) -> np.ndarray:
    return _WordCache(xi)(tuple(w))


def _arity_check(arity: int, xi: MatrixTuple):
    if arity != xi.n:
        raise ValueError(f"arity {arity} does not match tuple length {xi.n}")


def eval_poly(p: Polynomial, xi: MatrixTuple, _cache=None) -> np.ndarray:
    """Substitute ``xi_j`` for ``X_j`` and its conjugate transpose for ``X_j'``."""
    _arity_check(p.arity, xi)
    ev = _cache or _WordCache(xi)
    out = np.zeros((xi.k, xi.k), dtype=complex)
    for w, c in p.terms.items():
        out += c * ev(w)
    return out


def eval_tuple(F: Sequence[Polynomial], xi: MatrixTuple) -> MatrixTuple:
    ev = _WordCache(xi)
    return MatrixTuple(np.array([eval_poly(f, xi, ev) for f in F]))


def sigma_eval(t: TensorElement, xi: MatrixTuple, _cache=None) -> BigMatrix:
    """Matrix of ``eta -> sum lam w(xi) eta v(xi)`` on row-major ``vec(eta)``."""
    if not t.is_split():
        raise ValueError("sigma_eval needs a split element (no J flags)")
    ev = _cache or _WordCache(xi)
    k = xi.k
    out = np.zeros((k * k, k * k), dtype=complex)
    for (w, v, _), c in t.terms.items():
        out += c * np.kron(ev(w), ev(v).T)
    return BigMatrix(out, k)


def assemble(TM: TensorMatrix, xi: MatrixTuple) -> BigMatrix:
    """Block matrix of :func:`sigma_eval` over the entries of ``TM``."""
    k2 = xi.k ** 2
    ev = _WordCache(xi)
    out = np.zeros((TM.rows * k2, TM.cols * k2), dtype=complex)
    for i in range(TM.rows):
        for j in range(TM.cols):
            e = TM[i, j]
            if not e.is_zero():
                out[i * k2:(i + 1) * k2, j * k2:(j + 1) * k2] = sigma_eval(e, xi, ev).data
    return BigMatrix(out, xi.k)


# ------------------------------------------------------- real derivative

def realify(C: np.ndarray) -> np.ndarray:
    """Real matrix of a complex-linear map in ``[Re; Im]`` coordinates."""
    return np.block([[C.real, -C.imag], [C.imag, C.real]])


def complexify(R: np.ndarray) -> np.ndarray:
    """``R - i_map R i_map`` read as a complex matrix.

    For a real map that commutes with multiplication by ``i`` this inverts
    :func:`realify` up to a factor two.
    """
    N = R.shape[0] // 2
    A, B = R[:N, :N], R[:N, N:]
    C, D = R[N:, :N], R[N:, N:]
    return (A + D) + 1j * (C - B)


def _transpose_perm(k: int) -> np.ndarray:
    idx = np.arange(k * k).reshape(k, k).T.ravel()
    P = np.zeros((k * k, k * k))
    P[np.arange(k * k), idx] = 1.0
    return P


def adjoint_map(k: int) -> np.ndarray:
    """Real matrix of ``eta -> eta*`` on ``M_k``."""
    P = _transpose_perm(k)
    Z = np.zeros_like(P)
    return np.block([[P, Z], [Z, -P]])


def real_derivative(F: Sequence[Polynomial], xi: MatrixTuple) -> np.ndarray:
    """Real Jacobian of ``F`` at ``xi``, shape ``(2 p k^2, 2 n k^2)``.

    Built from the occurrence expansion of each word: an occurrence of
    ``X_j`` contributes ``h -> prefix h suffix`` and an occurrence of ``X_j'``
    contributes ``h -> prefix h* suffix``.
    """
    F = PolyTuple(F)
    _arity_check(F.arity, xi)
    k = xi.k
    m = 2 * k * k
    ev = _WordCache(xi)
    Jr = adjoint_map(k)
    out = np.zeros((len(F) * m, F.arity * m))
    for i, f in enumerate(F):
        for j in range(F.arity):
            t = raw_deriv(f, j + 1)
            C0 = np.zeros((k * k, k * k), dtype=complex)
            C1 = np.zeros((k * k, k * k), dtype=complex)
            for (w, v, d), c in t.terms.items():
                term = c * np.kron(ev(w), ev(v).T)
                if d:
                    C1 += term
                else:
                    C0 += term
            out[i * m:(i + 1) * m, j * m:(j + 1) * m] = realify(C0) + realify(C1) @ Jr
    return out


def phi_embed(R: np.ndarray, k: int) -> BigMatrix:
    """Two-by-two complex form of a real-linear map between tuples in ``M_k``.

    Each ``2k^2 x 2k^2`` coordinate block is cut by the self-adjoint and
    skew-adjoint projections ``(I +- J)/2`` on both sides, and every corner is
    extended complex-linearly. The output uses the same block layout as
    :func:`assemble` applied to :func:`~freedim.derivation.d_s`.
    """
    R = np.asarray(R, dtype=float)
    m = 2 * k * k
    if R.shape[0] % m or R.shape[1] % m:
        raise ValueError(f"shape {R.shape} is not a multiple of 2k^2 = {m}")
    p, n = R.shape[0] // m, R.shape[1] // m
    Jr = adjoint_map(k)
    E = [(np.eye(m) + Jr) / 2, (np.eye(m) - Jr) / 2]
    k2 = k * k
    out = np.zeros((2 * p * k2, 2 * n * k2), dtype=complex)
    for i in range(p):
        for j in range(n):
            Rij = R[i * m:(i + 1) * m, j * m:(j + 1) * m]
            for a in range(2):
                for b in range(2):
                    r0, c0 = (2 * i + a) * k2, (2 * j + b) * k2
                    out[r0:r0 + k2, c0:c0 + k2] = complexify(E[a] @ Rij @ E[b])
    return BigMatrix(out, k)


# --------------------------------------------------------------- sampling

def rng_stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent PCG64 stream number ``index`` derived from ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def haar_unitary(k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary from the QR factorization of a complex Ginibre matrix."""
    z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _gue(k: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    # entries of g have variance 2, so this gives variance 1/k and spectrum [-2, 2]
    return (g + g.conj().T) / (2 * np.sqrt(k))


def sample(kind: str, k: int, n: int = 1, seed: int = 0, mats=None) -> MatrixTuple:
    """Draw a representation point.

    Parameters
    ----------
    kind : {"haar_unitary", "gue_selfadjoint", "commuting_diagonal", "user"}
    k, n : int
        Matrix size and tuple length.
    seed : int
        Matrix ``j`` is drawn from ``rng_stream(seed, j)``.
    mats : array_like, optional
        Matrices for ``kind="user"``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if kind == "user":
        if mats is None:
            raise ValueError("kind='user' needs mats")
        return MatrixTuple(np.asarray(mats))
    out = []
    for j in range(n):
        rng = rng_stream(seed, j)
        if kind == "haar_unitary":
            out.append(haar_unitary(k, rng))
        elif kind == "gue_selfadjoint":
            out.append(_gue(k, rng))
        elif kind == "commuting_diagonal":
            out.append(np.diag(rng.uniform(0.0, 1.0, k)).astype(complex))
        else:
            raise ValueError(f"unknown sample kind {kind!r}")
    return MatrixTuple(np.array(out))


def conjugation_orbit(xi: MatrixTuple, N: int, seed: int = 0) -> list[MatrixTuple]:
    """``N`` tuples ``U xi U*`` with independent Haar unitaries ``U``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    out = []
    for t in range(N):
        u = haar_unitary(xi.k, rng_stream(seed, t))
        out.append(MatrixTuple(u[None] @ xi.mats @ u.conj().T[None]))
    return out
