"""Covering and packing numbers, bindings and fringes.

Conventions
-----------
* Balls are open: a center ``c`` covers ``x`` iff ``d(c, x) < eps``.
* A set is ``eps``-separated iff distinct members satisfy ``d >= eps``.
* Exact covering numbers minimize over a fixed candidate family: the cloud
  points, pairwise midpoints, circumcenters of acute triangles (so every
  Chebyshev center of a subset of size at most three is present) and any
  caller-supplied ``extra_centers``. They are exact for that family and
  upper bounds for covers with unrestricted centers.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .ncpoly import Letter, PolyTuple, stats
from .derivation import raw_deriv
from .projections import meet, ntrace, product_projection
from .repn import MatrixTuple, adjoint_map, eval_tuple, realify, real_derivative, rng_stream

__all__ = [
    "PointCloud", "CoveringReport", "Binding", "kcover", "min_cover", "spack",
    "max_packing", "verify_chain", "sumset_verify", "rogers_bound", "lemma42_verify",
    "build_binding", "fringe_cover_bound", "dim_fit", "geometric_grid", "EXACT_LIMIT",
]

EXACT_LIMIT = 24
_METRICS = ("l2", "l2_normalized", "operator_norm")


# ------------------------------------------------------------------ clouds

@dataclass(frozen=True)
class PointCloud:
    """Finite set of real vectors with a metric.

    Matrix tuples are flattened coordinate by coordinate as
    ``[Re vec(x_j); Im vec(x_j)]`` (row-major ``vec``), the same layout as
    :func:`~freedim.repn.real_derivative`. ``l2_normalized`` then equals the
    normalized-trace norm ``(sum_j tr_k |x_j|^2)^{1/2}``.
    """

    points: np.ndarray
    metric: str = "l2"
    shape: tuple | None = None  # (n, k) for flattened matrix tuples

    def __post_init__(self):
        P = np.asarray(self.points, dtype=float)
        if P.ndim == 1:
            P = P[:, None]
        if P.ndim != 2 or P.shape[0] == 0:
            raise ValueError("expected a nonempty (N, d) array")
        if not np.all(np.isfinite(P)):
            raise ValueError("non-finite coordinates")
        if self.metric not in _METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.metric != "l2":
            if self.shape is None:
                raise ValueError(f"metric {self.metric!r} needs the (n, k) shape")
            n, k = self.shape
            if P.shape[1] != 2 * n * k * k:
                raise ValueError("dimension does not match shape")
        P = P.copy()
        P.setflags(write=False)
        object.__setattr__(self, "points", P)

    @classmethod
    def from_tuples(cls, tuples: Sequence[MatrixTuple], metric: str = "l2_normalized"):
        n, k = tuples[0].n, tuples[0].k
        return cls(np.array([flatten_tuple(t) for t in tuples]), metric, (n, k))

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def like(self, points: np.ndarray) -> "PointCloud":
        return PointCloud(points, self.metric, self.shape)

    def norms(self, V: np.ndarray) -> np.ndarray:
        """Norm of each row of ``V`` (any leading shape)."""
        V = np.asarray(V, dtype=float)
        if self.metric == "l2":
            return np.linalg.norm(V, axis=-1)
        n, k = self.shape
        if self.metric == "l2_normalized":
            return np.linalg.norm(V, axis=-1) / math.sqrt(k)
        lead = V.shape[:-1]
        Z = V.reshape(lead + (n, 2, k, k))
        M = Z[..., 0, :, :] + 1j * Z[..., 1, :, :]
        return np.linalg.norm(M, ord=2, axis=(-2, -1)).max(axis=-1)

    def cdist(self, A: np.ndarray, B: np.ndarray | None = None) -> np.ndarray:
        B = A if B is None else B
        return self.norms(np.asarray(A)[:, None, :] - np.asarray(B)[None, :, :])


def flatten_tuple(t: MatrixTuple) -> np.ndarray:
    m = t.mats.reshape(t.n, -1)
    return np.concatenate([np.concatenate([r.real, r.imag]) for r in m])


def unflatten_tuple(v: np.ndarray, n: int, k: int) -> MatrixTuple:
    Z = np.asarray(v, dtype=float).reshape(n, 2, k, k)
    return MatrixTuple(Z[:, 0] + 1j * Z[:, 1])


# --------------------------------------------------------------- candidates

def _circumcenter(a, b, c):
    u, v = b - a, c - a
    G = np.array([[u @ u, u @ v], [u @ v, v @ v]])
    det = G[0, 0] * G[1, 1] - G[0, 1] ** 2
    if det <= 1e-12 * max(G[0, 0] * G[1, 1], 1e-300):
        return None
    al, be = np.linalg.solve(2 * G, [G[0, 0], G[1, 1]])
    # inside the triangle iff acute; otherwise the longest-side midpoint is the Chebyshev center
    if al <= 0 or be <= 0 or al + be >= 1:
        return None
    return a + al * u + be * v


def candidate_centers(cloud: PointCloud, restricted: bool = False,
                      extra_centers: np.ndarray | None = None) -> np.ndarray:
    P = cloud.points
    out = [P]
    if not restricted:
        N = len(P)
        if N > 1:
            i, j = np.triu_indices(N, 1)
            out.append((P[i] + P[j]) / 2)
        cc = [_circumcenter(P[a], P[b], P[c]) for a, b, c in itertools.combinations(range(N), 3)]
        cc = [x for x in cc if x is not None]
        if cc:
            out.append(np.array(cc))
    if extra_centers is not None and len(extra_centers):
        out.append(np.asarray(extra_centers, dtype=float).reshape(-1, cloud.dim))
    return np.vstack(out)


# ---------------------------------------------------------- cover / packing

def _solve_binary(c, A, lb, ub):
    res = milp(c, constraints=LinearConstraint(A, lb, ub), integrality=np.ones(len(c)),
               bounds=Bounds(0, 1), options={"mip_rel_gap": 0.0})
    if not res.success:
        raise RuntimeError(f"integer program failed: {res.message}")
    return np.round(res.x).astype(bool)


def _check_eps(eps):
    if not eps > 0:
        raise ValueError("eps must be positive")


def min_cover(cloud: PointCloud, eps: float, mode: str = "exact", restricted: bool = False,
              extra_centers: np.ndarray | None = None) -> np.ndarray:
    """Centers of a smallest open ``eps``-cover (exact) or a farthest-point cover (greedy)."""
    _check_eps(eps)
    P = cloud.points
    if mode == "greedy":
        return P[_farthest_point(cloud, eps)]
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    if len(P) > EXACT_LIMIT:
        raise ValueError(f"exact mode is limited to {EXACT_LIMIT} points, got {len(P)}")
    cand = candidate_centers(cloud, restricted, extra_centers)
    cov = cloud.cdist(cand, P) < eps
    # drop candidates whose coverage is contained in another's
    keys = np.packbits(cov, axis=1)
    _, first = np.unique(keys, axis=0, return_index=True)
    cand, cov = cand[first], cov[first]
    size = cov.sum(1)
    order = np.argsort(-size)
    keep = []
    for i in order:
        if size[i] and not (keep and np.any(np.all(cov[keep] >= cov[i], axis=1))):
            keep.append(i)
    cand, cov = cand[keep], cov[keep]
    if len(cand) == 1:
        return cand
    chosen = _solve_binary(np.ones(len(cand)), cov.T.astype(float), 1, np.inf)
    return cand[chosen]


def kcover(cloud: PointCloud, eps: float, mode: str = "exact", restricted: bool = False,
           extra_centers: np.ndarray | None = None) -> int:
    """Covering number ``K_eps``.

    Examples
    --------
    >>> two = PointCloud(np.array([[0.0], [1.0]]))
    >>> kcover(two, 0.6, restricted=True), kcover(two, 0.6)
    (2, 1)
    """
    return len(min_cover(cloud, eps, mode, restricted, extra_centers))


def _farthest_point(cloud: PointCloud, eps: float) -> list[int]:
    P = cloud.points
    chosen = [0]
    d = cloud.norms(P - P[0])
    while d.max() >= eps:
        i = int(np.argmax(d))
        chosen.append(i)
        d = np.minimum(d, cloud.norms(P - P[i]))
    return chosen


def max_packing(cloud: PointCloud, eps: float, mode: str = "exact") -> np.ndarray:
    """Indices of a largest ``eps``-separated subset."""
    _check_eps(eps)
    N = len(cloud)
    if mode == "greedy" or (mode == "exact" and N > EXACT_LIMIT):
        # farthest-point centers are pairwise >= eps apart
        return np.array(_farthest_point(cloud, eps))
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    D = cloud.cdist(cloud.points)
    i, j = np.nonzero(np.triu(D < eps, 1))
    if len(i) == 0:
        return np.arange(N)
    A = np.zeros((len(i), N))
    A[np.arange(len(i)), i] = 1
    A[np.arange(len(i)), j] = 1
    return np.nonzero(_solve_binary(-np.ones(N), A, -np.inf, 1))[0]


def spack(cloud: PointCloud, eps: float, mode: str = "exact") -> int:
    """Packing number ``S_eps``: exact up to ``EXACT_LIMIT`` points, greedy lower bound beyond.

    Examples
    --------
    >>> spack(PointCloud(np.array([[0.0], [1.0]])), 0.6)
    2
    """
    return len(max_packing(cloud, eps, mode))


# ------------------------------------------------------ covering arithmetic

def _item(name, lhs, rhs):
    return {"name": name, "lhs": float(lhs), "rhs": float(rhs), "holds": bool(lhs <= rhs),
            "slack": float(rhs - lhs)}


def _fatten(cloud: PointCloud, delta: float, per_point: int, rng) -> PointCloud:
    P = cloud.points
    new = []
    for x in P:
        for _ in range(per_point):
            u = rng.standard_normal(cloud.dim)
            r = delta * rng.uniform(0.05, 0.999)
            new.append(x + u * (r / cloud.norms(u)))
    return cloud.like(np.vstack([P] + ([np.array(new)] if new else [])))


def verify_chain(cloud: PointCloud, eps: float, delta: float | None = None,
                 seed: int = 0) -> dict:
    """Check the monotonicity, union, neighborhood and comparison laws on one instance.

    * subsets: ``K_eps(Y) <= K_eps(X)``, ``S_eps(Y) <= S_eps(X)`` for a random ``Y``
    * unions: ``S_eps(Y u Z) <= S_eps(Y) + S_eps(Z)`` and the same for ``K``
    * scale: ``K_{2eps} <= K_eps``, ``S_{2eps} <= S_eps``
    * neighborhoods: ``S_eps(N_delta X) <= S_{eps-2delta}(X)`` and
      ``K_eps(N_delta X) <= K_{eps-delta}(X)`` on a finite sample of ``N_delta X``
    * comparison: ``K_eps <= S_eps <= K_{eps/2}``

    Covers built for one set are offered as extra candidates for the other
    side so that center-restricted counts obey the same laws.
    """
    _check_eps(eps)
    rng = rng_stream(seed, 0)
    N = len(cloud)
    P = cloud.points
    items = []
    cx = min_cover(cloud, eps)
    K, S, K2 = len(cx), spack(cloud, eps), kcover(cloud, eps / 2)
    items += [_item("K_eps <= S_eps", K, S), _item("S_eps <= K_eps/2", S, K2)]
    items += [_item("K_2eps <= K_eps", kcover(cloud, 2 * eps), K),
              _item("S_2eps <= S_eps", spack(cloud, 2 * eps), S)]
    if N > 1:
        mask = rng.random(N) < 0.5
        mask[rng.integers(N)] = True
        Y = cloud.like(P[mask])
        items += [_item("K_eps(Y) <= K_eps(X)", kcover(Y, eps, extra_centers=cx), K),
                  _item("S_eps(Y) <= S_eps(X)", spack(Y, eps), S)]
        # overlapping split X = Y u Z
        Z = cloud.like(P[~mask | (rng.random(N) < 0.3)]) if np.any(~mask) else Y
        cy, cz = min_cover(Y, eps), min_cover(Z, eps)
        items += [_item("S_eps(Y u Z) <= S_eps(Y) + S_eps(Z)", S, spack(Y, eps) + spack(Z, eps)),
                  _item("K_eps(Y u Z) <= K_eps(Y) + K_eps(Z)",
                        kcover(cloud, eps, extra_centers=np.vstack([cy, cz])), len(cy) + len(cz))]
    delta = eps / 4 if delta is None else delta
    if not 0 < delta < eps / 2:
        raise ValueError("delta must lie in (0, eps/2)")
    per = max(0, (EXACT_LIMIT - N) // N)
    fat = _fatten(cloud, delta, per, rng)
    c_small = min_cover(cloud, eps - delta)
    items += [_item("S_eps(N_delta X) <= S_{eps-2delta}(X)", spack(fat, eps),
                    spack(cloud, eps - 2 * delta)),
              _item("K_eps(N_delta X) <= K_{eps-delta}(X)",
                    kcover(fat, eps, extra_centers=c_small), len(c_small))]
    return {"eps": eps, "delta": delta, "points": N, "items": items,
            "holds": all(it["holds"] for it in items)}


def sumset(clouds: Sequence[PointCloud]) -> PointCloud:
    pts = [sum(c) for c in itertools.product(*[cl.points for cl in clouds])]
    return clouds[0].like(np.unique(np.array(pts), axis=0))


def sumset_verify(clouds: Sequence[PointCloud], eps: float) -> dict:
    """``S_{2n eps}(sum A_i) <= K_{n eps}(sum A_i) <= prod K_eps(A_i) <= prod S_eps(A_i)``.

    Sums of optimal centers of the factors are offered as candidates for the
    sumset cover.
    """
    _check_eps(eps)
    n = len(clouds)
    covers = [min_cover(c, eps) for c in clouds]
    prodK = math.prod(len(c) for c in covers)
    prodS = math.prod(spack(c, eps) for c in clouds)
    tot = sumset(clouds)
    sums = np.array([sum(c) for c in itertools.product(*covers)])
    Kn = kcover(tot, n * eps, extra_centers=sums)
    S2n = spack(tot, 2 * n * eps)
    items = [_item("S_2neps <= K_neps", S2n, Kn), _item("K_neps <= prod K_eps", Kn, prodK),
             _item("prod K_eps <= prod S_eps", prodK, prodS)]
    return {"eps": eps, "n": n, "sumset_size": len(tot), "items": items,
            "holds": all(it["holds"] for it in items)}


def rogers_bound(d: int, eps: float, alpha: float = 1.0, C_r: float = 1.0) -> float:
    """``C_r d^{5/2} (alpha/eps)^d``, the ball covering estimate in ``R^d``.

    The estimate is stated for ``d >= max(alpha/eps, 9)``; outside that range
    a warning is issued and the expression is still returned.

    Examples
    --------
    >>> rogers_bound(16, 0.5)
    67108864.0
    """
    if d <= 0 or eps <= 0 or alpha <= 0 or C_r <= 0:
        raise ValueError("inputs must be positive")
    if d < max(alpha / eps, 9):
        warnings.warn("dimension below max(alpha/eps, 9): bound regime violated", stacklevel=2)
    try:
        return float(C_r * d ** 2.5 * (alpha / eps) ** d)
    except OverflowError:
        return math.inf


# ----------------------------------------------------- Euclidean lemma check

def _as_map(f, k: int | None):
    """Return ``(fun, jac)`` acting on flat real vectors."""
    if isinstance(f, tuple) and len(f) == 2 and callable(f[0]):
        return f
    if isinstance(f, np.ndarray) or (isinstance(f, list) and f and not hasattr(f[0], "terms")):
        A = np.asarray(f, dtype=float)
        return (lambda x: A @ x), (lambda x: A)
    F = PolyTuple(f)
    if k is None:
        raise ValueError("matrix size k is needed for a polynomial map")
    n = F.arity

    def fun(x):
        return flatten_tuple(eval_tuple(F, unflatten_tuple(x, n, k)))

    def jac(x):
        return real_derivative(F, unflatten_tuple(x, n, k))
    return fun, jac


def lemma42_verify(E: PointCloud, f, x0: np.ndarray, Q: np.ndarray, beta: float, t: float,
                   eps: float, k: int | None = None, hull_samples: int = 200,
                   seed: int = 0) -> dict:
    """Check ``K_eps(E) <= K_{(1-t)eps}(A(E)) S_{beta eps/4}(f(E))`` with ``A(x) = Q^perp(x - x0)``.

    ``f`` is a matrix (linear map), a ``(fun, jac)`` pair, or a polynomial
    tuple evaluated at ``k x k`` matrices. Distances are Euclidean on the
    flat coordinates. The hypotheses are measured first; if one fails the
    report has ``status="hypothesis_failed"`` and no verdict.
    """
    _check_eps(eps)
    if E.metric != "l2":
        E = PointCloud(E.points, "l2")
    fun, jac = _as_map(f, k)
    x0 = np.asarray(x0, dtype=float)
    Q = np.asarray(Q, dtype=float)
    d = E.dim
    D0 = np.atleast_2d(jac(x0))
    hyp = {}
    hyp["Q_projection"] = float(max(np.abs(Q @ Q - Q).max(), np.abs(Q - Q.T).max()))
    w, V = np.linalg.eigh((Q + Q.T) / 2)
    basis = V[:, w > 0.5]
    lower = float(np.linalg.svd(D0 @ basis, compute_uv=False).min()) if basis.shape[1] else np.inf
    hyp["lower_bound_on_range"] = lower
    normD = float(np.linalg.norm(D0, 2))
    t_lo = 1 - beta / (8 * (normD + 1))
    hyp["t_interval"] = [t_lo, 1.0]
    # derivative oscillation over the hull of E
    rng = rng_stream(seed, 1)
    P = E.points
    W = rng.dirichlet(np.ones(len(P)), size=hull_samples) if len(P) > 1 else np.ones((1, 1))
    probes = np.vstack([P, W @ P])
    osc = max(float(np.linalg.norm(np.atleast_2d(jac(x)) - D0, 2)) for x in probes)
    hyp["oscillation"] = osc
    ok = (hyp["Q_projection"] < 1e-10 and 0 < beta < 1 and lower >= beta * (1 - 1e-12)
          and t_lo < t < 1 and osc < beta / 4)
    report = {"hypotheses": hyp, "beta": beta, "t": t, "eps": eps,
              "x0_in_E": bool(np.min(np.linalg.norm(P - x0, axis=1)) < 1e-12)}
    if not ok or not report["x0_in_E"]:
        report.update(status="hypothesis_failed", holds=None)
        return report
    Qp = np.eye(d) - Q
    AE = PointCloud((P - x0) @ Qp.T)
    fE = PointCloud(np.array([np.atleast_1d(fun(x)) for x in P]))
    lhs = kcover(E, eps)
    kA = kcover(AE, (1 - t) * eps)
    sF = spack(fE, beta * eps / 4)
    report.update(status="checked", lhs=lhs, K_projected=kA, S_image=sF, rhs=kA * sF,
                  holds=bool(lhs <= kA * sF))
    return report


# ------------------------------------------------------------------ binding

def _letter_mat(l: Letter, X: np.ndarray) -> np.ndarray:
    m = X[l.gen - 1]
    return m.conj().T if l.starred else m


def _expansions(word, X, H):
    """All ways to replace each letter of ``word`` by its ``X`` or ``H`` value.

    Yields ``(mats, n_H)`` with the list of letter matrices in order.
    """
    if not word:
        yield [], 0
        return
    for choice in itertools.product((0, 1), repeat=len(word)):
        mats = [_letter_mat(l, H if c else X) for l, c in zip(word, choice)]
        yield mats, sum(choice)


@dataclass
class _Summand:
    out: int
    var: int
    coef: complex
    left: list
    right: list
    starred: bool

    def apply(self, eta: np.ndarray) -> np.ndarray:
        m = eta.conj().T if self.starred else eta
        for a in reversed(self.left):
            m = a @ m
        for b in self.right:
            m = m @ b
        return self.coef * m


def _perturbation_terms(F: PolyTuple, X: np.ndarray, H: np.ndarray, integrated: bool):
    """Summands of ``T - DF(X)`` with ``T = int_0^1 DF(X + tH) dt`` or ``T = DF(X + H)``.

    Every letter of each prefix and suffix is expanded into its ``X`` or
    ``H`` value; a summand with ``n`` letters drawn from ``H`` carries the
    factor ``1/(n+1)`` when integrated.
    """
    out = []
    for i, f in enumerate(F):
        for j in range(F.arity):
            for (w, v, d), c in raw_deriv(f, j + 1).terms.items():
                for lm, nl in _expansions(w, X, H):
                    for rm, nr in _expansions(v, X, H):
                        nh = nl + nr
                        if nh == 0:
                            continue
                        coef = c / (nh + 1) if integrated else c
                        out.append(_Summand(i, j, coef, lm, rm, bool(d)))
    return out


def _real_operator(terms, p: int, n: int, k: int) -> np.ndarray:
    m = 2 * k * k
    out = np.zeros((p * m, n * m))
    Jr = adjoint_map(k)
    for s in terms:
        a = np.eye(k, dtype=complex)
        for x in s.left:
            a = a @ x
        b = np.eye(k, dtype=complex)
        for y in s.right:
            b = b @ y
        blk = realify(s.coef * np.kron(a, b.T))
        if s.starred:
            blk = blk @ Jr
        out[s.out * m:(s.out + 1) * m, s.var * m:(s.var + 1) * m] += blk
    return out


def _compress_real(e: np.ndarray, n: int) -> np.ndarray:
    """Real matrix of ``xi -> (e xi_1 e, ..., e xi_n e)``."""
    blk = realify(np.kron(e, e.T))
    return np.kron(np.eye(n), blk)


def _theta(terms, C: float, k: int) -> tuple[np.ndarray, list]:
    e = np.eye(k, dtype=complex)
    traces = []
    for s in terms:
        cert = product_projection(s.left + s.right, C, "two_sided", split=len(s.left))
        traces.append(cert.trace)
        e = meet(e, cert.p)
    return e, traces


@dataclass
class Binding:
    """Projections assigned to sampled distance operators.

    ``epsilon`` is the largest achieved ``||(S - focus) Theta(S)||``.
    """

    focus: np.ndarray
    assignments: list
    epsilon: float
    report: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "focus_shape": list(self.focus.shape),
                "pairs": [{k: v for k, v in a.items() if k != "projection"}
                          for a in self.assignments], **self.report}


def binding_constant_B(F: PolyTuple) -> float:
    c, _ = stats(F)
    n, p = F.arity, len(F)
    return 2 * n * p * c ** 2 * (2 * n) ** (2 * c)


def _ball_point(center: np.ndarray, radius: float, rng) -> np.ndarray:
    g = rng.standard_normal(center.shape) + 1j * rng.standard_normal(center.shape)
    k = center.shape[-1]
    nrm = np.sqrt(np.sum(np.abs(g) ** 2) / k)
    return center + g * (radius * rng.uniform(0, 1) / nrm)


def build_binding(F, xi0: MatrixTuple, rho: float, R: float = 2.0, sample_pairs: int = 50,
                  seed: int = 0, fringe_samples: int = 2, rank_tol: float = 1e-8) -> Binding:
    """Binding of sampled distance operators on ``B_2(xi0, rho)`` focused on ``DF(xi0)``.

    For each pair ``(x, y)`` the distance operator ``T`` is expanded
    symbolically around ``x``. Each summand of ``T - DF(x)`` and of
    ``DF(x) - DF(xi0)`` gets a two-sided product projection with
    ``C = rho^{-1/(4 deg F)}``; ``Theta(T)`` compresses every coordinate by
    the meet ``e`` of all of them.

    The report records, per pair, the achieved constant, ``tr e``, the
    mean-value residual ``||T(y - x) - (F(y) - F(x))||``, the residual
    identity of the fringe decomposition and ranks of fringe summands.
    """
    F = PolyTuple(F)
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if R <= 1:
        raise ValueError("R must exceed 1")
    k, n, p = xi0.k, F.arity, len(F)
    X0 = xi0.mats
    norms = [float(np.sqrt(np.sum(np.abs(x) ** 2) / k)) for x in X0]
    violations = []
    if max(norms) >= R:
        violations.append(f"center coordinate norm {max(norms):.4g} >= R")
    c, deg = stats(F)
    B = binding_constant_B(F)
    bound = B * R ** deg * math.sqrt(rho)
    trace_bound = 1 - B * rho ** (1 / B)
    C = rho ** (-1 / (4 * max(deg, 1)))
    focus = real_derivative(F, xi0)
    rng = rng_stream(seed, 0)
    assignments = []
    mv_max = 0.0
    ident_max = 0.0
    rank_ok = True
    for pair in range(sample_pairs):
        x = np.array([_ball_point(X0[j], rho / math.sqrt(n), rng) for j in range(n)])
        y = np.array([_ball_point(X0[j], rho / math.sqrt(n), rng) for j in range(n)])
        H = y - x
        t_terms = _perturbation_terms(F, x, H, integrated=True)
        q_terms = _perturbation_terms(F, X0, x - X0, integrated=False)
        Dx = real_derivative(F, MatrixTuple(x))
        T = Dx + _real_operator(t_terms, p, n, k)
        e_p, tr_p = _theta(t_terms, C, k)
        e_q, tr_q = _theta(q_terms, C, k)
        e = meet(e_p, e_q)
        Pe = _compress_real(e, n)
        achieved = float(np.linalg.norm((T - focus) @ Pe, 2))
        xv, yv = flatten_tuple(MatrixTuple(x)), flatten_tuple(MatrixTuple(y))
        Fx = flatten_tuple(eval_tuple(F, MatrixTuple(x)))
        Fy = flatten_tuple(eval_tuple(F, MatrixTuple(y)))
        scale = math.sqrt(k)
        mv = float(np.linalg.norm(T @ (yv - xv) - (Fy - Fx)) / scale)
        # f(y) - f(x) - focus(y-x) - A(y-x) equals the fringe point (S - focus) Theta^perp (y-x)
        A = (T - focus) @ Pe
        Pperp = np.eye(Pe.shape[0]) - Pe
        lhs = Fy - Fx - focus @ (yv - xv) - A @ (yv - xv)
        ident = float(np.linalg.norm(lhs - (T - focus) @ Pperp @ (yv - xv)) / scale)
        mv_max, ident_max = max(mv_max, mv), max(ident_max, ident)
        # ranks of fringe summands: each one carries a single eta = xi - e xi e
        eta_cap = 2 * k * (1 - ntrace(e))
        worst_summand = 0
        worst_total = 0.0
        for _ in range(fringe_samples):
            xi = np.array([_ball_point(np.zeros((k, k)), R, rng) for _ in range(n)])
            eta = xi - e[None] @ xi @ e[None]
            summands = t_terms + q_terms
            parts = np.zeros((p, k, k), dtype=complex)
            for s in summands:
                piece = s.apply(eta[s.var])
                parts[s.out] += piece
                worst_summand = max(worst_summand, _rank(piece, rank_tol))
            direct = (T - focus) @ Pperp @ flatten_tuple(MatrixTuple(xi))
            ident = float(np.linalg.norm(flatten_tuple(MatrixTuple(parts)) - direct) / scale)
            ident_max = max(ident_max, ident)
            counts = [sum(1 for s in summands if s.out == i) for i in range(p)]
            for i in range(p):
                r = _rank(parts[i], rank_tol)
                worst_total = max(worst_total, r / max(1, counts[i] * eta_cap) if eta_cap else r)
        rank_ok &= worst_summand <= eta_cap + 1e-9 and worst_total <= 1 + 1e-9
        assignments.append({"pair": pair, "achieved": achieved, "trace": ntrace(e),
                            "trace_p": ntrace(e_p), "trace_q": ntrace(e_q),
                            "min_term_trace": min(tr_p + tr_q, default=1.0),
                            "terms": len(t_terms) + len(q_terms),
                            "mean_value_residual": mv, "fringe_rank_cap": eta_cap,
                            "max_summand_rank": worst_summand, "projection": e,
                            "margin": bound - achieved})
    eps_achieved = max((a["achieved"] for a in assignments), default=0.0)
    min_trace = min((a["trace"] for a in assignments), default=1.0)
    report = {"B": B, "c": c, "deg": deg, "R": R, "rho": rho, "C": C, "bound": bound,
              "eps_achieved": eps_achieved, "trace_bound": trace_bound, "min_trace": min_trace,
              "mean_value_residual": mv_max, "fringe_identity_residual": ident_max,
              "fringe_ranks_ok": bool(rank_ok), "violations": violations,
              "holds": bool(eps_achieved <= bound and min_trace >= trace_bound
                            and mv_max < 1e-9 and ident_max < 1e-9 and rank_ok
                            and not violations)}
    return Binding(focus, assignments, eps_achieved, report)


def _rank(m: np.ndarray, tol: float) -> int:
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.count_nonzero(s > tol * max(1.0, s[0] if s.size else 0.0)))


def fringe_cover_bound(B: float, R: float, rho: float, p: int, eps: float, D: float) -> dict:
    """Fringe entropy bound: ``base^(coefficient k^2)``.

    ``base = D (B R^B + 1)^2 sqrt(p) / eps`` and
    ``coefficient = 16 B^3 rho^{1/(2B)}``; ``log_per_k2`` is their log-product.

    Examples
    --------
    >>> r = fringe_cover_bound(1, 1, 0.01, 1, 0.5, 1)
    >>> r["base"], round(r["coefficient"], 12)
    (8.0, 1.6)
    """
    if B <= 0 or R <= 1 - 1e-15 or not 0 < rho < 1 or p < 1 or not 0 < eps < 1 or D <= 0:
        raise ValueError("parameters out of range")
    base = D * (B * R ** B + 1) ** 2 * math.sqrt(p) / eps
    coef = 16 * B ** 3 * rho ** (1 / (2 * B))
    return {"base": float(base), "coefficient": float(coef),
            "log_per_k2": float(coef * math.log(base))}


# -------------------------------------------------------------- dimension fit

def geometric_grid(eps0: float = 0.2, levels: int = 3) -> np.ndarray:
    return eps0 * 2.0 ** -np.arange(levels)


@dataclass
class CoveringReport:
    grid: list
    K: list
    S: list
    slope: float
    intercept: float
    residuals: list
    mode: str
    label: str = "empirical, not a delta_0 estimator"

    def to_json(self) -> dict:
        return dict(self.__dict__)

    def to_csv(self) -> str:
        rows = ["eps,K,S"] + [f"{e!r},{k},{s}" for e, k, s in zip(self.grid, self.K, self.S)]
        return "\n".join(rows)


def dim_fit(cloud: PointCloud, grid: Sequence[float] | None = None, mode: str | None = None,
            eps0: float = 0.2, levels: int = 3) -> CoveringReport:
    """Least-squares slope of ``log K_eps`` against ``|log eps|``.

    ``mode`` defaults to exact for small clouds and greedy otherwise; greedy
    farthest-point centers are separated, so they bound ``K`` above and ``S``
    below with the same count.
    """
    grid = geometric_grid(eps0, levels) if grid is None else np.asarray(grid, dtype=float)
    if len(grid) < 3:
        raise ValueError("need at least three grid points")
    if len(np.unique(grid)) != len(grid) or np.any(grid <= 0):
        raise ValueError("grid values must be distinct and positive")
    mode = mode or ("exact" if len(cloud) <= EXACT_LIMIT else "greedy")
    K = [kcover(cloud, e, mode) for e in grid]
    S = [spack(cloud, e, mode) for e in grid]
    xs = np.abs(np.log(grid))
    ys = np.log(K)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    return CoveringReport(list(map(float, grid)), K, S, float(slope), float(intercept),
                          resid.tolist(), mode)
