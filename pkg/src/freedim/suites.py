"""Named randomized property suites.

Every suite takes ``trials`` and ``seed`` and returns a :class:`SuiteResult`.
Trial ``t`` draws from ``rng_stream(seed, t)`` so single trials can be
replayed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import covering, projections, volumes
from .derivation import TensorElement, d_s, d_sa, d_u, partial_deriv, raw_deriv
from .ncpoly import Polynomial, PolyTuple, parse, random_polynomial, random_word, word_str
from .repn import MatrixTuple, assemble, real_derivative, rng_stream, sample
from .spectral import kernel_count, svd_measure, window_check

__all__ = ["SuiteResult", "SUITES", "run_suite", "run_all", "ginibre_tuple"]


@dataclass
class SuiteResult:
    name: str
    holds: bool
    verdict: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {"name": self.name, "holds": self.holds, "verdict": self.verdict,
                "seconds": self.seconds, "details": self.details}


def ginibre_tuple(rng, n: int, k: int) -> MatrixTuple:
    """Complex Gaussian matrices with entry variance ``1/k``."""
    g = rng.standard_normal((n, k, k)) + 1j * rng.standard_normal((n, k, k))
    return MatrixTuple(g / np.sqrt(2 * k))


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


# ---------------------------------------------------------------- algebra

def _leibniz(trials: int, seed: int) -> tuple[bool, dict]:
    fails = {"leibniz": 0, "linearity": 0, "star": 0}
    examples = []
    for t in range(trials):
        rng = rng_stream(seed, t)
        n = int(rng.integers(1, 4))
        p = random_polynomial(rng, n, 3, 3, integer_coeffs=True)
        q = random_polynomial(rng, n, 2, 3, integer_coeffs=True)
        a, b = complex(*rng.integers(-3, 4, 2)), complex(*rng.integers(-3, 4, 2))
        pq = p * q
        lin = p.scale(a) + q.scale(b)
        bad = []
        for j in range(1, n + 1):
            for name, op in (("raw", raw_deriv), ("sa", lambda f, j: partial_deriv(f, j, "sa")),
                             ("sk", lambda f, j: partial_deriv(f, j, "sk"))):
                lhs = op(pq, j)
                rhs = op(p, j).act(right=q) + op(q, j).act(left=p)
                if not lhs.allclose(rhs):
                    fails["leibniz"] += 1
                    bad.append(f"leibniz/{name}/X{j}")
                if not op(lin, j).allclose(op(p, j).scale(a) + op(q, j).scale(b)):
                    fails["linearity"] += 1
                    bad.append(f"linearity/{name}/X{j}")
        if not (pq.star() == q.star() * p.star() and p.star().star() == p):
            fails["star"] += 1
            bad.append("star")
        if bad and len(examples) < 5:
            examples.append({"trial": t, "p": str(p), "q": str(q), "failed": bad})
    return sum(fails.values()) == 0, {"polynomials": 2 * trials, "failures": fails,
                                      "examples": examples}


def _route_agreement(trials: int, seed: int) -> tuple[bool, dict]:
    discrepancies = []
    for t in range(trials):
        rng = rng_stream(seed, t)
        n = int(rng.integers(1, 4))
        w = random_word(rng, n, int(rng.integers(1, 7)))
        f = Polynomial.word(w, n)
        a, b = d_u([f], "definition"), d_u([f], "remark_rule")
        if a != b:
            discrepancies.append({"trial": t, "word": word_str(w), "definition": str(a),
                                  "remark_rule": str(b)})
    det = {"monomials": trials, "discrepancies": len(discrepancies),
           "report": discrepancies[:20], "verdict": "agree" if not discrepancies else "disagree"}
    return not discrepancies, det


def _moment_match(trials: int, seed: int, mmax: int = 4, rtol: float = 1e-8) -> tuple[bool, dict]:
    worst = 0.0
    for t in range(trials):
        rng = rng_stream(seed, t)
        n, m, k = int(rng.integers(1, 3)), int(rng.integers(1, 3)), int(rng.integers(1, 7))
        F = PolyTuple([random_polynomial(rng, n, 3, 3) for _ in range(m)])
        xi = ginibre_tuple(rng, n, k)
        R = real_derivative(F, xi)
        A = assemble(d_s(F), xi).data
        gr, ga = R.T @ R, A.conj().T @ A
        pr, pa = np.eye(gr.shape[0]), np.eye(ga.shape[0])
        for _ in range(mmax):
            pr, pa = pr @ gr, pa @ ga
            tr_r = np.trace(pr) / gr.shape[0]
            tr_a = np.real(np.trace(pa)) / ga.shape[0]
            worst = max(worst, abs(tr_r - tr_a) / max(abs(tr_a), 1e-300))
    return worst <= rtol, {"instances": trials, "m_max": mmax, "worst_rel_err": worst,
                           "rtol": rtol}


# ------------------------------------------------------ self-adjoint reduction

def _sa_from_parts(rng, n: int, deg: int) -> Polynomial:
    """Self-adjoint polynomial in the variables ``X_j + X_j'`` only."""
    acc = Polynomial.zero(n)
    for _ in range(int(rng.integers(1, 4))):
        term = Polynomial.const(complex(rng.standard_normal(), rng.standard_normal()), n)
        for g in rng.integers(1, n + 1, size=int(rng.integers(1, deg + 1))):
            term = term * (Polynomial.gen(int(g), n) + Polynomial.gen(int(g), n, True))
        acc = acc + term
    return acc + acc.star()


def skew_parts(n: int) -> list[Polynomial]:
    return [(Polynomial.gen(j, n) - Polynomial.gen(j, n, True)).scale(0.5)
            for j in range(1, n + 1)]


def sa_reduction(F: PolyTuple, xi: MatrixTuple) -> dict:
    """Row-reduce ``D^s(F u L)`` and compare its spectrum with ``D^sa F``.

    ``L_j = (X_j - X_j')/2``. Subtracting ``d^sk f_i / dX_j`` times the
    skew row of ``L_j`` from the self-adjoint row of ``f_i`` leaves a matrix
    ``T`` whose singular values are those of ``D^sa F`` together with
    ``n k^2`` ones. ``T = E D`` with ``E`` unipotent, so kernels agree and
    ``#{s(D) <= t} <= #{s(T) <= ||E|| t}``.
    """
    n, m, k = F.arity, len(F), xi.k
    b = k * k
    G = PolyTuple(list(F) + skew_parts(n))
    D = assemble(d_s(G), xi).data
    E = np.eye(D.shape[0], dtype=complex)
    for i in range(m):
        for j in range(n):
            row, src, col = 2 * i, 2 * (m + j) + 1, 2 * j + 1
            E[row * b:(row + 1) * b, src * b:(src + 1) * b] = -D[row * b:(row + 1) * b,
                                                              col * b:(col + 1) * b]
    T = E @ D
    sD = svd_measure(D)
    sT = svd_measure(T)
    sF = svd_measure(assemble(d_sa(F), xi))
    merged = np.sort(np.concatenate([sF.values, np.ones(n * b)]))[::-1]
    scale = max(1.0, float(merged[0]))
    t_dev = float(np.max(np.abs(sT.values - merged)))
    lit_dev = float(np.max(np.abs(sD.values - merged)))
    normE = float(np.linalg.norm(E, 2))
    grid = np.concatenate([sD.values, np.geomspace(1e-8, 2 * sD.values[0], 64)])
    win = window_check(sD.values, sT.values, normE * (1 + 1e-9), grid)
    kD, kF = kernel_count(sD), kernel_count(sF)
    return {"k": k, "n": n, "m": m, "reduced_deviation": t_dev,
            "reduced_identity": bool(t_dev <= 1e-8 * scale),
            "kernel_count_full": kD, "kernel_count_sa": kF, "nullity_equal": kD == kF,
            "E_norm": normE, "window": win, "literal_deviation": lit_dev,
            "literal_identity": bool(lit_dev <= 1e-8 * scale)}


def _prop317(trials: int, seed: int) -> tuple[bool, dict]:
    rows, parts_rows = [], []
    for t in range(trials):
        rng = rng_stream(seed, t)
        n, m, k = int(rng.integers(1, 3)), int(rng.integers(1, 3)), int(rng.integers(2, 6))
        F = PolyTuple([(lambda g: g + g.star())(random_polynomial(rng, n, 3, 3))
                       for _ in range(m)])
        xi = ginibre_tuple(rng, n, k)
        rows.append(sa_reduction(F, xi))
        Fp = PolyTuple([_sa_from_parts(rng, n, 2) for _ in range(m)])
        parts_rows.append(sa_reduction(Fp, xi))
    ok = all(r["reduced_identity"] and r["nullity_equal"] and r["window"]["holds"] for r in rows)
    info = {"literal_identity_general": sum(r["literal_identity"] for r in rows),
            "literal_identity_parts_only": sum(r["literal_identity"] for r in parts_rows),
            "instances": trials,
            "note": ("literal identity for D^s(F u L) is informational; asserted are the "
                     "reduced identity, kernel equality and the window bound")}
    return ok, {"summary": info,
                "worst_reduced_deviation": max(r["reduced_deviation"] for r in rows),
                "instances": rows}


# --------------------------------------------------------------- unitary

def diagonal_unitary(rng, n: int, k: int) -> MatrixTuple:
    return MatrixTuple(np.array([np.diag(np.exp(2j * np.pi * rng.random(k)))
                                 for _ in range(n)]))


def unitary_relations(F: PolyTuple) -> PolyTuple:
    """``{f - I} u {X_j' X_j - I}``."""
    n = F.arity
    one = Polynomial.const(1.0, n)
    return PolyTuple([f - one for f in F]
                     + [Polynomial.gen(j, n, True) * Polynomial.gen(j, n) - one
                        for j in range(1, n + 1)])


def _prop327(trials: int, seed: int) -> tuple[bool, dict]:
    rows = []
    for t in range(trials):
        rng = rng_stream(seed, t)
        n, m, k = 2, int(rng.integers(1, 3)), int(rng.integers(2, 5))
        F = PolyTuple([Polynomial.word(random_word(rng, n, int(rng.integers(1, 6))), n)
                       for _ in range(m)])
        if t % 2:
            xi, kind = diagonal_unitary(rng, n, k), "diagonal"
        else:
            xi, kind = sample("haar_unitary", k, n, seed=seed * 1000 + t), "haar"
        a = kernel_count(svd_measure(assemble(d_s(unitary_relations(F)), xi)))
        b = kernel_count(svd_measure(assemble(d_u(F), xi)))
        rows.append({"k": k, "kind": kind, "F": [str(f) for f in F],
                     "kernel_s": a, "kernel_u": b, "equal": a == b})
    return all(r["equal"] for r in rows), {"instances": rows}


# -------------------------------------------------------------- covering

def _random_cloud(rng, max_points: int = 20, max_dim: int = 8) -> covering.PointCloud:
    N = int(rng.integers(2, max_points + 1))
    d = int(rng.integers(1, max_dim + 1))
    return covering.PointCloud(rng.standard_normal((N, d)))


def _eps_for(cloud, rng) -> float:
    D = cloud.cdist(cloud.points, cloud.points)
    return float(D.max() * rng.uniform(0.1, 0.6)) or 1.0


def _prop21(trials: int, seed: int) -> tuple[bool, dict]:
    failures = []
    for t in range(trials):
        rng = rng_stream(seed, t)
        cloud = _random_cloud(rng)
        rep = covering.verify_chain(cloud, _eps_for(cloud, rng), seed=seed * 1000 + t)
        if not rep["holds"]:
            failures.append({"trial": t, "items": [i for i in rep["items"] if not i["holds"]]})
    return not failures, {"instances": trials, "failures": failures}


def _lemma22(trials: int, seed: int) -> tuple[bool, dict]:
    failures = []
    for t in range(trials):
        rng = rng_stream(seed, t)
        d = int(rng.integers(1, 9))
        sizes = [(2, 2, 2), (2, 2, 3), (2, 3), (3, 3), (4, 4), (4, 5), (2, 10)][t % 7]
        clouds = [covering.PointCloud(rng.standard_normal((s, d))) for s in sizes]
        eps = float(rng.uniform(0.2, 1.5))
        rep = covering.sumset_verify(clouds, eps)
        if not rep["holds"]:
            failures.append({"trial": t, "report": rep})
    return not failures, {"instances": trials, "failures": failures}


def _lemma42_instance(rng, t: int) -> dict:
    N = int(rng.integers(3, 21))
    d = int(rng.integers(1, 9))
    out_dim = int(rng.integers(1, d + 1))
    rank = int(rng.integers(0, out_dim + 1)) if t % 3 else out_dim
    if rank == d and t % 2:
        rank = d  # full-rank projection, Q = I
    basis = np.linalg.qr(rng.standard_normal((d, d)))[0][:, :rank]
    Q = basis @ basis.T
    A = rng.standard_normal((out_dim, d))
    # lift the smallest singular value on range(Q) above beta
    if rank:
        u, s, vh = np.linalg.svd(A @ basis, full_matrices=False)
        A = A + u @ np.diag(np.maximum(s, 0.5) - s) @ vh @ basis.T
        lower = float(np.linalg.svd(A @ basis, compute_uv=False).min())
    else:
        lower = 1.0
    beta = float(min(0.9, 0.95 * lower))
    gamma = beta / 40 * rng.uniform(0.1, 1.0)
    W = rng.standard_normal((out_dim, d)) / np.sqrt(d)

    def fun(x):
        return A @ x + gamma * np.sin(W @ x)

    def jac(x):
        return A + gamma * np.cos(W @ x)[:, None] * W
    P = rng.uniform(-1, 1, (N, d))
    normD = float(np.linalg.norm(jac(P[0]), 2))
    t_lo = 1 - beta / (8 * (normD + 1))
    return {"E": covering.PointCloud(P), "f": (fun, jac), "x0": P[0], "Q": Q, "beta": beta,
            "t": (t_lo + 1) / 2, "eps": float(rng.uniform(0.02, 1.0)), "rank": rank}


def _lemma42(trials: int, seed: int) -> tuple[bool, dict]:
    checked, skipped, failures, ranks = 0, 0, [], []
    t = 0
    while checked < trials and t < 20 * trials:
        rng = rng_stream(seed, t)
        inst = _lemma42_instance(rng, t)
        rep = covering.lemma42_verify(inst["E"], inst["f"], inst["x0"], inst["Q"], inst["beta"],
                                      inst["t"], inst["eps"], seed=seed * 1000 + t)
        t += 1
        if rep["status"] != "checked":
            skipped += 1
            continue
        checked += 1
        ranks.append(inst["rank"] == inst["Q"].shape[0])
        if not rep["holds"]:
            failures.append({"trial": t - 1, "lhs": rep["lhs"], "rhs": rep["rhs"]})
    ok = checked >= trials and not failures
    return ok, {"checked": checked, "hypothesis_failed": skipped, "full_rank_Q": sum(ranks),
                "failures": failures}


# ------------------------------------------------------------ projections

def _spread_matrix(rng, k: int) -> np.ndarray:
    g = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
    return g @ np.diag(np.exp(1.5 * rng.standard_normal(k)))


def _lemma59(trials: int, seed: int, k: int = 16) -> tuple[bool, dict]:
    viol, min_tr = 0, {2.0: 1.0, 3.0: 1.0}
    for t in range(trials):
        rng = rng_stream(seed, t)
        C = 2.0 if t % 2 == 0 else 3.0
        cert = projections.cheb_projection(_spread_matrix(rng, k), C)
        viol += not cert.holds()
        min_tr[C] = min(min_tr[C], cert.trace)
    return viol == 0, {"instances": trials, "k": k, "violations": viol,
                       "min_trace": {str(c): v for c, v in min_tr.items()}}


def _lemma512(trials: int, seed: int, k: int = 16) -> tuple[bool, dict]:
    one = {"right": 0, "left": 0}
    two = 0
    worst_meet = 0.0
    for t in range(trials):
        rng = rng_stream(seed, t)
        side = "right" if t % 2 == 0 else "left"
        C = 3.0 if t % 4 < 2 else 2.0
        cert = projections.product_projection([_spread_matrix(rng, k) for _ in range(2)], C, side)
        one[side] += not cert.holds()
        if "meet_deficit" in cert.extra:
            worst_meet = max(worst_meet, cert.extra["meet_deficit"][0])
        L = int(rng.integers(2, 5))
        zs = [_spread_matrix(rng, k) for _ in range(L)]
        c2 = projections.product_projection(zs, C, "two_sided", split=int(rng.integers(0, L + 1)))
        two += not c2.holds()
    return sum(one.values()) + two == 0, {"instances_one_sided": trials,
                                          "instances_two_sided": trials, "k": k,
                                          "violations_one_sided": one,
                                          "violations_two_sided": two,
                                          "worst_meet_deficit": worst_meet}


# ----------------------------------------------------------------- volumes

def _a2(trials: int, seed: int, k: int = 8) -> tuple[bool, dict]:
    viol = 0
    for t in range(trials):
        rng = rng_stream(seed, t)
        d = int(rng.integers(0, k + 1))
        x = (rng.standard_normal((k, d)) @ rng.standard_normal((d, k))).astype(complex)
        eps = float(rng.uniform(0.01, 1.0))
        g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        y = g * (eps * rng.uniform(0.0, 0.999) * np.sqrt(k) / np.linalg.norm(g))
        viol += not volumes.wh_tail_check(x, y, eps, d)["holds"]
    mc = volumes.mc_containment_check(1.0, 0.5, k, 2, 0.1, 10 ** 4, seed)
    return viol == 0 and mc["holds"], {"tail_instances": trials, "tail_violations": viol,
                                       "containment": mc}


def _volumes(trials: int, seed: int) -> tuple[bool, dict]:
    mcs = [volumes.mc_ball_volume(k, 1.0, 2.0, trials, seed) for k in (1, 2)]
    g = dict(volumes.lemma_a3_sequence(40))
    a3 = {"g10_gap": abs(g[10] + 0.5), "g40_gap": abs(g[40] + 0.5)}
    a3["holds"] = a3["g40_gap"] < a3["g10_gap"] and a3["g40_gap"] < 0.05
    ok = all(abs(m["z_score"]) < 3 for m in mcs) and a3["holds"]
    return ok, {"monte_carlo": mcs, "sequence": a3}


# ----------------------------------------------------------------- binding

def _binding(trials: int, seed: int) -> tuple[bool, dict]:
    F = PolyTuple([parse("X1 X1", 1)])
    xi0 = sample("gue_selfadjoint", 8, 1, seed=seed)
    b = covering.build_binding(F, xi0, rho=0.01, R=2.0, sample_pairs=trials, seed=seed)
    rep = b.report
    ok = bool(rep["holds"] and rep["mean_value_residual"] < 1e-9)
    return ok, {k: v for k, v in rep.items() if k != "pairs"}


# ----------------------------------------------------------------- registry

SUITES: dict[str, tuple[Callable, int]] = {
    "leibniz": (_leibniz, 1000),
    "route-agreement": (_route_agreement, 300),
    "moment-match": (_moment_match, 50),
    "prop317": (_prop317, 20),
    "prop327": (_prop327, 20),
    "lemma42": (_lemma42, 50),
    "prop21": (_prop21, 50),
    "lemma22": (_lemma22, 50),
    "lemma59": (_lemma59, 1000),
    "lemma512": (_lemma512, 200),
    "a2": (_a2, 1000),
    "binding": (_binding, 50),
    "volumes": (_volumes, 10 ** 6),
}


def run_suite(name: str, trials: int | None = None, seed: int = 0) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    fn, default = SUITES[name]
    t0 = time.perf_counter()
    ok, details = fn(default if trials is None else trials, seed)
    secs = time.perf_counter() - t0
    if name == "route-agreement":
        verdict = details["verdict"]
    else:
        verdict = _verdict(ok)
    return SuiteResult(name, bool(ok), verdict, details, secs)


def run_all(seed: int = 0) -> list[SuiteResult]:
    return [run_suite(name, None, seed) for name in SUITES]
