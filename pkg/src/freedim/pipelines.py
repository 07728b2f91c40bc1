"""Worked pipelines from relations to spectral diagnostics."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .derivation import TensorElement, d_sa, d_u
from .ncpoly import Polynomial, PolyTuple, parse
from .repn import assemble, rng_stream, sample, haar_unitary
from .spectral import decay_diagnostic, fkl_det, kernel_count, nullity_rank, svd_measure

__all__ = ["commutator_example", "unitary_word_example", "tensor_chain", "haar_fkl", "EXAMPLES"]


def _decay_rows(measures, ks, eps0):
    rep = decay_diagnostic(measures, eps0=eps0, nmax=12, ks=ks)
    rows = rep.per_k or [{"k": ks[0], "tau": rep.tau, "tail_sums": rep.tail_sums,
                          "log_integral": rep.log_integral, "zero_mass": rep.zero_mass}]
    return {"eps0": eps0, "rows": rows, "note": rep.note}


def commutator_example(k: int = 16, seed: int = 0, eps0: float = 0.5, ks=None) -> dict:
    """Two commuting diagonal matrices and ``f = X2 X1 - X1' X2'``.

    The self-adjoint derivative has an exact kernel of dimension
    ``k^2 + k``, so the nullity on the two-block range is ``1 + 1/k``.
    """
    ks = [k] if ks is None else list(ks)
    F = PolyTuple([parse("X2 X1 - X1' X2'", 2)])
    D = d_sa(F)
    rows, measures = [], []
    for kk in ks:
        xi = sample("commuting_diagonal", kk, 2, seed=seed)
        sm = svd_measure(assemble(D, xi))
        nul, rank, gap = nullity_rank(sm)
        kc = kernel_count(sm)
        rows.append({"k": kk, "nullity": nul, "rank": rank, "gap": gap, "kernel_count": kc,
                     "expected_nullity": 1 + 1 / kk, "matches": kc == kk * kk + kk})
        measures.append(sm)
    return {"relation": str(F[0]), "derivative": str(D), "results": rows,
            "limit_nullity": 1.0, "decay": _decay_rows(measures, ks, eps0),
            "holds": all(r["matches"] for r in rows)}


def unitary_word_example(k: int = 8, seed: int = 0) -> dict:
    """``f = X2 X1 X2 X1`` (and the variant ending in ``X1'``) at Haar unitaries.

    The unitary derivative in the first variable reduces to
    ``X1' X2' (x) X2 X1 + I (x) I``; the nullity on the two-block range is
    ``n - 1 = 1`` at generic unitaries.
    """
    n = 2
    f = parse("X2 X1 X2 X1", n)
    expected = (TensorElement.from_polys(parse("X1' X2'", n), parse("X2 X1", n))
                + TensorElement.one())
    du = d_u([f])
    symbolic_ok = du[0, 0] == expected
    u = sample("haar_unitary", k, n, seed=seed)
    out = {"relation": str(f), "d_u": str(du), "expected_first_entry": str(expected),
           "symbolic_match": symbolic_ok, "variants": []}
    for text in ("X2 X1 X2 X1", "X2 X1 X2 X1'"):
        sm = svd_measure(assemble(d_u([parse(text, n)]), u))
        nul, rank, gap = nullity_rank(sm)
        out["variants"].append({"relation": text, "k": k, "nullity": nul, "rank": rank,
                                "gap": gap, "fkl": fkl_det(sm, sm.default_tau())})
    out["holds"] = bool(symbolic_ok and abs(out["variants"][0]["nullity"] - (n - 1)) < 1e-12)
    return out


def tensor_chain(n: int = 3, ks=(4, 8, 16), seed: int = 0, eps0: float = 0.5) -> dict:
    """Commuting diagonal chain with ``f_i = X_i X_{i+1} - X_{i+1}' X_i'``.

    Reports nullity and decay per ``k``; the range is ``[0, n]``.
    """
    if n < 2:
        raise ValueError("the chain needs n >= 2")
    F = PolyTuple([parse(f"X{i} X{i + 1} - X{i + 1}' X{i}'", n) for i in range(1, n)])
    D = d_sa(F)
    rows, measures = [], []
    for k in ks:
        xi = sample("commuting_diagonal", k, n, seed=seed)
        sm = svd_measure(assemble(D, xi))
        nul, rank, gap = nullity_rank(sm)
        rows.append({"k": k, "nullity": nul, "rank": rank, "gap": gap,
                     "fkl": fkl_det(sm, sm.default_tau())})
        measures.append(sm)
    return {"relations": [str(f) for f in F], "results": rows,
            "decay": _decay_rows(measures, list(ks), eps0)}


def _log_chord(theta: float) -> float:
    return math.log(abs(1 - complex(math.cos(theta), math.sin(theta))))


def haar_fkl(k: int = 500, seed: int = 0, tol: float = 0.05) -> dict:
    """FKL determinant of ``I - u`` for a Haar unitary ``u``.

    The oracle is the quadrature of ``log|1 - e^{i theta}|`` over the
    circle, which vanishes, so the determinant should be close to 1.
    """
    u = haar_unitary(k, rng_stream(seed, 0))
    sm = svd_measure(np.eye(k) - u)
    det = fkl_det(sm)
    # the integrand has a log singularity at 0 and 2 pi
    val, err = integrate.quad(_log_chord, 0.0, 2 * math.pi, limit=200)
    oracle = math.exp(val / (2 * math.pi))
    return {"k": k, "fkl": det, "oracle": oracle, "quad_error": err, "tol": tol,
            "holds": bool(abs(det - oracle) <= tol)}


EXAMPLES = {
    "ex4.1": lambda k, seed, eps0: commutator_example(k, seed, eps0),
    "ex4.2": lambda k, seed, eps0: unitary_word_example(k, seed),
    "tensor-chain": lambda k, seed, eps0: tensor_chain(3, (4, 8, k) if k > 8 else (2, 4, k),
                                                      seed, eps0),
    "haar-fkl": lambda k, seed, eps0: haar_fkl(k, seed),
}
