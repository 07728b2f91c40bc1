"""Acceptance checks, one per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are echoed in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import subprocess
import sys
import time

import numpy as np
import pytest

from freedim.pipelines import commutator_example, haar_fkl
from freedim.suites import run_suite

LINES: list[str] = []


def record(num: int, title: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} [{num:2d}] {title}: {detail}"
    LINES.append(line)
    print(line)
    return ok


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def test_01_symbolic_calculus():
    res, secs = timed(run_suite, "leibniz", 1000, 0)
    f = res.details["failures"]
    ok = res.holds and secs < 10 and res.details["polynomials"] >= 1000
    assert record(1, "Leibniz/linearity/star", ok,
                  f"{res.details['polynomials']} polynomials, failures {f}, {secs:.2f}s")


def test_02_unitary_route_agreement():
    res, secs = timed(run_suite, "route-agreement", 300, 0)
    ok = res.verdict in ("agree", "disagree") and secs < 30 and res.details["monomials"] >= 200
    assert record(2, "unitary route agreement", ok,
                  f"verdict {res.verdict}, {res.details['monomials']} monomials, "
                  f"{res.details['discrepancies']} discrepancies, {secs:.2f}s")


def test_03_moment_match():
    res, secs = timed(run_suite, "moment-match", 50, 0)
    err = res.details["worst_rel_err"]
    ok = err <= 1e-8 and secs < 60
    assert record(3, "moment matching", ok,
                  f"50 instances, worst relative error {err:.2e}, {secs:.2f}s")


def test_04_self_adjoint_spectral_identity():
    # literal comparison: sorted singular values of the full derivative with
    # the skew parts appended against the self-adjoint spectrum merged with ones
    res = run_suite("prop317", 20, 0)
    rows = res.details["instances"]
    hits = sum(r["literal_identity"] for r in rows)
    worst = max(r["literal_deviation"] for r in rows)
    ok = hits == len(rows) and all(r["k"] <= 5 for r in rows)
    record(4, "spectral identity of the self-adjoint reduction", ok,
           f"{hits}/{len(rows)} instances within 1e-8, worst deviation {worst:.3e}; "
           f"kernels equal {sum(r['nullity_equal'] for r in rows)}/{len(rows)}, "
           f"reduced identity {sum(r['reduced_identity'] for r in rows)}/{len(rows)}")
    assert ok


def test_05_unitary_nullity_identity():
    res = run_suite("prop327", 20, 0)
    rows = res.details["instances"]
    eq = sum(r["equal"] for r in rows)
    assert record(5, "unitary nullity identity", eq == len(rows) == 20,
                  f"{eq}/{len(rows)} integer kernel counts equal")


def test_06_commutator_pipeline():
    rep = commutator_example(ks=[4, 8, 16], seed=0)
    parts, ok = [], True
    for r in rep["results"]:
        k = r["k"]
        exact = r["kernel_count"] == k * k + k and r["nullity"] == pytest.approx(1 + 1 / k, abs=1e-14)
        ok &= exact
        parts.append(f"k={k} nullity {r['nullity']:.6f} (kernel {r['kernel_count']})")
    assert record(6, "commuting diagonal pipeline", ok, "; ".join(parts))


def test_07_haar_fkl():
    rep, secs = timed(haar_fkl, 500, 0)
    ok = abs(rep["fkl"] - 1.0) <= 0.05 and abs(rep["oracle"] - 1.0) < 1e-8 and secs < 10
    assert record(7, "Haar FKL determinant", ok,
                  f"fkl {rep['fkl']:.5f}, quadrature oracle {rep['oracle']:.3g}, {secs:.2f}s")


def test_08_projection_bounds():
    a = run_suite("lemma59", 1000, 0)
    b = run_suite("lemma512", 200, 0)
    ok = (a.holds and a.details["violations"] == 0 and b.holds
          and b.details["instances_one_sided"] >= 200 and b.details["instances_two_sided"] >= 200)
    assert record(8, "projection bounds (k=16, C in {2,3})", ok,
                  f"single 1000 violations {a.details['violations']}, min trace "
                  f"{a.details['min_trace']}; product 200 violations "
                  f"{b.details['violations_one_sided']}; two-sided 200 violations "
                  f"{b.details['violations_two_sided']}")


def test_09_covering_arithmetic():
    res = {name: run_suite(name, 50, 0) for name in ("prop21", "lemma22", "lemma42")}
    ok = all(r.holds for r in res.values()) and res["lemma42"].details["checked"] >= 50
    assert record(9, "covering chain, sumset and pullback inequality", ok,
                  f"chain failures {len(res['prop21'].details['failures'])}/50, sumset failures "
                  f"{len(res['lemma22'].details['failures'])}/50, pullback failures "
                  f"{len(res['lemma42'].details['failures'])}/"
                  f"{res['lemma42'].details['checked']} checked")


def test_10_binding():
    res = run_suite("binding", 50, 0)
    d = res.details
    ok = (d["bound"] == pytest.approx(51.2) and d["eps_achieved"] <= d["bound"]
          and d["min_trace"] >= d["trace_bound"]
          and d["mean_value_residual"] < 1e-9)
    assert record(10, "binding construction", ok,
                  f"eps {d['eps_achieved']:.4g} <= {d['bound']:.4g}, min trace "
                  f"{d['min_trace']:.4g} >= {d['trace_bound']:.4g}, mean-value residual "
                  f"{d['mean_value_residual']:.2e}")


def test_11_volumes():
    t0 = time.perf_counter()
    vol = run_suite("volumes", 10 ** 6, 0)
    a2 = run_suite("a2", 10 ** 4, 0)
    secs = time.perf_counter() - t0
    zs = [m["z_score"] for m in vol.details["monte_carlo"]]
    seq = vol.details["sequence"]
    ok = (all(abs(z) < 3 for z in zs) and seq["holds"] and a2.details["tail_violations"] == 0
          and a2.details["containment"]["holds"] and secs < 120)
    assert record(11, "ball volumes and tail bounds", ok,
                  f"z-scores {np.round(zs, 3).tolist()}, |g(10)+1/2|={seq['g10_gap']:.4f}, "
                  f"|g(40)+1/2|={seq['g40_gap']:.4f}, tail violations "
                  f"{a2.details['tail_violations']}/10000, {secs:.1f}s")


def test_12_verify_all_cli():
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "freedim", "verify", "all"],
                          capture_output=True, text=True, timeout=300)
    secs = time.perf_counter() - t0
    ok = proc.returncode == 0 and secs < 300
    assert record(12, "verify all", ok, f"exit code {proc.returncode}, {secs:.1f}s")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    failed = 0
    for fn in tests:
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
