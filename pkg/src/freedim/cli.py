"""Command-line front end.

Every command writes a JSON report ``{"command", "config", "versions",
"results"}`` to ``--out`` (or stdout). Tabular commands also accept
``--format csv``. Exit status: 0 on success, 1 when a verify suite or
example check fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .covering import (EXACT_LIMIT, PointCloud, binding_constant_B, build_binding, dim_fit, kcover,
                       rogers_bound, spack)
from .derivation import d_s, d_sa, d_u
from .ncpoly import PolyTuple, parse, parse_tuple, stats
from .pipelines import EXAMPLES
from .projections import cheb_projection
from .repn import MatrixTuple, assemble, eval_tuple, rng_stream, sample
from .spectral import decay_diagnostic, fkl_det, kernel_count, nullity_rank, svd_measure
from .suites import SUITES, run_suite
from .volumes import (lemma_a3_sequence, mc_ball_volume, schatten2_ball_log_volume,
                      unit_ball_log_volume)

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if hasattr(o, "to_json"):
        return o.to_json()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _clean(x):
    """Replace non-finite floats so the output is strict JSON."""
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def versions() -> dict:
    return {"freedim": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


# ------------------------------------------------------------ input helpers

def _polys(args) -> PolyTuple:
    texts = list(args.poly or [])
    if getattr(args, "poly_file", None):
        texts += [ln.strip() for ln in Path(args.poly_file).read_text().splitlines()
                  if ln.strip() and not ln.lstrip().startswith("#")]
    if not texts:
        raise UsageError("no polynomial given (use --poly or --poly-file)")
    return parse_tuple(";".join(texts), args.n)


def _point(args, F: PolyTuple | None = None) -> MatrixTuple:
    if getattr(args, "input", None):
        xi = MatrixTuple.from_json(json.loads(Path(args.input).read_text()))
    else:
        kind = args.kind or ("haar_unitary" if getattr(args, "calc", None) == "u"
                             else "gue_selfadjoint")
        xi = sample(kind, args.k, args.n, seed=args.seed)
    if F is not None and xi.n != F.arity:
        raise UsageError(f"tuple has {xi.n} matrices, polynomials need {F.arity}")
    return xi


def _derivative(F: PolyTuple, calc: str):
    if calc == "s":
        return d_s(F)
    if calc == "sa":
        return d_sa(F)
    return d_u(F)


# dense SVD of anything larger is impractical
MAX_ASSEMBLED = 8192


def _measure(args):
    F = _polys(args)
    xi = _point(args, F)
    D = _derivative(F, args.calc)
    rows, cols = D.rows * xi.k ** 2, D.cols * xi.k ** 2
    if max(rows, cols) > MAX_ASSEMBLED:
        raise UsageError(f"assembled derivative would be {rows} x {cols}; "
                         f"reduce --k (limit {MAX_ASSEMBLED} per side)")
    return svd_measure(assemble(D, xi))


def _cloud(args) -> PointCloud:
    if args.input:
        path = Path(args.input)
        if path.suffix == ".npy":
            pts = np.load(path)
        elif path.suffix == ".json":
            obj = json.loads(path.read_text())
            pts = np.asarray(obj["points"] if isinstance(obj, dict) else obj, dtype=float)
        else:
            pts = np.loadtxt(path, delimiter=",", ndmin=2)
        return PointCloud(np.atleast_2d(pts), args.metric)
    rng = rng_stream(args.seed, 0)
    N = args.points
    if args.shape == "segment":
        pts = rng.uniform(0, 1, (N, 1))
    elif args.shape == "square":
        pts = rng.uniform(0, 1, (N, 2))
    else:
        pts = rng.standard_normal((N, args.dim))
    return PointCloud(pts, args.metric)


# ----------------------------------------------------------------- commands

def cmd_parse(args):
    F = _polys(args)
    rows = []
    for f in F:
        c, deg = stats([f])
        rows.append({"normal_form": str(f), "degree": deg, "terms": len(f),
                     "self_adjoint": f == f.star(), "size_constant": c})
    return {"polynomials": rows}


def cmd_derive(args):
    F = _polys(args)
    D = _derivative(F, args.calc)
    return {"calc": args.calc, "text": str(D), "matrix": D.to_json()}


def cmd_eval(args):
    F = _polys(args)
    xi = _point(args, F)
    vals = eval_tuple(F, xi)
    return {"point": xi.to_json(), "values": vals.to_json()}


def cmd_spectrum(args):
    sm = _measure(args)
    return {"measure": sm.to_json()}, sm.to_csv()


def cmd_nullity(args):
    sm = _measure(args)
    nul, rank, gap = nullity_rank(sm, args.tau)
    return {"nullity": nul, "rank": rank, "gap": gap, "kernel_count": kernel_count(sm, args.tau),
            "ambient_dim": sm.ambient_dim, "tau": sm.default_tau() if args.tau is None else args.tau}


def cmd_fkl(args):
    sm = _measure(args)
    tau = sm.default_tau() if args.tau is None else args.tau
    return {"fkl": fkl_det(sm, tau), "tau": tau}


def cmd_decay(args):
    F = _polys(args)
    ks = args.ks or [args.k]
    measures = []
    for k in ks:
        args.k = k
        measures.append(svd_measure(assemble(_derivative(F, args.calc), _point(args, F))))
    rep = decay_diagnostic(measures, eps0=args.eps0, tau=args.tau, nmax=args.nmax, ks=ks)
    rows = rep.per_k or [{"k": ks[0], "tau": rep.tau, "tail_sums": rep.tail_sums,
                          "log_integral": rep.log_integral, "zero_mass": rep.zero_mass}]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "N", "tail_sum"])
    for r in rows:
        for N, s in enumerate(r["tail_sums"], 1):
            w.writerow([r["k"], N, repr(s)])
    return {"decay": rep.to_json()}, buf.getvalue()


def cmd_chebproj(args):
    if args.input:
        obj = json.loads(Path(args.input).read_text())
        z = np.asarray(obj["re"]) + 1j * np.asarray(obj.get("im", 0))
    else:
        rng = rng_stream(args.seed, 0)
        z = (rng.standard_normal((args.k, args.k)) + 1j * rng.standard_normal((args.k, args.k)))
    cert = cheb_projection(z, args.C)
    return {"certificate": cert.to_json(include_matrix=args.matrix), "holds": cert.holds()}


def cmd_cover(args):
    cloud = _cloud(args)
    mode = args.mode or ("exact" if len(cloud) <= EXACT_LIMIT else "greedy")
    K = kcover(cloud, args.eps, mode, restricted=args.restricted)
    S = spack(cloud, args.eps, mode)
    return {"points": len(cloud), "dim": cloud.dim, "eps": args.eps, "mode": mode,
            "restricted": args.restricted, "K": K, "S": S}


def cmd_dimfit(args):
    cloud = _cloud(args)
    rep = dim_fit(cloud, args.grid, args.mode, args.eps0, args.levels)
    return {"points": len(cloud), "report": rep.to_json()}, rep.to_csv()


def cmd_rogers(args):
    return {"d": args.d, "eps": args.eps, "alpha": args.alpha, "C_r": args.C_r,
            "bound": rogers_bound(args.d, args.eps, args.alpha, args.C_r)}


def cmd_binding(args):
    F = _polys(args)
    xi0 = _point(args, F)
    b = build_binding(F, xi0, args.rho, args.R, args.pairs, args.seed)
    return {"B": binding_constant_B(F), "binding": b.to_json()}


def cmd_volume(args):
    out = {"k": args.k, "r": args.r, "log_unit_ball_2k2": unit_ball_log_volume(2 * args.k ** 2)}
    if args.p == 2:
        out["log_volume"] = schatten2_ball_log_volume(args.k, args.r)
    if args.samples:
        out["monte_carlo"] = mc_ball_volume(args.k, args.r, args.p, args.samples, args.seed)
    return out


def cmd_a3seq(args):
    rows = lemma_a3_sequence(args.kmax)
    text = "k,g\n" + "\n".join(f"{k},{g!r}" for k, g in rows) + "\n"
    return {"sequence": [{"k": k, "g": g} for k, g in rows]}, text


def cmd_verify(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = [run_suite(n, args.trials, args.seed) for n in names]
    out = {"suites": [r.to_json() for r in results], "holds": all(r.holds for r in results)}
    buf = "suite,verdict,holds,seconds\n" + "".join(
        f"{r.name},{r.verdict},{r.holds},{r.seconds:.3f}\n" for r in results)
    return out, buf


def cmd_example(args):
    if args.k is None:
        args.k = EXAMPLE_DEFAULT_K[args.name]
    return EXAMPLES[args.name](args.k, args.seed, args.eps0)


EXAMPLE_DEFAULT_K = {"ex4.1": 16, "ex4.2": 8, "tensor-chain": 16, "haar-fkl": 500}

COMMANDS = {
    "parse": cmd_parse, "derive": cmd_derive, "eval": cmd_eval, "spectrum": cmd_spectrum,
    "nullity": cmd_nullity, "fkl": cmd_fkl, "decay": cmd_decay, "chebproj": cmd_chebproj,
    "cover": cmd_cover, "dimfit": cmd_dimfit, "rogers": cmd_rogers, "binding": cmd_binding,
    "volume": cmd_volume, "a3seq": cmd_a3seq, "verify": cmd_verify, "example": cmd_example,
}


# ------------------------------------------------------------------- parser

def _common(p, k=4, n=1):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=k)
    p.add_argument("--n", type=int, default=n)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _poly_args(p):
    p.add_argument("--poly", action="append", help="polynomial text; repeat or separate by ';'")
    p.add_argument("--poly-file", help="file with one polynomial per line")


def _point_args(p):
    p.add_argument("--kind", choices=("haar_unitary", "gue_selfadjoint", "commuting_diagonal"))
    p.add_argument("--input", help="matrix tuple JSON {k, n, mats: [{re, im}]}")


def _spectral(sub, name, help_):
    p = sub.add_parser(name, help=help_)
    _common(p)
    _poly_args(p)
    _point_args(p)
    p.add_argument("--calc", choices=("s", "sa", "u"), default="s")
    p.add_argument("--tau", type=float)
    return p


def _cloud_args(p):
    p.add_argument("--input", help="points as .npy, .csv or JSON {points: [...]}")
    p.add_argument("--shape", choices=("gaussian", "segment", "square"), default="gaussian")
    p.add_argument("--points", type=int, default=12)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--metric", choices=("l2", "l2_normalized", "operator_norm"), default="l2")
    p.add_argument("--mode", choices=("exact", "greedy"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="freedim", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"freedim {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, h in (("parse", "normal form and statistics"), ("derive", "symbolic derivative"),
                    ("eval", "evaluate at a matrix tuple")):
        p = sub.add_parser(name, help=h)
        _common(p)
        _poly_args(p)
        if name == "derive":
            p.add_argument("--calc", choices=("s", "sa", "u"), default="s")
        if name == "eval":
            _point_args(p)
    _spectral(sub, "spectrum", "singular values of the evaluated derivative")
    _spectral(sub, "nullity", "normalized nullity and rank")
    _spectral(sub, "fkl", "Fuglede-Kadison-Luck determinant")
    p = _spectral(sub, "decay", "geometric-decay partial sums")
    p.add_argument("--eps0", type=float, default=0.5)
    p.add_argument("--ks", type=int, nargs="+")
    p.add_argument("--nmax", type=int, default=20)

    p = sub.add_parser("chebproj", help="spectral cut-off projection")
    _common(p, k=16)
    p.add_argument("--C", type=float, default=2.0)
    p.add_argument("--input", help="matrix JSON {re, im}")
    p.add_argument("--matrix", action="store_true", help="include the projection matrix")

    p = sub.add_parser("cover", help="covering and packing numbers")
    _common(p)
    _cloud_args(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--restricted", action="store_true", help="centers must be cloud points")

    p = sub.add_parser("dimfit", help="slope of log K against |log eps|")
    _common(p)
    _cloud_args(p)
    p.add_argument("--eps0", type=float, default=0.2)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--grid", type=float, nargs="+")

    p = sub.add_parser("rogers", help="ball covering estimate")
    _common(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--C_r", type=float, default=1.0)

    p = sub.add_parser("binding", help="projection-valued binding around a point")
    _common(p, k=8)
    _poly_args(p)
    _point_args(p)
    p.add_argument("--rho", type=float, default=0.01)
    p.add_argument("--R", type=float, default=2.0)
    p.add_argument("--pairs", type=int, default=50)

    p = sub.add_parser("volume", help="Schatten ball volumes")
    _common(p, k=2)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--samples", type=int, default=0, help="Monte Carlo samples (0: skip)")

    p = sub.add_parser("a3seq", help="volume-ratio sequence g(k)")
    _common(p)
    p.add_argument("--kmax", type=int, default=40)

    p = sub.add_parser("verify", help="run a property suite")
    _common(p)
    p.add_argument("suite", choices=sorted(SUITES) + ["all"])
    p.add_argument("--trials", type=int)

    p = sub.add_parser("example", help="run a worked pipeline")
    _common(p, k=None)
    p.add_argument("name", choices=sorted(EXAMPLES))
    p.add_argument("--eps0", type=float, default=0.5)
    return ap


def _flat_csv(res) -> str | None:
    """``key,value`` rows for a report whose values are all scalars."""
    if not isinstance(res, dict):
        return None
    rows = ["key,value"]
    for k, v in res.items():
        if isinstance(v, (dict, list, tuple)):
            return None
        rows.append(f"{k},{v}")
    return "\n".join(rows) + "\n"


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        res = COMMANDS[args.command](args)
    except (UsageError, ValueError, KeyError, FileNotFoundError) as exc:
        print(f"freedim {args.command}: error: {exc}", file=sys.stderr)
        return 2
    csv_text = None
    if isinstance(res, tuple):
        res, csv_text = res
    if args.format == "csv":
        if csv_text is None:
            csv_text = _flat_csv(res)
        if csv_text is None:
            print(f"freedim {args.command}: error: no CSV form for this command", file=sys.stderr)
            return 2
        _emit(csv_text, args.out)
    else:
        report = {"command": args.command, "config": vars(args), "versions": versions(),
                  "seconds": time.perf_counter() - t0, "results": res}
        _emit(json.dumps(_clean(json.loads(json.dumps(report, default=_json_default))),
                         indent=2), args.out)
    ok = res.get("holds", True) if isinstance(res, dict) else True
    if args.command in ("verify", "example", "chebproj") and ok is False:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
