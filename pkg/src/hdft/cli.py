"""Command-line front end.

Every command builds a report and prints it (JSON by default).  Exit codes:
0 when every verdict passes, 1 when any fails, 2 for usage errors.

Config files are flat ``key = value`` text, ``#`` starts a comment.
``HDFT_THREADS`` caps the worker count of the commands that fan out.
"""

from __future__ import annotations

import argparse
import cmath
import configparser
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

__all__ = ["main", "run", "build_parser", "dumps", "read_config", "threads", "UsageError"]


class UsageError(ValueError):
    """Bad flag values; reported with exit code 2."""


# ---------------------------------------------------------------- output

def _enc(x):
    if hasattr(x, "to_json"):
        return _enc(x.to_json())
    if hasattr(x, "_asdict"):
        return _enc(x._asdict())
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            r = format(x, ".17g")
            return r if any(c in r for c in ".en") else r + ".0"
        return json.dumps(str(x))
    if isinstance(x, complex):
        return _enc({"re": x.real, "im": x.imag})
    if isinstance(x, Fraction):
        return json.dumps(str(x))
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_enc(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_enc(v) for v in x) + "]"
    return json.dumps(str(x))


def dumps(obj) -> str:
    """JSON with every float printed to 17 significant digits."""
    return _enc(obj)


def _text(obj, indent=0):
    pad = "  " * indent
    out = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                out.append(f"{pad}{k}:")
                out.extend(_text(v, indent + 1))
            else:
                out.append(f"{pad}{k}: {_enc(v)}")
    elif isinstance(obj, list):
        for v in obj:
            out.append(f"{pad}- {_enc(v)}")
    else:
        out.append(pad + _enc(obj))
    return out


def _csv(report):
    import csv
    import io

    rows = report.get("results", {}).get("rows")
    if not rows:
        raise UsageError("this command has no tabular output; use --format json")
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow({k: (format(v, ".17g") if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


# ---------------------------------------------------------------- parsing helpers

def threads() -> int:
    v = os.environ.get("HDFT_THREADS", "1")
    try:
        n = int(v)
    except ValueError:
        raise UsageError(f"HDFT_THREADS must be an integer, got {v!r}") from None
    return max(1, n)


def read_config(path) -> dict:
    """Flat ``key = value`` file as a dict of strings."""
    try:
        with open(path) as fh:
            body = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + body)
    except configparser.Error as e:
        raise UsageError(f"bad config {path}: {e}") from None
    return dict(cp["run"])


def _complex(s):
    try:
        return complex(s.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"not a complex number: {s!r}") from None


def _points(s, n):
    pts = [_complex(p) for p in s.split(",")]
    if len(pts) != n:
        raise UsageError(f"--at needs {n} comma-separated points")
    return pts


def _vectors(s, n=None, name="--windings"):
    try:
        vs = [tuple(int(a) for a in part.split(",")) for part in s.split(";")]
    except ValueError:
        raise UsageError(f"{name}: integer triples separated by ';'") from None
    if any(len(v) != 3 for v in vs) or (n is not None and len(vs) not in n):
        raise UsageError(f"{name}: wrong number of triples")
    return vs


def _labels(args, n):
    from .fock_oracle import label

    ws = _vectors(args.windings, n)
    ms = _vectors(args.momenta, (len(ws),), "--momenta") if args.momenta else [(0, 0, 0)] * len(ws)
    return [label(w, m) for w, m in zip(ws, ms)]


def _bool(s):
    return str(s).strip().lower() not in ("0", "false", "no", "off")


def _verdict(name, ok, **detail):
    return {"name": name, "pass": bool(ok), **detail}


# ---------------------------------------------------------------- commands

def cmd_dilog_eval(a):
    from .special_functions import bloch_wigner, li2, rogers_L

    z = _complex(a.z)
    res = {"z": z, "li2": li2(z), "rogers_L": rogers_L(z)}
    if z.imag != 0:
        res["bloch_wigner"] = bloch_wigner(z)
    return res, []


def cmd_dilog_identities(a):
    from .special_functions import check_landen, check_pentagon, check_reflection

    xs = np.linspace(0.01, 0.99, 100)
    refl = [max(check_reflection(float(x))) for x in xs]
    cz = [complex(r * math.cos(th), r * math.sin(th))
          for r in (0.3, 0.8, 1.7) for th in (0.4, 1.3, 2.2, -0.7, -2.5)]
    crefl = [max(check_reflection(z)) for z in cz]
    g = np.linspace(0.01, 0.99, 20)
    pent = [check_pentagon(float(x), float(y)) for x in g for y in g]
    land = [check_landen(z) for z in list(xs) + cz]
    tol = a.tol
    res = {"reflection_real": max(refl), "reflection_complex": max(crefl),
           "pentagon": max(pent), "landen": max(land), "tolerance": tol}
    v = [_verdict("reflection", max(refl + crefl) < tol),
         _verdict("pentagon", max(pent) < tol),
         _verdict("landen", max(land) < tol)]
    return res, v


def cmd_algebra_jacobi(a):
    from .mode_algebra import verify_jacobi

    r = verify_jacobi(a.max_mode, flux=not a.no_flux)
    return ({"max_mode": r.max_mode, "checked": r.checked,
             "failures": [str(f) for f in r.failures[:20]]},
            [_verdict("jacobi", r.ok)])


def cmd_algebra_currents(a):
    from .fock_oracle import realize_via_currents

    r = realize_via_currents(a.max_mode, flux=not a.no_flux)
    return ({"max_mode": r.max_mode, "checked": r.checked,
             "failures": [str(f) for f in r.failures[:20]]},
            [_verdict("currents", r.ok)])


def cmd_corr_four(a):
    from .correlators import (four_point_closed, four_point_oracle,
                              four_point_swapped, four_point_swapped_closed)
    from .fock_oracle import label

    al, be, ga = _labels(a, (3,))
    delta = al + be + ga if a.delta is None else label(*_vectors(a.delta, (1, 2), "--delta"))
    flux = not a.no_flux
    closed_fn = four_point_swapped_closed if a.swapped else four_point_closed
    series, form = closed_fn(delta, al, be, ga, a.order, flux=flux)
    res = {"closed_form": form, "series": series}
    v = []
    if a.oracle:
        fn = four_point_swapped if a.swapped else four_point_oracle
        o = fn(delta, al, be, ga, a.order, weight=a.weight, flux=flux)
        res["oracle"] = o
        v.append(_verdict("oracle_equals_closed", o == series))
    return res, v


def _sweep_one(job):
    from .correlators import (four_point_closed, four_point_oracle,
                              four_point_swapped, four_point_swapped_closed)
    from .fock_oracle import label

    w, order, flux = job
    al, be, ga = (label(x) for x in w)
    d = al + be + ga
    ok1 = four_point_oracle(d, al, be, ga, order, flux=flux) == \
        four_point_closed(d, al, be, ga, order, flux=flux)[0]
    ok2 = four_point_swapped(d, al, be, ga, order, flux=flux) == \
        four_point_swapped_closed(d, al, be, ga, order, flux=flux)[0]
    return w, ok1, ok2


def four_point_sweep(order=6, flux=True, values=(-1, 0, 1), workers=1):
    """Oracle against closed form, both orderings, for every winding triple.

    ``alpha, beta, gamma`` each range over ``values^3``.
    """
    import itertools

    vecs = list(itertools.product(values, repeat=3))
    jobs = [(w, order, flux) for w in itertools.product(vecs, repeat=3)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(_sweep_one, jobs, chunksize=256))
    else:
        out = [_sweep_one(j) for j in jobs]
    return [{"windings": ";".join(",".join(map(str, w)) for w in ws),
             "forward": f, "swapped": s} for ws, f, s in out]


def cmd_corr_sweep(a):
    rows = four_point_sweep(a.order, not a.no_flux, workers=threads())
    bad = [r for r in rows if not (r["forward"] and r["swapped"])]
    return ({"order": a.order, "checked": len(rows), "failures": bad[:20]},
            [_verdict("sweep", not bad)])


def cmd_corr_five(a):
    from .correlators import (factorization_check, five_point_closed,
                              five_point_oracle, five_point_raw)

    labs = _labels(a, (4,))
    psi = labs[0] + labs[1] + labs[2] + labs[3]
    z, w, t = _points(a.at, 3)
    flux = not a.no_flux
    closed = five_point_closed(psi, *labs, z, w, t, flux=flux)
    res = {"points": [z, w, t], "closed": closed}
    v = []
    if a.raw:
        raw = five_point_raw(psi, *labs, z, w, t, flux=flux)
        rr = abs(raw - closed) / abs(closed)
        res.update(raw=raw, raw_residual=rr)
        v.append(_verdict("raw_vs_closed", rr < 1e-10))
    if a.factorize:
        f = factorization_check(psi, *labs, z, w, t, flux=flux)
        res.update(factorization=f)
        v.append(_verdict("factorization", f["residual"] < 1e-10))
    if a.oracle:
        o = five_point_oracle(psi, *labs, z, w, t, weight=a.weight, flux=flux)
        err = abs(o.value - closed)
        res.update(oracle=o.value, oracle_bound=o.bound, oracle_error=err,
                   weight=o.weight, overflow=o.overflow, underflow=o.underflow)
        v.append(_verdict("oracle_vs_closed", err < a.tol and not (o.overflow or o.underflow)))
    return res, v


def cmd_corr_identities(a):
    from .correlators import beta_sum_identity_sweep, expansion_identity_check

    e = expansion_identity_check(a.order)
    b = beta_sum_identity_sweep(a.max_total)
    return ({"expansion": e, "beta_sum": b},
            [_verdict("expansion_identity", e.ok), _verdict("beta_sum_identity", b.ok)])


def cmd_geom_prop1(a):
    from .hyperbolic_geometry import prop1_phase

    ws = _vectors(a.windings, (3,))
    z, w = _points(a.at, 2)
    r = prop1_phase(*ws, z, w)
    return r, [_verdict("prop1", r["residual"] < a.tol)]


def cmd_geom_prop2(a):
    from .hyperbolic_geometry import prop2_check

    ws = _vectors(a.windings, (4,))
    z1, z2, z3 = _points(a.at, 3)
    r = prop2_check(*ws, z1, z2, z3)
    return r, [_verdict("prop2", r["residual"] < a.tol)]


def cmd_geom_regular(a):
    from .hyperbolic_geometry import INF, IdealTetrahedron, ideal_volume

    vol = ideal_volume(IdealTetrahedron(INF, 0, 1, cmath.exp(1j * math.pi / 3)))
    return {"volume": vol, "reference": 1.0149416}, [
        _verdict("regular_volume", abs(vol - 1.0149416) < 1e-6)]


def cmd_dyn_simulate(a):
    from .worldsheet_dynamics import simulate

    cfg = read_config(a.config) if a.config else {}
    cfg["model"] = a.model or cfg.get("model", "torus")
    if a.csv:
        cfg["csv"] = a.csv
    man, _ = simulate(cfg)
    v = [_verdict("finite", man["finite"])]
    if "max_drift" in cfg:
        v.append(_verdict("energy_drift", man["relative_drift"] < float(cfg["max_drift"])))
    return man, v


def cmd_dyn_duality(a):
    from .worldsheet_dynamics import tduality_refinement

    cfg = read_config(a.config) if a.config else {}
    levels = tuple(int(x) for x in cfg.get("levels", "64,128,256").split(","))
    kw = {
        "T": float(cfg.get("T", 0.25)),
        "winding": tuple(int(x) for x in cfg.get("winding", "1,0,1").split(",")),
        "amplitude": float(cfg.get("amplitude", 0.2)),
        "seed": int(cfg.get("seed", 1)),
        "system": cfg.get("system", "direct"),
        "covariant": _bool(cfg.get("covariant", "false")),
        "sigma_sign": int(cfg.get("sigma_sign", -1)),
        "flux": _bool(cfg.get("flux", "true")),
        "cfl": float(cfg.get("cfl", 0.25)),
    }
    r = tduality_refinement(levels, **kw)
    min_slope = float(cfg.get("min_slope", 1.8))
    res = r["rows"]
    decreasing = all(res[i + 1]["residual"] < res[i]["residual"] for i in range(len(res) - 1))
    floor = float(cfg.get("floor", 1e-8))
    at_floor = all(x["residual"] < floor for x in res)
    ok = at_floor or (decreasing and r["min_slope"] >= min_slope)
    return {"config": kw, **r}, [_verdict("tduality_convergence", ok)]


def cmd_dyn_circle(a):
    from .worldsheet_dynamics import torus_tduality_check

    R = Fraction(a.radius)
    if R <= 0:
        raise UsageError("--radius must be positive")
    r = torus_tduality_check(R * R, 1 / (R * R), bound=a.bound)
    return r, [_verdict("circle_spectrum", r["match"] and r["pairing_preserved"])]


def cmd_ground_theta(a):
    from .ground_states import theta_peaks

    peaks = theta_peaks(a.t, a.n, a.x2, a.grid)
    n = abs(a.n)
    want = [k / n for k in range(n)] if n else []
    cell = 1.0 / a.grid
    ok = len(peaks) == len(want) and all(
        min(abs(p - q), 1 - abs(p - q)) <= cell for p, q in zip(sorted(peaks), want))
    return {"t": a.t, "n": a.n, "grid": a.grid, "peaks": peaks, "expected": want}, [
        _verdict("theta_peaks", ok)]


def cmd_ground_count(a):
    from .ground_states import bs_count_twisted, heisenberg_sector_count

    rows = []
    ok = True
    B = a.bound
    for w2 in range(-B, B + 1):
        for w3 in range(-B, B + 1):
            t = bs_count_twisted((0, w2, w3))
            h = heisenberg_sector_count(w2, w3, 0)
            same = (t.modulus, t.free) == (h.modulus, h.free)
            ok &= same
            rows.append({"w2": w2, "w3": w3, "twisted_modulus": t.modulus,
                         "heisenberg_modulus": h.modulus, "free": t.free, "agree": same})
    return {"bound": B, "rows": rows}, [_verdict("gcd_moduli", ok)]


def cmd_ground_duality(a):
    from .ground_states import duality_label_table

    r = duality_label_table(a.bound)
    return r, [_verdict("label_bijection", r["bijection"])]


# ---------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="hdft", description="Verification and simulation reports.")
    p.add_argument("--format", choices=("json", "text", "csv"), default="json")
    p.add_argument("--output", help="write the report here instead of stdout")
    # the same flags after the subcommand; SUPPRESS keeps the top-level default
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text", "csv"), default=argparse.SUPPRESS)
    common.add_argument("--output", default=argparse.SUPPRESS)
    top = p.add_subparsers(dest="group", required=True)

    def sub(group, name, fn, help_):
        q = group.add_parser(name, help=help_, parents=[common])
        q.set_defaults(fn=fn)
        return q

    g = top.add_parser("dilog").add_subparsers(dest="cmd", required=True)
    q = sub(g, "eval", cmd_dilog_eval, "evaluate Li2, L and D at a point")
    q.add_argument("--z", required=True)
    q = sub(g, "identities", cmd_dilog_identities, "reflection, pentagon and Landen residuals")
    q.add_argument("--tol", type=float, default=1e-12)

    g = top.add_parser("algebra").add_subparsers(dest="cmd", required=True)
    for name, fn in (("jacobi", cmd_algebra_jacobi), ("currents", cmd_algebra_currents)):
        q = sub(g, name, fn, f"{name} check up to a mode bound")
        q.add_argument("--max-mode", type=int, required=True)
        q.add_argument("--no-flux", action="store_true")

    g = top.add_parser("corr").add_subparsers(dest="cmd", required=True)
    q = sub(g, "four", cmd_corr_four, "4-point closed form, optionally against the oracle")
    q.add_argument("--windings", required=True)
    q.add_argument("--momenta")
    q.add_argument("--delta", help="winding[;momentum] of the ket")
    q.add_argument("--order", type=int, default=6)
    q.add_argument("--weight", type=int)
    q.add_argument("--oracle", action="store_true")
    q.add_argument("--swapped", action="store_true")
    q.add_argument("--no-flux", action="store_true")
    q = sub(g, "sweep", cmd_corr_sweep, "oracle against closed form over a winding sweep")
    q.add_argument("--order", type=int, default=6)
    q.add_argument("--no-flux", action="store_true")
    q = sub(g, "five", cmd_corr_five, "5-point closed form and its checks")
    q.add_argument("--windings", required=True)
    q.add_argument("--momenta")
    q.add_argument("--at", required=True)
    q.add_argument("--oracle", action="store_true")
    q.add_argument("--raw", action="store_true")
    q.add_argument("--factorize", action="store_true")
    q.add_argument("--weight", type=int, default=16)
    q.add_argument("--tol", type=float, default=1e-6)
    q.add_argument("--no-flux", action="store_true")
    q = sub(g, "identities", cmd_corr_identities, "exact series identities")
    q.add_argument("--order", type=int, default=8)
    q.add_argument("--max-total", type=int, default=12)

    g = top.add_parser("geom").add_subparsers(dest="cmd", required=True)
    q = sub(g, "prop1", cmd_geom_prop1, "4-point phase against one tetrahedron")
    q.add_argument("--windings", default="1,0,0;0,1,0;0,0,1")
    q.add_argument("--at", default="4,1+1i")
    q.add_argument("--tol", type=float, default=1e-8)
    q = sub(g, "prop2", cmd_geom_prop2, "5-point phase against four tetrahedra")
    q.add_argument("--windings", default="1,0,0;0,1,0;0,0,1;1,1,1")
    q.add_argument("--at", default="8,2+1i,0.3+0.4i")
    q.add_argument("--tol", type=float, default=1e-8)
    sub(g, "regular", cmd_geom_regular, "volume of the regular ideal tetrahedron")

    g = top.add_parser("dyn").add_subparsers(dest="cmd", required=True)
    q = sub(g, "simulate", cmd_dyn_simulate, "evolve a worldsheet")
    q.add_argument("--model", choices=("torus", "heisenberg"))
    q.add_argument("--config")
    q.add_argument("--csv", help="snapshot CSV path")
    q = sub(g, "duality", cmd_dyn_duality, "T-duality refinement study")
    q.add_argument("--config")
    q = sub(g, "circle", cmd_dyn_circle, "circle R <-> 1/R zero-mode spectra")
    q.add_argument("--radius", required=True)
    q.add_argument("--bound", type=int, default=5)

    g = top.add_parser("ground").add_subparsers(dest="cmd", required=True)
    q = sub(g, "theta", cmd_ground_theta, "theta peak scan")
    q.add_argument("--t", type=float, default=1e-3)
    q.add_argument("--n", type=int, default=3)
    q.add_argument("--x2", type=float, default=0.0)
    q.add_argument("--grid", type=int, default=1000)
    q = sub(g, "count", cmd_ground_count, "gcd moduli on both sides")
    q.add_argument("--bound", type=int, default=6)
    q = sub(g, "duality", cmd_ground_duality, "w1 <-> p1 label bijection")
    q.add_argument("--bound", type=int, default=3)
    return p


def run(argv):
    """Parse, dispatch and return ``(report, exit_code)``."""
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    results, verdicts = args.fn(args)
    inputs = {k: v for k, v in vars(args).items() if k not in ("fn", "output", "format")}
    report = {
        "command": f"{args.group} {args.cmd}",
        "inputs": inputs,
        "results": results,
        "verdicts": verdicts,
        "pass": all(v["pass"] for v in verdicts),
        "wall_time_s": time.perf_counter() - t0,
    }
    return report, args, (0 if report["pass"] else 1)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        report, args, code = run(argv)
        if args.format == "json":
            out = dumps(report) + "\n"
        elif args.format == "text":
            out = "\n".join(_text(report)) + "\n"
        else:
            out = _csv(report)
    except UsageError as e:
        print(f"hdft: error: {e}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as e:
        # library precondition failures are treated as bad input
        print(f"hdft: error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
