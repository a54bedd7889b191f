"""Command-line front end: run constructions, verifications, and emit
machine-readable reports.

One binary, subcommand style.  Reports are JSON on stdout unless --out is
given; human summaries go to stderr.  Exit codes: 0 verification passed,
1 a verified bound failed, 2 input or precondition error.  All commands
are deterministic given their flags and seed; the LOGWEIGHT_THREADS
environment variable caps internal parallelism (grid evaluation is
sequential numpy, so it currently only bounds BLAS threads).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

# BLAS reads its thread caps at load time, so this must run before the
# first numpy import anywhere in the process (the console script enters
# through this module, making here the right place).
if os.environ.get("LOGWEIGHT_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["LOGWEIGHT_THREADS"])

import numpy as np

from . import __version__
from .ball_extension import (ball_lower_bound_check, build_ball_functions,
                             family_from_manifest, verify_family)
from .construction import (ConstructionError, ConstructionParams,
                           ConstructionState, run_construction,
                           verify_tangent_lemmas)
from .envelope import (hadamard_check, log_convex_envelope,
                       polynomial_callable, random_polynomials)
from .series import sandwich_check, split_parity
from .weight_model import WeightFunction, make_weight, weight_from_spec

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2


def _fmt(x) -> str:
    return format(float(x), ".17g")


def render_json(obj, indent: int = 0) -> str:
    """JSON with floats rendered to 17 significant digits (round-trip
    exact for float64), so repeated runs are byte-identical."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(str(k))}: {render_json(v, indent + 1)}'
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {render_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isinf(obj) or math.isnan(obj):
            return json.dumps(str(obj))
        return _fmt(obj)
    return json.dumps(obj)


def _emit_report(d: dict, out_path):
    text = render_json(d) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_weight(args) -> WeightFunction:
    if getattr(args, "weight", None):
        with open(args.weight) as fh:
            return weight_from_spec(json.load(fh))
    if not getattr(args, "family", None):
        raise ValueError("give --family (with optional --params/--table) or --weight")
    table = None
    if getattr(args, "table", None):
        with open(args.table) as fh:
            loaded = json.load(fh)
        table = loaded["table"] if isinstance(loaded, dict) else loaded
    params = [float(p) for p in (args.params or "").split(",") if p != ""]
    return make_weight(args.family, params, table=table)


def _load_state(path: str) -> ConstructionState:
    with open(path) as fh:
        return ConstructionState.from_json_dict(json.load(fh))


def _add_weight_flags(p):
    p.add_argument("--family", help="builtin weight family name")
    p.add_argument("--params", default="", help="comma-separated family parameters")
    p.add_argument("--table", help="JSON file with [[t, omega], ...] pairs")
    p.add_argument("--weight", help='JSON weight spec {"family":, "params":, "table":}')


def _t_range(args, state: ConstructionState):
    t_min = args.t_min if args.t_min is not None else state.t0
    t_max = args.t_max if args.t_max is not None else state.t_last
    return t_min, t_max


def cmd_construct(args) -> int:
    w = _load_weight(args)
    x0 = args.x0 if args.x0 is not None else math.log(args.t0)
    params = ConstructionParams(x0=x0, h=args.h, k_max=args.k_max,
                                t_stop=args.t_stop, root_tol=args.root_tol,
                                auto_restart=args.auto_restart)
    state = run_construction(w, params)
    _emit_report(state.to_json_dict(), args.out)
    print(f"constructed {len(state.lines)} lines, t range "
          f"({state.t0:.6g}, {state.t_last:.6g}]", file=sys.stderr)
    return EXIT_PASS


def cmd_verify_sandwich(args) -> int:
    w = _load_weight(args)
    state = _load_state(args.state)
    pair = split_parity(state)
    t_min, t_max = _t_range(args, state)
    t_grid = np.linspace(t_min, t_max, args.t_points + 1)[1:]
    report = sandwich_check(pair, w, t_grid, theta_count=args.angles)
    _emit_report(report.to_json_dict(), args.out)
    print(f"sandwich {'passed' if report.passed else 'FAILED'}: "
          f"lower margin {report.lower_margin:.3e}, upper margin "
          f"{report.upper_margin:.3e}", file=sys.stderr)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_verify_lemmas(args) -> int:
    w = _load_weight(args)
    state = _load_state(args.state)
    report = verify_tangent_lemmas(state, w, samples_per_interval=args.samples,
                                   delta=args.delta)
    _emit_report(report.to_json_dict(), args.out)
    worst = min((c.worst_margin for c in report.checks), default=math.inf)
    print(f"lemmas {'passed' if report.passed else 'FAILED'}: worst margin "
          f"{worst:.3e}", file=sys.stderr)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_verify_hadamard(args) -> int:
    polys = random_polynomials(args.random_polys, args.max_degree, args.seed)
    fs = [polynomial_callable(c) for c in polys]
    r_grid = np.geomspace(args.r_min, args.r_max, args.r_points)
    report = hadamard_check(fs, r_grid)
    _emit_report(report.to_json_dict(), args.out)
    print(f"hadamard {'passed' if report.passed else 'FAILED'}: min second "
          f"difference {report.min_second_diff:.3e}", file=sys.stderr)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_verify_envelope(args) -> int:
    w = _load_weight(args)
    x_grid = np.linspace(args.x_min, args.x_max, args.x_points)
    result = log_convex_envelope(w, x_grid, gap_bound=args.gap_bound)
    _emit_report(result.to_json_dict(), args.out)
    print(f"envelope gap {result.gap:.6g} "
          f"({'equivalent' if result.equivalent else 'NOT equivalent'} to a "
          "log-convex weight at this bound)", file=sys.stderr)
    return EXIT_PASS if result.equivalent else EXIT_FAIL


def cmd_verify_ball(args) -> int:
    w = _load_weight(args)
    state = _load_state(args.state)
    manifest = {"kind": args.poly_family, "delta": args.delta}
    fam = family_from_manifest(manifest)
    degrees = args.degrees or list(state.es)
    fam_report = verify_family(fam, degrees, sphere_samples=args.sphere_samples,
                               seed=args.seed)
    if not fam_report.passed:
        _emit_report(fam_report.to_json_dict(), args.out)
        print("family conditions FAILED; see report", file=sys.stderr)
        return EXIT_FAIL
    system = build_ball_functions(state, fam, family_report=fam_report)
    t_min, t_max = _t_range(args, state)
    t_grid = np.linspace(t_min, t_max, args.t_points + 1)[1:]
    report = ball_lower_bound_check(system, w, t_grid,
                                    sphere_samples=args.sphere_samples,
                                    seed=args.seed)
    out = {"family": fam_report.to_json_dict(), "lower_bound": report.to_json_dict()}
    _emit_report(out, args.out)
    print(f"ball lower bound {'passed' if report.passed else 'FAILED'}: margin "
          f"{report.lower_margin:.3e}, C = {report.c_measured:.6g}",
          file=sys.stderr)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_emit(args) -> int:
    w = _load_weight(args)
    state = _load_state(args.state)
    pair = split_parity(state)
    t_min, t_max = _t_range(args, state)
    if args.t_points > 0:
        t_grid = np.linspace(t_min, t_max, args.t_points + 1)[1:]
    else:
        t_grid = np.empty(0)
    header = "t,theta,log_g1_abs,log_g2_abs,log_sum,log_omega,lower_margin,upper_margin"
    lines = [header]
    if t_grid.size:
        from .series import eval_series_grid
        g1 = eval_series_grid(pair.g1, t_grid, args.angles)
        g2 = eval_series_grid(pair.g2, t_grid, args.angles)
        log_s = np.logaddexp(g1, g2)
        thetas = 2.0 * math.pi * np.arange(args.angles) / args.angles
        for i, t in enumerate(t_grid):
            log_w = w.log_omega(float(t))
            lo = math.log(0.4) - pair.h + log_w
            hi = math.log(4.0) + log_w
            for j, th in enumerate(thetas):
                row = (t, th, g1[i, j], g2[i, j], log_s[i, j], log_w,
                       log_s[i, j] - lo, hi - log_s[i, j])
                lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"emitted {max(len(lines) - 1, 0)} rows", file=sys.stderr)
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logweight",
        description="Construct and certify lacunary series matching radial weights.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("construct", help="run the tangent-line induction")
    _add_weight_flags(pc)
    pc.add_argument("--h", type=float, default=2.0)
    pc.add_argument("--t0", type=float, default=0.95)
    pc.add_argument("--x0", type=float, default=None, help="overrides --t0")
    pc.add_argument("--t-stop", type=float, default=0.9999)
    pc.add_argument("--k-max", type=int, default=500)
    pc.add_argument("--root-tol", type=float, default=1e-13)
    pc.add_argument("--auto-restart", action="store_true")
    pc.add_argument("--out")
    pc.set_defaults(func=cmd_construct)

    pv = sub.add_parser("verify", help="run a verification suite")
    vsub = pv.add_subparsers(dest="verifier", required=True)

    ps = vsub.add_parser("sandwich")
    _add_weight_flags(ps)
    ps.add_argument("--state", required=True)
    ps.add_argument("--t-points", type=int, default=2000)
    ps.add_argument("--angles", type=int, default=256)
    ps.add_argument("--t-min", type=float, default=None)
    ps.add_argument("--t-max", type=float, default=None)
    ps.add_argument("--out")
    ps.set_defaults(func=cmd_verify_sandwich)

    pl = vsub.add_parser("lemmas")
    _add_weight_flags(pl)
    pl.add_argument("--state", required=True)
    pl.add_argument("--samples", type=int, default=50)
    pl.add_argument("--delta", type=float, default=None)
    pl.add_argument("--out")
    pl.set_defaults(func=cmd_verify_lemmas)

    ph = vsub.add_parser("hadamard")
    ph.add_argument("--random-polys", type=int, default=100)
    ph.add_argument("--seed", type=int, default=7)
    ph.add_argument("--max-degree", type=int, default=30)
    ph.add_argument("--r-points", type=int, default=64)
    ph.add_argument("--r-min", type=float, default=0.05)
    ph.add_argument("--r-max", type=float, default=0.95)
    ph.add_argument("--out")
    ph.set_defaults(func=cmd_verify_hadamard)

    pe = vsub.add_parser("envelope")
    _add_weight_flags(pe)
    pe.add_argument("--x-points", type=int, default=2001)
    pe.add_argument("--x-min", type=float, default=-2.0)
    pe.add_argument("--x-max", type=float, default=-0.005)
    pe.add_argument("--gap-bound", type=float, default=50.0)
    pe.add_argument("--out")
    pe.set_defaults(func=cmd_verify_envelope)

    pb = vsub.add_parser("ball")
    _add_weight_flags(pb)
    pb.add_argument("--state", required=True)
    pb.add_argument("--poly-family", required=True,
                    choices=["monomial_d1", "coordinate_d2"])
    pb.add_argument("--delta", type=float, default=None,
                    help="override the family's claimed delta")
    pb.add_argument("--degrees", type=int, nargs="*", default=None)
    pb.add_argument("--t-points", type=int, default=32)
    pb.add_argument("--sphere-samples", type=int, default=128)
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--t-min", type=float, default=None)
    pb.add_argument("--t-max", type=float, default=None)
    pb.add_argument("--out")
    pb.set_defaults(func=cmd_verify_ball)

    pm = sub.add_parser("emit", help="emit a CSV of grid samples and margins")
    _add_weight_flags(pm)
    pm.add_argument("--state", required=True)
    pm.add_argument("--t-points", type=int, default=10)
    pm.add_argument("--angles", type=int, default=4)
    pm.add_argument("--t-min", type=float, default=None)
    pm.add_argument("--t-max", type=float, default=None)
    pm.add_argument("--out")
    pm.set_defaults(func=cmd_emit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, OverflowError, ConstructionError,
            json.JSONDecodeError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
