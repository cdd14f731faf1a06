"""Command-line entry point: ``optorot {point,sweep,stability,verify}``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .dynamics import assess_stability, build_linear_model, random_linear_model
from .lyapunov import (
    LyapunovError,
    covariance_quadrature_oracle,
    lyapunov_residual,
    solve_lyapunov_direct,
    solve_lyapunov_elimination,
)
from .params import ParameterError, ParameterSet, derive_quantities
from .steadystate import bistability_roots, steady_state
from .sweeps import (
    AXES,
    ConfigError,
    SweepSpec,
    evaluate_point,
    find_threshold,
    load_config,
    render_outputs,
    run_sweep,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _load(args):
    if args.config:
        return load_config(args.config)
    return ParameterSet(), None


def cmd_point(args) -> int:
    p, _ = _load(args)
    ev = evaluate_point(p, verify_solvers=args.verify_solvers)
    out = {
        "stable": ev.stable,
        "a_s": ev.steady.a_s,
        "G": ev.steady.G,
    }
    if ev.response is not None:
        r = ev.response
        out.update(omega_eff=r.omega_eff, D_eff=r.D_eff, T_eff=r.T_eff, T_c=r.T_c, nbar=r.nbar, n_m=r.n_m)
    if ev.report is not None:
        rep = ev.report
        out.update(sigma=rep.sigma, detC=rep.detC, eta_minus=rep.eta_minus, E_N=rep.E_N, nu_min=rep.nu_min)
        out["lyapunov_residual"] = ev.residual
    if ev.solver_deviation is not None:
        out["solver_deviation"] = ev.solver_deviation
    if ev.error:
        out["error"] = ev.error
    print(json.dumps(out, indent=2))
    return EXIT_OK if ev.report is not None and ev.error is None else EXIT_NUMERIC


def cmd_sweep(args) -> int:
    p, spec = _load(args)
    if args.axis is not None or spec is None:
        axis = args.axis or (spec.axis if spec else None)
        if axis is None or args.min is None or args.max is None:
            raise ConfigError("sweep needs --axis, --min and --max (or a [sweep] section)")
        spec = SweepSpec.from_range(axis, args.min, args.max, args.points, p, spacing=args.spacing)
    elif args.min is not None or args.max is not None:
        spec = SweepSpec.from_range(
            spec.axis,
            args.min if args.min is not None else min(spec.values),
            args.max if args.max is not None else max(spec.values),
            args.points,
            p,
            spacing=args.spacing,
        )
    result = run_sweep(spec, verify_solvers=args.verify_solvers, workers=args.workers)
    paths = render_outputs(result, args.out)
    n_ent = sum(1 for r in result.rows if r.E_N is not None and r.E_N > 0)
    n_unstable = sum(1 for r in result.rows if not r.stable)
    print(f"{len(result.rows)} points, {n_ent} entangled, {n_unstable} unstable")
    thr = find_threshold(result)
    if thr is not None:
        print(f"E_N > 0 switches at {spec.axis} = {thr:.6g}")
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return EXIT_OK


def cmd_stability(args) -> int:
    p, _ = _load(args)
    d = derive_quantities(p)
    ss = steady_state(p, d)
    v = assess_stability(build_linear_model(ss, p, d, 0.0))
    roots = bistability_roots(p, d, ss.delta_bare)
    print(json.dumps(
        {
            "routh_hurwitz_pass": v.routh_hurwitz_pass,
            "inequality_values": list(v.inequality_values),
            "spectral_abscissa": v.spectral_abscissa,
            "consistent": v.consistent,
            "delta_bare": ss.delta_bare,
            "bistability_roots_phi": roots,
        },
        indent=2,
    ))
    return EXIT_OK if v.stable else EXIT_NUMERIC


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    worst = {"direct_vs_elimination": 0.0, "direct_vs_quadrature": 0.0, "residual": 0.0}
    rh_mismatch = 0
    for _ in range(args.instances):
        m = random_linear_model(rng, stable=True)
        rh_mismatch += not assess_stability(m).consistent
        try:
            c1 = solve_lyapunov_direct(m).C
            c2 = solve_lyapunov_elimination(m).C
            c3 = covariance_quadrature_oracle(m).C
        except LyapunovError as exc:
            print(f"solver failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        s = np.max(np.abs(c1))
        worst["direct_vs_elimination"] = max(worst["direct_vs_elimination"], np.max(np.abs(c1 - c2)) / s)
        worst["direct_vs_quadrature"] = max(worst["direct_vs_quadrature"], np.max(np.abs(c1 - c3)) / s)
        worst["residual"] = max(worst["residual"], lyapunov_residual(m, c1))
    ok = (
        worst["direct_vs_elimination"] <= 1e-8
        and worst["direct_vs_quadrature"] <= 1e-8
        and worst["residual"] <= 1e-10
        and rh_mismatch == 0
    )
    print(json.dumps({"instances": args.instances, "seed": args.seed, "rh_mismatches": rh_mismatch,
                      **{k: float(v) for k, v in worst.items()}, "pass": ok}, indent=2))
    return EXIT_OK if ok else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="optorot", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key = value parameter file")
        sp.add_argument("--verify-solvers", action="store_true",
                        help="cross-check the direct Lyapunov solve by elimination")

    sp = sub.add_parser("point", help="evaluate one parameter set")
    common(sp)
    sp.set_defaults(func=cmd_point)

    sp = sub.add_parser("sweep", help="sweep one axis and write CSV/SVG/JSON")
    common(sp)
    sp.add_argument("--out", default="sweep", help="output path prefix")
    sp.add_argument("--axis", choices=AXES)
    sp.add_argument("--min", type=float)
    sp.add_argument("--max", type=float)
    sp.add_argument("--points", type=int, default=50)
    sp.add_argument("--spacing", choices=("linear", "log"), default="linear")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("stability", help="Routh-Hurwitz verdict and bistability roots")
    common(sp)
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("verify", help="randomized three-way Lyapunov solver check")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--instances", type=int, default=200)
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LyapunovError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
