"""Command line interface: ``zeromass <subcommand> ...``.

Every subcommand prints a JSON report on stdout.  Profiles are CSV files with
columns ``t,v,dv`` (or ``r,phi,dphi``); parameter files are JSON objects with
keys ``N``, ``A``, ``alpha``, ``p``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ._validation import ConvergenceError, DomainError
from .io import dumps, load_params, read_profile, write_profile

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TIMEOUT = 2


def _emit(report) -> None:
    sys.stdout.write(dumps(report) + "\n")


def cmd_bessel_eval(args) -> int:
    from .bessel import bessel_eval

    ev = bessel_eval(args.nu, args.t, scaled=args.scaled)
    _emit({"nu": ev.order, "t": ev.argument, "I": ev.i_value, "K": ev.k_value, "regime": ev.regime.value, "scaled": ev.scaled})
    return EXIT_OK


def cmd_solve(args) -> int:
    from .green import FixedPointOptions, builtin_init, fixed_point_solve
    from .scaling import membership_report

    params = load_params(args.params)
    if args.init.startswith("builtin:"):
        init = builtin_init(args.init.split(":", 1)[1])
    else:
        init = read_profile(args.init)
    opts = FixedPointOptions(max_iter=args.max_iter, tol=args.tol, damping=args.damping)
    res = fixed_point_solve(params, init, opts)
    report = {"params": params.as_dict(), **res.report()}
    if res.converged and not res.trivial:
        report["membership"] = membership_report(params, res.profile).as_dict()
    if args.out:
        write_profile(res.profile, args.out)
        report["profile"] = str(args.out)
    _emit(report)
    return EXIT_OK if res.converged else EXIT_ERROR


def cmd_shoot(args) -> int:
    from .shooting import bisect_ground_state, integrate_v

    params = load_params(args.params)
    if args.v0 is not None:
        tr = integrate_v(params, args.v0)
        report = {"params": params.as_dict(), **tr.as_dict()}
        profile = tr.profile
    else:
        lo, hi = (float(x) for x in args.bracket.split(","))
        gs = bisect_ground_state(params, (lo, hi), rel_width=args.rel_width)
        report = {"params": params.as_dict(), **gs.as_dict()}
        profile = gs.profile
    if args.out and profile is not None:
        write_profile(profile, args.out)
        report["profile"] = str(args.out)
    _emit(report)
    return EXIT_OK


def _as_v(params, profile):
    from .scaling import PhiProfile, v_from_phi

    return v_from_phi(params, profile) if isinstance(profile, PhiProfile) else profile


def cmd_verify_asymptotics(args) -> int:
    from .asymptotics import OriginCase, fit_origin_behavior, predicted_origin_behavior

    params = load_params(args.params)
    v = _as_v(params, read_profile(args.profile))
    pred = predicted_origin_behavior(params)
    meas = fit_origin_behavior(v, params)
    ok = meas.case == pred.case
    if ok and pred.case is OriginCase.POWER:
        ok = abs(meas.fitted_exponent - float(pred.t_exponent)) <= args.exponent_tol
    _emit({"params": params.as_dict(), "predicted": pred.as_dict(), "measured": meas.as_dict(), "constants": pred.constants, "pass": ok})
    return EXIT_OK if ok else EXIT_ERROR


def cmd_pohozaev_check(args) -> int:
    from .pohozaev import identity_residual, in_obstruction_region, limit_gate, obstruction
    from .scaling import PhiProfile, phi_from_v

    params = load_params(args.params)
    prof = read_profile(args.profile)
    phi = prof if isinstance(prof, PhiProfile) else phi_from_v(params, prof)
    b = args.b if args.b is not None else float(phi.grid[-1])
    rep = identity_residual(params, phi, args.a, b)
    report = {"params": params.as_dict(), **rep.as_dict(), "pass": rep.passes(args.tol)}
    if args.b is None:
        gate, values = limit_gate(params, phi)
        report["limit_taken"] = gate
        report["boundary_terms_last_decades"] = values
    if in_obstruction_region(params):
        report["obstruction"] = obstruction(params, phi, args.a).as_dict()
    _emit(report)
    return EXIT_OK if report["pass"] else EXIT_ERROR


def _load_config(path) -> dict:
    return json.loads(Path(path).read_text()) if path else {}


def cmd_region_map(args) -> int:
    from .regions import ScanSpec, parse_range, save_map, scan_grid

    cfg = _load_config(args.config)

    def pick(name, default=None):
        val = getattr(args, name)
        return val if val is not None else cfg.get(name, default)

    dim = int(pick("N", 3))
    alphas = parse_range(pick("alpha", "0.05:3.95:0.1"))
    ps = parse_range(pick("p", "2.05:8:0.05"))
    # the problem needs alpha > 0 and p > 2; points outside are dropped
    alphas = [a for a in alphas if a > 0]
    ps = [p for p in ps if p > 2]
    spec = ScanSpec(
        dim=dim,
        alpha_range=(alphas[0], alphas[-1]) if alphas else (0, 0),
        p_range=(ps[0], ps[-1]) if ps else (0, 0),
        resolution=(len(alphas), len(ps)),
        with_numerics=bool(pick("with_numerics", False)),
        cell_budget=float(pick("cell_budget", 30.0)),
        alpha_grid=tuple(alphas),
        p_grid=tuple(ps),
    )
    region_map = scan_grid(spec, workers=int(pick("workers", 1)))
    out = pick("out", "region_map.csv")
    svg = pick("svg")
    save_map(region_map, out, svg)
    timed_out = region_map.timed_out()
    _emit({"csv": out, "svg": svg, "shape": list(region_map.shape), "counts": region_map.counts(), "timed_out": timed_out})
    if timed_out and pick("strict", False):
        return EXIT_TIMEOUT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zeromass", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bessel-eval", help="evaluate I_nu(t) and K_nu(t)")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--scaled", action="store_true", help="return exp(-t) I and exp(t) K")
    p.set_defaults(func=cmd_bessel_eval)

    p = sub.add_parser("solve", help="fixed-point iteration of the integral equation")
    p.add_argument("--params", required=True)
    p.add_argument("--init", default="builtin:expdecay", help="profile CSV or builtin:expdecay")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--out", help="write the profile CSV here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("shoot", help="integrate from v(0)=v0, or bisect a bracket")
    p.add_argument("--params", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--v0", type=float)
    g.add_argument("--bracket", help="low,high")
    p.add_argument("--rel-width", type=float, default=1e-12)
    p.add_argument("--out", help="write the trajectory CSV here")
    p.set_defaults(func=cmd_shoot)

    p = sub.add_parser("verify-asymptotics", help="compare measured and predicted origin behaviour")
    p.add_argument("--params", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--exponent-tol", type=float, default=0.05)
    p.set_defaults(func=cmd_verify_asymptotics)

    p = sub.add_parser("pohozaev-check", help="residual of the Pohozaev-type identity on [a, b]")
    p.add_argument("--params", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float)
    p.add_argument("--tol", type=float, default=1e-5)
    p.set_defaults(func=cmd_pohozaev_check)

    p = sub.add_parser("region-map", help="classify a grid of (alpha, p) and render it")
    p.add_argument("--N", type=int)
    p.add_argument("--alpha", help="a:b:s")
    p.add_argument("--p", help="a:b:s")
    p.add_argument("--with-numerics", action="store_true", default=None)
    p.add_argument("--out")
    p.add_argument("--svg")
    p.add_argument("--config", help="JSON file with the same keys as the flags")
    p.add_argument("--strict", action="store_true", default=None, help="exit 2 if any cell timed out")
    p.add_argument("--workers", type=int)
    p.add_argument("--cell-budget", type=float)
    p.set_defaults(func=cmd_region_map)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (DomainError, ConvergenceError, OSError, ValueError) as exc:
        sys.stderr.write(f"zeromass {args.command}: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
