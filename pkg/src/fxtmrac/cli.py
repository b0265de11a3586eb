"""Command-line front end: ``design``, ``simulate``, ``sweep`` and ``verify``.

Exit codes: 0 ok, 2 infeasible or unverified design, 3 invalid config,
4 simulation blow-up (``verify`` returns 1 when a property fails).
"""

import argparse
import json
import os
import sys

import numpy as np

from .exceptions import DesignError, InvalidInputError, SimulationBlowUp

EXIT_OK = 0
EXIT_FAILED_CHECKS = 1
EXIT_INFEASIBLE = 2
EXIT_CONFIG = 3
EXIT_BLOWUP = 4


def _parser():
    p = argparse.ArgumentParser(prog="fxtmrac", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--preset", help="named preset, e.g. paper-sec5")
        sp.add_argument("--config", help="JSON config merged over the preset")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="seed for sampling-based design steps")

    def sim_flags(sp):
        sp.add_argument("--dt", type=float, help="integration step")
        sp.add_argument("--t-end", type=float, dest="t_end", help="final time")
        sp.add_argument("--no-disturbance", action="store_true")
        sp.add_argument("--estimator", choices=["fxt", "baseline", "off"])

    d = sub.add_parser("design", help="run the design chain and print a report")
    common(d)
    d.add_argument("--audit", action="store_true",
                   help="compare printed values against the formulas")

    s = sub.add_parser("simulate", help="simulate one scenario")
    common(s)
    sim_flags(s)

    w = sub.add_parser("sweep", help="simulate several initial parameter estimates")
    common(w)
    sim_flags(w)
    w.add_argument("--theta0", type=float, nargs="+", default=[0.0, 10.0, 100.0],
                   help="each value v gives the initial estimate v * ones")
    w.add_argument("--workers", type=int, default=1)

    v = sub.add_parser("verify", help="run the property suite")
    common(v)
    return p


def _overrides(args):
    ov = {"simulation": {}, "estimator": {}}
    if args.seed is not None:
        ov["simulation"]["seed"] = args.seed
    if getattr(args, "dt", None) is not None:
        ov["simulation"]["dt"] = args.dt
    if getattr(args, "t_end", None) is not None:
        ov["simulation"]["t_end"] = args.t_end
    if getattr(args, "no_disturbance", False):
        ov["simulation"]["disturbance"] = False
    if getattr(args, "estimator", None) is not None:
        ov["estimator"]["kind"] = args.estimator
    return {k: v for k, v in ov.items() if v}


def _load(args):
    from .config import load_config

    preset = args.preset
    if preset is None and args.config is None:
        preset = "paper-sec5"
    return load_config(preset=preset, path=args.config, overrides=_overrides(args))


def _emit(obj, args, name):
    from .sim import _jsonable

    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True)
    print(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, name), "w") as fh:
            fh.write(text + "\n")


def _design(args, cfg):
    from .config import audit, build_design

    rep = build_design(cfg)
    out = rep.as_dict()
    if args.audit:
        out["audit"] = audit(cfg, rep)
    _emit(out, args, "design.json")
    if not rep.design.verified:
        print("design not verified: " + "; ".join(rep.design.lmi.reasons), file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _checked_report(cfg):
    from .config import build_design

    rep = build_design(cfg)
    if not rep.design.verified:
        raise DesignError("design not verified: " + "; ".join(rep.design.lmi.reasons))
    return rep


def _simulate(args, cfg):
    from .sim import run, scenario_from_config

    sc = scenario_from_config(cfg, _checked_report(cfg))
    traj = run(sc)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    traj.to_csv(os.path.join(out, "trajectory.csv"))
    args.out = out
    _emit(traj.summary, args, "summary.json")
    return EXIT_OK


def _sweep(args, cfg):
    from .sim import scenario_from_config, sweep_initial_conditions

    sc = scenario_from_config(cfg, _checked_report(cfg))
    p = sc.n * sc.n
    res = sweep_initial_conditions(sc, [np.full(p, v) for v in args.theta0],
                                   workers=args.workers)
    _emit(res, args, "sweep.json")
    return EXIT_OK


def _verify(args, cfg):
    from .verify import run_suite

    results = run_suite(cfg)
    failures = [r.name for r in results if not r.passed]
    _emit({"n_checks": len(results), "failures": failures,
           "checks": [r.as_dict() for r in results]}, args, "verify.json")
    return EXIT_OK if not failures else EXIT_FAILED_CHECKS


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = _load(args)
    except InvalidInputError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    handler = {"design": _design, "simulate": _simulate, "sweep": _sweep,
               "verify": _verify}[args.command]
    try:
        return handler(args, cfg)
    except SimulationBlowUp as exc:
        print(f"simulation blow-up: {exc} (row {exc.row}, t={exc.t})", file=sys.stderr)
        return EXIT_BLOWUP
    except DesignError as exc:
        print(f"design failed: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InvalidInputError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
