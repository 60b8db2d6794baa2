"""Command-line entry point: ``python -m friction_flow <command> ...``.

Exit codes: 0 success, 1 solver failure (or a failed property check),
2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings
from pathlib import Path

from . import diagnostics
from .config import ConfigError, load_config
from .newton import LinearSolveFailed, NewtonDiverged
from .output import HEADERS, STUDY_HEADERS, write_rows, write_snapshot, write_time_series
from .regularizer import property_report
from .stepper import build_discretization, run_simulation
from .stress import recover_boundary_stress

log = logging.getLogger("friction_flow")

COMMANDS = ("run", "eps-study", "stability", "sweep", "verify-regularizer", "constants")


def _out_dir(args, cfgfile) -> Path:
    return Path(args.out or cfgfile.output_dir)


def _print_table(header, rows):
    print("  ".join(header))
    for row in rows:
        print("  ".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))


def cmd_run(args) -> int:
    cf = load_config(args.config)
    cfg = cf.run
    out = _out_dir(args, cf)
    traj = run_simulation(cfg)
    disc = traj.disc
    write_time_series(out / "timeseries.csv", traj.records, cfg.bc_kind)
    if cfg.snapshots != "none":
        ks = range(1, len(traj.states)) if cfg.snapshots == "all" else [len(traj.states) - 1]
        for k in ks:
            prev, cur = traj.states[k - 1], traj.states[k]
            stress = recover_boundary_stress(prev, cur, cfg, disc)
            write_snapshot(cur, disc.space, out / f"snapshot_{k:05d}.vtk", stress)
    last = traj.records[-1]
    print(f"{len(traj.records)} steps to t={traj.final.t:.6g}; energy={last['energy']:.6g} comp_residual={last['comp_residual']:.3g}")
    return 0


def cmd_eps_study(args) -> int:
    cf = load_config(args.config)
    eps = args.eps or cf.study.eps_list
    if not eps:
        raise ConfigError("eps-study needs study.eps_list (or --eps)", None, args.config)
    rows = diagnostics.epsilon_study(cf.run, sorted(eps, reverse=True))
    table = [[r.epsilon, r.l2_difference, r.comp_residual, r.j_gap, r.eps_int_g] for r in rows]
    write_rows(_out_dir(args, cf) / "eps_study.csv", STUDY_HEADERS["eps-study"], table)
    _print_table(STUDY_HEADERS["eps-study"], table)
    return 0


def cmd_stability(args) -> int:
    cf = load_config(args.config)
    deltas = args.delta0 or cf.study.delta0 or [1e-3, 5e-4]
    table = []
    for d0 in deltas:
        res = diagnostics.stability_study(cf.run, d0, seed=cf.study.seed)
        table += [[d0, t, e] for t, e in zip(res.times, res.error_series)]
        print(f"delta0={d0:g}  K(T)={res.amplification:.6g}  max K={res.max_amplification:.6g}")
    write_rows(_out_dir(args, cf) / "stability.csv", STUDY_HEADERS["stability"], table)
    return 0


def cmd_sweep(args) -> int:
    cf = load_config(args.config)
    g_list = args.g or cf.study.g_list
    if not g_list:
        raise ConfigError("sweep needs study.g_list (or --g)", None, args.config)
    rows = diagnostics.threshold_sweep(cf.run, g_list)
    table = [[r.g, r.state, r.trace_norm, r.stress_max] for r in rows]
    write_rows(_out_dir(args, cf) / "sweep.csv", STUDY_HEADERS["sweep"], table)
    _print_table(STUDY_HEADERS["sweep"], table)
    mono = diagnostics.sweep_is_monotone(rows)
    print("monotone" if mono else "NOT monotone")
    return 0


def cmd_verify_regularizer(args) -> int:
    rows = property_report(tuple(args.eps or (1e-1, 1e-2, 1e-3)), n_samples=args.samples, seed=args.seed)
    width = max(len(r[0]) for r in rows)
    for name, ok, worst in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  worst={worst:.3e}")
    if args.out:
        write_rows(Path(args.out) / "regularizer.csv", STUDY_HEADERS["verify-regularizer"], rows)
    return 0 if all(r[1] for r in rows) else 1


def cmd_constants(args) -> int:
    cf = load_config(args.config, require=())
    disc = build_discretization(cf.run)
    est = diagnostics.estimate_constants(disc.forms, n_samples=cf.study.samples, seed=cf.study.seed)
    print(f"alpha_h = {est.alpha_h:.10g}")
    print(f"gamma1_h = {est.gamma1_h:.10g}")
    print(f"leak_budget = alpha_h/(8*gamma1_h) = {est.leak_budget:.10g}")
    if args.out:
        write_rows(Path(args.out) / "constants.csv", STUDY_HEADERS["constants"], [[est.alpha_h, est.gamma1_h, est.leak_budget]])
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="friction_flow", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--threads", type=int, help="worker cap for studies (sets FRICTION_FLOW_THREADS)")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_config(name, helptext):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        return p

    with_config("run", "integrate one configuration")
    p = with_config("eps-study", "epsilon-Cauchy study")
    p.add_argument("--eps", type=float, nargs="+")
    p = with_config("stability", "perturbed-initial-data study")
    p.add_argument("--delta0", type=float, nargs="+")
    p = with_config("sweep", "stick/slip or seal/leak threshold sweep")
    p.add_argument("--g", type=float, nargs="+")
    with_config("constants", "discrete Korn and trace constants")
    p = sub.add_parser("verify-regularizer", help="sampled regularizer property checks")
    p.add_argument("--eps", type=float, nargs="+")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    return ap


_HANDLERS = {
    "run": cmd_run,
    "eps-study": cmd_eps_study,
    "stability": cmd_stability,
    "sweep": cmd_sweep,
    "verify-regularizer": cmd_verify_regularizer,
    "constants": cmd_constants,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads:
        os.environ["FRICTION_FLOW_THREADS"] = str(args.threads)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NewtonDiverged, LinearSolveFailed, RuntimeError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1


__all__ = ["main", "build_parser", "COMMANDS", "HEADERS"]
