"""Command line entry point: ``mol run | suite | eval | metrics | gradcheck``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .harness import (
    SUITES,
    ConfigError,
    TrialAborted,
    aggregate,
    check_trial,
    load_config,
    preset,
    run_suite,
    run_trial,
    suite_matrix,
)
from .harness import io
from .harness.trial import trial_id
from .metrics import evaluate_controller, evaluation_grid, population_set
from .ppo import ppo_gradient_check


def _base_config(args):
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = preset("full" if args.paper_scale else args.preset)
    overrides = {}
    if getattr(args, "scenario", None) and isinstance(args.scenario, str):
        overrides["scenario"] = args.scenario
    if getattr(args, "selector", None) and isinstance(args.selector, str):
        overrides["selector"] = args.selector
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.config and args.paper_scale:
        overrides.update({k: v for k, v in preset("full").to_dict().items()
                          if k in ("population", "rollouts", "updates_per_rollout", "generations",
                                   "total_simulations", "steps")})
    return cfg.with_overrides(**overrides) if overrides else cfg


def cmd_run(args) -> int:
    cfg = _base_config(args)
    out = Path(args.out)
    status = 0
    for seed in range(cfg.seed, cfg.seed + cfg.trials):
        tdir = out / trial_id(cfg, seed)
        try:
            res = run_trial(cfg, seed, tdir, resume=args.resume)
        except TrialAborted as exc:
            print(f"{tdir.name}: aborted ({exc})", file=sys.stderr)
            status = 1
            continue
        print(f"{res.trial_id}: test-grid {res.test_grid_mean_distance:.4f}  "
              f"population {res.population_mean_distance:.4f}  density {res.quadrant_density:.3f}  -> {tdir}")
    return status


def cmd_suite(args) -> int:
    cfg = _base_config(args)
    matrix = suite_matrix(args.suite, cfg)
    if args.scenario:
        matrix["scenarios"] = args.scenario
    if args.selector:
        matrix["selectors"] = args.selector
    seeds = range(cfg.seed, cfg.seed + cfg.trials)
    rows = run_suite(cfg, seeds=seeds, out=args.out, workers=args.workers, **matrix)
    for r in rows:
        print(f"{r['variant']:>10} {r['scenario']:>8} {r['selector']:>7}  n={r['trials']}  "
              f"grid {r['test_grid_mean_distance_mean']:.4f}±{r['test_grid_mean_distance_std']:.4f}  "
              f"pop {r['population_mean_distance_mean']:.4f}±{r['population_mean_distance_std']:.4f}")
    return 0


def cmd_eval(args) -> int:
    tdir = Path(args.trial)
    cfg = load_config(tdir / io.CONFIG)
    actor, _, chash = io.load_checkpoint(tdir / io.CHECKPOINT)
    if chash != cfg.hash():
        print(f"warning: checkpoint hash {chash} does not match config {cfg.hash()}", file=sys.stderr)
    scenario = args.scenario or cfg.scenario
    if args.commands:
        eval_set = population_set(np.loadtxt(args.commands, delimiter=",", ndmin=2))
    elif args.set == "population":
        eval_set = population_set(io.last_population(tdir / io.POPULATION))
    else:
        eval_set = evaluation_grid(cfg.bounds, cfg.grid_points)
    dist, records = evaluate_controller(actor, eval_set, scenario, args.steps or cfg.steps,
                                        bounds=cfg.bounds, settle_fraction=cfg.settle_fraction)
    if args.out:
        io.write_eval(Path(args.out), records)
    print(f"{eval_set.kind}: {len(records)} commands, mean distance {dist:.6f}")
    return 0


def cmd_metrics(args) -> int:
    path = Path(args.path)
    if (path / io.SUMMARY).exists():
        bad = check_trial(path)
        for k, (logged, again) in bad.items():
            print(f"{k}: logged {logged} recomputed {again}")
        print("metrics match the logs" if not bad else f"{len(bad)} metric(s) differ")
        return 1 if bad else 0
    rows = aggregate(path)
    print(json.dumps(rows, indent=2, default=str))
    return 0


def cmd_gradcheck(args) -> int:
    failed = 0
    for seed in range(args.instances):
        rep = ppo_gradient_check(seed, args.tolerance)
        failed += not rep.passed
        if args.verbose or not rep.passed:
            print(f"seed {seed}: max relative error {rep.max_rel_error:.2e} {'ok' if rep.passed else 'FAIL'}")
    print(f"{args.instances - failed}/{args.instances} instances within {args.tolerance:g}")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mol", description=__doc__)
    verbose = argparse.ArgumentParser(add_help=False)
    verbose.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, multi=False):
        sp.add_argument("--config", help="YAML config file")
        sp.add_argument("--preset", default="desk", help="desk, smoke or full (ignored with --config)")
        sp.add_argument("--paper-scale", action="store_true", help="population 50, 45k simulations, 400 steps")
        action = "append" if multi else "store"
        sp.add_argument("--scenario", action=action)
        sp.add_argument("--selector", action=action)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--trials", type=int)
        sp.add_argument("--out", default="results")

    sp = sub.add_parser("run", parents=[verbose], help="run one or more trials")
    common(sp)
    sp.add_argument("--resume", action="store_true", help="continue from state.pkl if present")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("suite", parents=[verbose], help="run a matrix of trials and aggregate")
    common(sp, multi=True)
    sp.add_argument("--suite", default="baseline", choices=sorted(SUITES))
    sp.add_argument("--workers", type=int, help="process count (default: MOL_WORKERS or 1)")
    sp.set_defaults(func=cmd_suite)

    sp = sub.add_parser("eval", parents=[verbose], help="evaluate a trained checkpoint")
    sp.add_argument("trial", help="trial directory")
    sp.add_argument("--set", choices=("grid", "population"), default="grid")
    sp.add_argument("--commands", help="CSV of commands (vx,vy,wz) instead of --set")
    sp.add_argument("--scenario")
    sp.add_argument("--steps", type=int)
    sp.add_argument("--out", help="write per-command records here")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("metrics", parents=[verbose], help="recompute metrics from logs (trial or suite directory)")
    sp.add_argument("path")
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("gradcheck", parents=[verbose], help="finite-difference check of the PPO gradients")
    sp.add_argument("--instances", type=int, default=50)
    sp.add_argument("--tolerance", type=float, default=1e-4)
    sp.set_defaults(func=cmd_gradcheck)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
