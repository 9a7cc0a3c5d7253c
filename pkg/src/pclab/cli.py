"""Command-line entry point: simulate, audit, curves, lower-bound, sweep,
serve, and enumerate subcommands.

Every run echoes its fully resolved configuration (seed included), and every
artifact file begins with a comment header carrying the same configuration so
any output can be regenerated from its own first line.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import analytics, battery
from .errors import PclabError
from .experiments import (
    ExperimentSpec,
    audit_sweep,
    run_single_query_lower_bound,
    run_sparse_lower_bound,
    run_two_point_lower_bound,
    verify_upper_bound,
)
from .experts import make_policy
from .learners import LearnerConfig, stick_with_it_k
from .protocol import replay_states, transcript_from_jsonl
from .spaces import build_space


def _int_list(text):
    return [int(item) for item in text.split(",") if item.strip()]


def _str_list(text):
    return [item.strip() for item in text.split(",") if item.strip()]


def _default_jobs():
    return os.cpu_count() or 1


def _echo_config(args, subcommand):
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    print(f"pclab {subcommand} config={json.dumps(config, default=str)}")
    return config


def _write_csv(path, header_config, subcommand, fieldnames, rows):
    with open(path, "w", newline="") as handle:
        handle.write(f"# pclab {subcommand} config={json.dumps(header_config, default=str)}\n")
        writer = csv.DictWriter(handle, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {path}")


def _build_learner(space, args):
    """Resolve --learner/--k/--selection into a LearnerConfig and epoch k."""
    k = stick_with_it_k(space, args.epsilon, args.delta) if args.k == "auto" else int(args.k)
    return LearnerConfig(kind=args.learner, k=k, selection=args.selection), k


def _experiment_spec(args, name):
    space = build_space(args.space)
    learner, k = _build_learner(space, args)
    return ExperimentSpec(
        name=name,
        space=space,
        policy=args.policy,
        learner=learner,
        epsilon=args.epsilon,
        delta=args.delta,
        k=k,
        trials=args.trials,
        seed=args.seed,
    )


# -- subcommands -----------------------------------------------------------------


def cmd_simulate(args):
    if args.replay:
        return _replay(args)
    config = _echo_config(args, "simulate")
    spec = _experiment_spec(args, "simulate")
    sweep = verify_upper_bound(spec, keep_traces=False, jobs=args.jobs)
    rows = [
        {
            "trial": i,
            "steps_used": r.steps_used,
            "switches": r.switches,
            "final_hypothesis": r.final_hypothesis,
            "final_err": f"{r.final_err:.6g}",
            "success": int(r.success),
            "reason": r.reason,
        }
        for i, r in enumerate(sweep.results)
    ]
    print(json.dumps(sweep.summary()))
    if args.out:
        _write_csv(args.out, config, "simulate", list(rows[0]), rows)
    return 0


def _replay(args):
    _echo_config(args, "simulate --replay")
    space = build_space(args.space)
    transcript = transcript_from_jsonl(space, Path(args.replay).read_text())
    step = size = hypothesis = None
    for step, size, hypothesis in replay_states(space, transcript):
        print(f"step={step} version_space={size} hypothesis={hypothesis}")
    if step is None:
        print("empty transcript")
        print(f"final version_space={space.n_hypotheses} hypothesis=0")
        return 0
    label = "" if hypothesis is None else f" label={space.hypothesis_label(hypothesis)}"
    print(f"final version_space={size} hypothesis={hypothesis}{label}")
    return 0


def cmd_audit(args):
    config = _echo_config(args, "audit")
    spec = _experiment_spec(args, "audit")
    sweep = verify_upper_bound(spec, keep_traces=True, jobs=args.jobs)
    reports = audit_sweep(sweep, jobs=args.jobs)
    violations = sum(r.deterministic_violations() for r in reports)
    events = sum(r.lemma3_event for r in reports)
    print(
        f"trials={len(reports)} deterministic_violations={violations} "
        f"lemma3_events={events}"
    )
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(f"# pclab audit config={json.dumps(config, default=str)}\n")
            for i, report in enumerate(reports):
                handle.write(f"trial {i}: {json.dumps(report.to_dict())}\n")
        print(f"wrote {args.out}")
    if args.emit_trace:
        emitted = []
        policy = make_policy(args.policy)
        from .auditor import audit_trace

        audit_trace(sweep.space, sweep.traces[0], policy, sweep.params, emit=emitted.append)
        _write_csv(args.emit_trace, config, "audit", list(emitted[0]), emitted)
    return 1 if violations else 0


def cmd_curves(args):
    config = _echo_config(args, "curves")
    rows = analytics.curve_rows(args.c, args.policies, grid_size=args.grid)
    print(f"rows={len(rows)}")
    if args.out:
        _write_csv(args.out, config, "curves", list(rows[0]), rows)
    return 0


def cmd_lower_bound(args):
    config = _echo_config(args, "lower-bound")
    if args.construction == "single":
        rounds = run_single_query_lower_bound(args.c)
        print(f"rounds_to_half_error={rounds}")
        return 0
    if args.construction == "two-point":
        run = run_two_point_lower_bound(args.c, args.eps, trials=args.trials, seed=args.seed)
    else:
        run = run_sparse_lower_bound(
            args.ell, args.c, args.eps, trials=args.trials, seed=args.seed
        )
    print(
        f"mean_steps={run.mean_steps:.2f} p5_steps={run.p5_steps:.1f} "
        f"min_switches={int(run.switch_counts.min())}"
    )
    if args.out:
        rows = [
            {"trial": i, "steps": int(s), "switches": int(w)}
            for i, (s, w) in enumerate(zip(run.steps, run.switch_counts))
        ]
        _write_csv(args.out, config, "lower-bound", list(rows[0]), rows)
    return 0


def cmd_sweep(args):
    if args.config:
        with open(args.config) as handle:
            import yaml

            overrides = yaml.safe_load(handle) or {}
        for key in ("seed", "trials", "jobs", "criteria"):
            if key in overrides:
                setattr(args, key, overrides[key])
    config = _echo_config(args, "sweep")
    suite = battery.Battery(seed=args.seed, trials=args.trials, jobs=args.jobs)
    results = suite.run(criteria=args.criteria)
    if args.out:
        rows = [
            {
                "criterion": r.criterion,
                "name": r.name,
                "passed": int(r.passed),
                "seconds": f"{r.seconds:.2f}",
            }
            for r in results
        ]
        _write_csv(args.out, config, "sweep", list(rows[0]), rows)
    if args.report:
        with open(args.report, "w") as handle:
            handle.write(f"# pclab sweep config={json.dumps(config, default=str)}\n")
            for r in results:
                handle.write(r.line() + "\n")
                handle.write(f"  details: {json.dumps(r.details, default=str)}\n")
        print(f"wrote {args.report}")
    all_passed = all(r.passed for r in results)
    print("all criteria passed" if all_passed else "some criteria FAILED")
    if args.check:
        return 0 if all_passed else 1
    return 0


def cmd_serve(args):
    _echo_config(args, "serve")
    import uvicorn

    from .service import create_app

    app = create_app(seed=args.seed)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_enumerate(args):
    _echo_config(args, "enumerate")
    space = build_space(args.space)
    print(f"|H|={space.n_hypotheses} c={space.c} |Q|={space.n_queries}")
    print(f"target={space.hypothesis_label(space.target)}")
    return 0


# -- parser ----------------------------------------------------------------------


def _add_run_flags(parser):
    parser.add_argument("--space", required=True, help="space spec, e.g. grid:M=100,c=4,pool=200")
    parser.add_argument("--policy", default="random")
    parser.add_argument("--epsilon", type=float, default=0.2)
    parser.add_argument("--delta", type=float, default=0.1)
    parser.add_argument("--learner", choices=("base", "stick"), default="stick")
    parser.add_argument("--k", default="auto", help='epoch length, or "auto" for ceil(l/eps\')')
    parser.add_argument(
        "--selection",
        choices=("first_index", "seeded_random", "max_ones", "threshold_min"),
        default="seeded_random",
    )
    parser.add_argument("--trials", type=int, default=20)


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=_default_jobs())


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pclab",
        description="Simulation and audit laboratory for learning from partial corrections.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="run trials and write TrialResult rows")
    _add_run_flags(p)
    _add_common(p)
    p.add_argument("--out", help="TrialResult CSV path")
    p.add_argument("--replay", help="replay a JSONL transcript instead of simulating")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("audit", help="run trials and audit every trace")
    _add_run_flags(p)
    _add_common(p)
    p.add_argument("--out", help="per-trial audit report path")
    p.add_argument("--emit-trace", help="per-step w_t summary CSV for trial 0")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("curves", help="closed-form reduction-ratio curve data")
    p.add_argument("--c", type=_int_list, default=[4, 8])
    p.add_argument("--policies", type=_str_list, default=list(analytics.POLICY_NAMES))
    p.add_argument("--grid", type=int, default=512)
    p.add_argument("--out", help="curve CSV path")
    _add_common(p)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("lower-bound", help="run one of the lower-bound constructions")
    p.add_argument("--construction", choices=("single", "two-point", "sparse"), required=True)
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--out", help="per-trial CSV path")
    _add_common(p)
    p.set_defaults(func=cmd_lower_bound)

    p = sub.add_parser("sweep", help="run the acceptance battery")
    p.add_argument("--check", action="store_true", help="exit 1 unless every criterion passes")
    p.add_argument("--criteria", type=_int_list, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--config", help="YAML overrides: seed, trials, jobs, criteria")
    p.add_argument("--out", help="summary CSV path")
    p.add_argument("--report", help="structured-text report path")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("serve", help="start the interactive session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    _add_common(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("enumerate", help="print space statistics")
    p.add_argument("--space", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_enumerate)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PclabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
