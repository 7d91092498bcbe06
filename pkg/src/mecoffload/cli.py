"""Command-line entry point for running simulations and verification."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import default_config, load_config, save_config
from .env import FrameObservation, sample_channel
from .harness import (
    read_trace_csv,
    replay_ratio,
    run_baseline,
    run_learned,
    run_learned_on_reference,
    summarize,
    sweep,
    write_summary,
    write_trace_csv,
)
from .oracles import refined_reference_p4
from .policy import save_checkpoint
from .resource_alloc import solve_resource_allocation


def _load_cfg(args):
    cfg = load_config(args.config) if args.config else default_config()
    return cfg


def _add_common(p):
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--frames", type=int, default=10000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--trace", help="write a per-frame CSV trace here")
    p.add_argument("--summary", help="write key=value summary here")


def _finish(res, args):
    s = summarize(res.trace)
    for k, v in s.items():
        print(f"{k} = {v}")
    if args.trace:
        write_trace_csv(args.trace, res.trace)
    if args.summary:
        write_summary(args.summary, s)


def cmd_run(args) -> int:
    cfg = _load_cfg(args)
    if args.algorithm == "drl":
        res = run_learned(cfg, args.frames, seed=args.seed)
        if args.checkpoint:
            save_checkpoint(res.mlp, args.checkpoint)
    else:
        res = run_baseline(cfg, args.frames, args.algorithm, seed=args.seed)
    _finish(res, args)
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_cfg(args)
    values = [float(v) for v in args.values.split(",")]
    rows = sweep(cfg, args.frames, args.parameter, values,
                 algorithm=args.algorithm, seed=args.seed)
    keys = list(rows[0].keys())
    print(",".join(keys))
    for row in rows:
        print(",".join(str(row[k]) for k in keys))
    if args.out:
        with open(args.out, "w") as fp:
            fp.write(",".join(keys) + "\n")
            for row in rows:
                fp.write(",".join(str(row[k]) for k in keys) + "\n")
    return 0


def cmd_replay(args) -> int:
    """Train the learned scheduler on a frozen reference trajectory and
    report the per-frame objective ratio."""
    cfg = _load_cfg(args)
    ref, learned = run_learned_vs_reference(cfg, args)
    ratios = replay_ratio(learned, ref)
    tail = ratios[-min(500, len(ratios)):]
    print(f"median_ratio_all = {np.median(ratios)}")
    print(f"median_ratio_tail = {np.median(tail)}")
    if args.out:
        np.savetxt(args.out, ratios)
    return 0


def run_learned_vs_reference(cfg, args):
    """Run the reference scheduler, freeze its observation trajectory, and
    train the learned scheduler on the same frames."""
    ref = run_baseline(cfg, args.frames, "cd", seed=args.seed)
    return ref, run_learned_on_reference(cfg, ref, seed=args.seed)


def cmd_oracle_check(args) -> int:
    """Spot-check the closed-form allocator against the brute-force
    references on random small instances."""
    cfg = default_config().with_devices(args.devices)
    rng = np.random.default_rng(args.seed)
    gains = cfg.mean_gains()
    worst = 0.0
    for k in range(args.instances):
        h = sample_channel(rng, cfg, gains)
        Q = rng.exponential(10.0, cfg.N)
        Y = rng.exponential(1.0, cfg.N)
        obs = FrameObservation(t=1, h=h, Q=Q, Y=Y)
        x = rng.integers(0, 2, cfg.N)
        if x.sum() > 3:
            x[np.where(x == 1)[0][3:]] = 0
        _, G = solve_resource_allocation(x, obs, cfg)
        ref = refined_reference_p4(x, obs, cfg)
        gap = (ref - G) / max(abs(ref), 1e-9)
        worst = max(worst, gap)
        print(f"instance {k}: algorithm={G:.6f} reference={ref:.6f} gap={gap:.3e}")
    print(f"worst_gap = {worst:.3e}")
    return 0 if worst < 1e-3 else 1


def cmd_summarize(args) -> int:
    """Recompute windowed metrics from a saved trace CSV."""
    trace = read_trace_csv(args.trace_path)
    frac = 0.3
    if args.window is not None:
        if not 0 < args.window <= trace.frames:
            raise SystemExit("window must be positive and no longer than the trace")
        frac = args.window / trace.frames
    for k, v in summarize(trace, frac).items():
        print(f"{k} = {v}")
    return 0


def cmd_write_config(args) -> int:
    save_config(default_config(), args.out)
    print(f"wrote defaults to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mecoffload",
        description="Stable online computation offloading simulator",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="simulate one algorithm")
    _add_common(pr)
    pr.add_argument("--algorithm", choices=("drl", "cd", "myopic"),
                    default="drl")
    pr.add_argument("--checkpoint", help="save the trained actor here")
    pr.set_defaults(func=cmd_run)

    ps = sub.add_parser("sweep", help="sweep a parameter")
    _add_common(ps)
    ps.add_argument("--algorithm", choices=("drl", "cd", "myopic"),
                    default="drl")
    ps.add_argument("--parameter", required=True,
                    choices=("lambda", "gamma", "V", "N"))
    ps.add_argument("--values", required=True,
                    help="comma-separated sweep values")
    ps.add_argument("--out", help="CSV output path")
    ps.set_defaults(func=cmd_sweep)

    pp = sub.add_parser(
        "replay", help="train on a frozen reference trajectory and compare")
    _add_common(pp)
    pp.add_argument("--out", help="write per-frame ratios here")
    pp.set_defaults(func=cmd_replay)

    po = sub.add_parser(
        "oracle-check", help="compare the allocator with brute force")
    po.add_argument("--devices", type=int, default=3)
    po.add_argument("--instances", type=int, default=20)
    po.add_argument("--seed", type=int, default=1)
    po.set_defaults(func=cmd_oracle_check)

    pz = sub.add_parser("summarize", help="recompute metrics from a trace CSV")
    pz.add_argument("trace_path")
    pz.add_argument("--window", type=int,
                    help="trailing window length in frames (default: 30%%)")
    pz.set_defaults(func=cmd_summarize)

    pw = sub.add_parser("write-config", help="emit the default config file")
    pw.add_argument("out")
    pw.set_defaults(func=cmd_write_config)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
