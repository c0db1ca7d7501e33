"""Command-line entry point.

Subcommands: run (trial campaigns), eval-frames (frame-level detection
accuracy), stats (summaries + hypothesis tests on logs), latency
(client latency report), gen-config (reference YAML with all defaults).
Exit codes: 0 success, 2 configuration/input error, 1 internal error.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import config as cfgmod
from .clients import EmptyLog, LatencyLog, latency_report
from .sim.render import oracle_detect, _project_bbox
from .sim.scene import ConfigError, randomize_positions
from .sim.trial import METHODS, run_trial
from .sim.agent import pose_from_heading
from .stats import (InvalidInput, build_matrix, format_summary_table,
                    format_test_results, frame_eval, read_trial_csv,
                    read_trial_log, run_method_tests, summarize,
                    write_summary_csv)


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0, help="base RNG seed")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--config", default=None, help="YAML config file")
    parser.add_argument("--verbose", action="store_true")


def cmd_run(args):
    cfg = cfgmod.load_config(args.config)
    run = cfg["run"]
    trials = args.trials if args.trials is not None else int(run["trials"])
    participants = args.participants if args.participants is not None else int(run["participants"])
    methods = args.methods or list(run["methods"])
    objects = args.objects or list(run["objects"])
    if trials < 1:
        raise ConfigError("run.trials must be >= 1")
    if participants < 1:
        raise ConfigError("run.participants must be >= 1")
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"run.methods: unknown method preset {m!r}")

    os.makedirs(args.out, exist_ok=True)
    log_path = os.path.join(args.out, "trials.jsonl")
    records = []
    index = 0
    with open(log_path, "w") as f:
        for method in methods:
            trial_cfg = cfgmod.trial_config_from_config(cfg, method=method)
            for target in objects:
                for p in range(participants):
                    for t in range(trials):
                        seed = args.seed + index
                        index += 1
                        scene = randomize_positions(
                            cfgmod.scene_from_config(cfg, target=target), seed)
                        params = cfgmod.agent_params_from_config(cfg, seed=seed)
                        record = run_trial(scene, params, trial_cfg, seed)
                        row = json.loads(record.to_json_line())
                        row["participant"] = f"P{p + 1}"
                        row["object"] = target
                        f.write(json.dumps(row, sort_keys=True) + "\n")
                        records.append(row)
                        if args.verbose:
                            print(f"{method} {target} P{p + 1} trial {t + 1}: "
                                  f"success={record.success} total={record.total_time_s:.2f}s")
    table = summarize(records, group_key=("method",))
    print(format_summary_table(table))
    write_summary_csv(table, os.path.join(args.out, "summary.csv"))
    print(f"\n{len(records)} records -> {log_path}")
    return 0


def cmd_eval_frames(args):
    cfg = cfgmod.load_config(args.config)
    intr = cfgmod.intrinsics_from_config(cfg)
    trial_cfg = cfgmod.trial_config_from_config(cfg)
    target_id = cfg["scene"]["target"]
    rng = np.random.default_rng(args.seed)
    frames = []
    for i in range(args.samples):
        scene = randomize_positions(cfgmod.scene_from_config(cfg, target=target_id), args.seed + i)
        target = scene.target
        present = bool(rng.random() < 0.5)
        if not present:
            # Remove the target from the frame entirely.
            import dataclasses
            scene = dataclasses.replace(
                scene, objects=tuple(o for o in scene.objects if o.id != target_id),
                target_id=scene.objects[0].id if scene.objects[0].id != target_id
                else scene.objects[1].id)
        base = scene.camera_start.translation
        yaw = float(rng.uniform(-20.0, 20.0))
        pose = pose_from_heading(base, yaw, 0.0)
        truth = None
        if present and _project_bbox(target, pose, intr) is not None:
            truth = target.label
        predicted = oracle_detect(scene, pose, intr, target.label, rng,
                                  occlusion_eps_m=trial_cfg.occlusion_eps_m)
        noise = trial_cfg.noise
        if predicted is not None and rng.random() < noise.miss_prob:
            predicted = None
        if predicted is None and rng.random() < noise.false_positive_prob:
            predicted = oracle_detect(scene, pose, intr, target.label, rng,
                                      occlusion_eps_m=trial_cfg.occlusion_eps_m,
                                      force_wrong=True)
        frames.append((truth, predicted))
    target_label = cfgmod.scene_from_config(cfg, target=target_id).target.label
    accuracy, (lo, hi), fp, fn = frame_eval(frames, target_label)
    print(f"frames:          {len(frames)}")
    print(f"accuracy:        {accuracy:.3f}")
    print(f"wilson 95% CI:   [{lo:.3f}, {hi:.3f}]")
    print(f"false positives: {fp}")
    print(f"false negatives: {fn}")
    return 0


def cmd_stats(args):
    records = []
    for path in args.logs:
        if not os.path.exists(path):
            raise ConfigError(f"log file not found: {path}")
        if path.endswith(".csv"):
            records.extend(read_trial_csv(path))
        else:
            records.extend(read_trial_log(path))
    if not records:
        raise ConfigError("no records in the given logs")
    group_key = tuple(args.group_by.split(","))
    table = summarize(records, group_key=group_key)
    print(format_summary_table(table, group_key=group_key))
    methods = sorted({str(r["method"]) for r in records if "method" in r})
    if len(methods) < 2:
        print("\nonly one method present; hypothesis tests skipped")
        return 0
    matrix = build_matrix(records, args.metric, methods=methods)
    results = run_method_tests(matrix, alpha=args.alpha, tests=tuple(args.tests.split(",")))
    print(f"\nmetric: {args.metric}  (per-cell mean over each participant's trials; "
          f"percentages use nearest-rank order statistics)")
    print(format_test_results(results))
    return 0


def cmd_latency(args):
    log = LatencyLog.read_csv(args.log)
    mean, p50, p99, count, error_rate = latency_report(log)
    print("latency report (nearest-rank percentiles)")
    print(f"count:      {count}")
    print(f"mean_s:     {mean:.3f}")
    print(f"p50_s:      {p50:.3f}")
    print(f"p99_s:      {p99:.3f}")
    print(f"error_rate: {error_rate:.3f}")
    return 0


def cmd_gen_config(args):
    text = cfgmod.reference_yaml()
    if args.out and args.out != ".":
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "reference-config.yaml")
        with open(path, "w") as f:
            f.write(text)
        print(path)
    else:
        print(text, end="")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="reachguide",
                                     description="Deterministic object-retrieval guidance engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a trial campaign")
    _add_common(p)
    p.add_argument("--trials", type=int, default=None, help="trials per object per participant")
    p.add_argument("--participants", type=int, default=None)
    p.add_argument("--methods", nargs="*", default=None, choices=list(METHODS))
    p.add_argument("--objects", nargs="*", default=None, help="target object ids")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval-frames", help="frame-level detection accuracy")
    _add_common(p)
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=cmd_eval_frames)

    p = sub.add_parser("stats", help="summaries and hypothesis tests on trial logs")
    _add_common(p)
    p.add_argument("logs", nargs="+", help="trial logs (.jsonl or .csv)")
    p.add_argument("--metric", default="total_time_s")
    p.add_argument("--tests", default="anova,friedman,t,wilcoxon")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--group-by", default="method")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("latency", help="latency report from a client log CSV")
    _add_common(p)
    p.add_argument("log", help="latency log CSV")
    p.set_defaults(func=cmd_latency)

    p = sub.add_parser("gen-config", help="emit the reference config with all defaults")
    _add_common(p)
    p.set_defaults(func=cmd_gen_config)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidInput, EmptyLog, FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # pragma: no cover - internal failure path
        print(f"internal error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
