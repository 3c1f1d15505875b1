"""Command-line front end.

Exit codes: 0 on success, 2 for user or configuration errors (bad files,
infeasible windows, degenerate training data), 1 for anything unexpected.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import parse_list
from .core import DayInterval
from .errors import ConfigError, PipelineError
from .exercise import PRESETS, load_config, preset, with_seed
from .features import FEATURE_NAMES, extract_all, write_feature_dump
from .forest import load_model
from .pipeline import load_trace, run_ce, sha256_file
from .synth import compute_lag_cdf, generate, load_spec, write_trace


def _interval(text: str, flag: str) -> DayInterval:
    try:
        return DayInterval.parse(text)
    except ValueError as exc:
        raise ConfigError(f"{flag}: {exc}") from None


def cmd_synth(args) -> int:
    spec = load_spec(args.config)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    t0 = time.perf_counter()
    logins, flags, truth = generate(spec)
    t1 = time.perf_counter()
    paths = write_trace(args.out_dir, logins, flags, truth)
    t2 = time.perf_counter()
    out = Path(args.out_dir)
    manifest = {
        "version": __version__,
        "seed": spec.seed,
        "config": sha256_file(args.config),
        "counts": {"logins": len(logins), "flags": len(flags), "accounts": len(truth)},
        "outputs": {p.name: sha256_file(p) for p in sorted(paths.values())},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    (out / "timings.json").write_text(
        json.dumps({"generate": t1 - t0, "write": t2 - t1}, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(logins)} logins, {len(flags)} flags, {len(truth)} accounts to {out}")
    return 0


def cmd_lag(args) -> int:
    _, _, ledger = load_trace(args.data_dir)
    interval = _interval(args.interval, "--interval") if args.interval else ledger.coverage
    dist = compute_lag_cdf(ledger, interval)
    print("lag_days\tcumulative_pct")
    for lag, p in dist.cdf:
        print(f"{lag}\t{100 * p:.2f}%")
    return 0


def _exercise_config(args, ledger):
    if args.config:
        config = load_config(args.config)
    else:
        config = preset(args.preset, trace_days=ledger.coverage.length_days)
    if args.seed is not None:
        config = with_seed(config, args.seed)
    changes = {}
    if args.threshold:
        changes["thresholds"] = parse_list(args.threshold, "--threshold", float)
    if args.horizon:
        changes["horizons"] = parse_list(args.horizon, "--horizon", int)
    if args.grid_search:
        changes["grid_search"] = True
    return replace(config, **changes) if changes else config


def cmd_run_ce(args) -> int:
    if (args.config is None) == (args.preset is None):
        raise ConfigError("give exactly one of --config or --preset")
    result = run_ce(args.data_dir, lambda ledger: _exercise_config(args, ledger), args.out_dir,
                    threads=args.threads)
    print((Path(args.out_dir) / "report.txt").read_text(), end="")
    c = result.counts
    print(f"\ntraining: {c['train_positive']} positive / {c['train_negative']} negative "
          f"(of {c['eligible']} eligible)")
    return 0


def cmd_importances(args) -> int:
    model = load_model(args.model)
    names = FEATURE_NAMES if model.n_features == len(FEATURE_NAMES) else \
        tuple(model.feature_order.split(","))
    imp = model.feature_importances
    order = sorted(range(imp.size), key=lambda i: (-imp[i], i))
    print("rank\tfeature\tname\timportance_pct")
    for rank, i in enumerate(order, start=1):
        print(f"{rank}\tf{i + 1}\t{names[i]}\t{100 * imp[i]:.2f}%")
    return 0


def cmd_features(args) -> int:
    logins, _, ledger = load_trace(args.data_dir)
    matrix = extract_all(ledger, logins, _interval(args.window, "--window"), args.unique_rule,
                         args.threads)
    write_feature_dump(args.out, matrix)
    print(f"wrote {len(matrix)} feature vectors to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="earlywarn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic trace")
    p.add_argument("--config", required=True, help="generation spec (key = value)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("lag", help="cumulative flagging-lag table")
    p.add_argument("--data-dir", required=True, help="directory with logins.tsv and flags.tsv")
    p.add_argument("--interval", help="ledger days a..b (default: whole trace)")
    p.set_defaults(func=cmd_lag)

    p = sub.add_parser("run-ce", help="run a classification exercise")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--threshold", help="comma-separated operating thresholds")
    p.add_argument("--horizon", help="comma-separated prediction horizons in days")
    p.add_argument("--grid-search", action="store_true")
    p.set_defaults(func=cmd_run_ce)

    p = sub.add_parser("importances", help="ranked feature importances of a model file")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_importances)

    p = sub.add_parser("features", help="dump per-account feature vectors for a window")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--window", required=True, help="ledger days a..b")
    p.add_argument("--out", required=True)
    p.add_argument("--unique-rule", default="daily_sum", choices=("daily_sum", "window_distinct"))
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_features)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - the exit-code contract needs a catch-all
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
