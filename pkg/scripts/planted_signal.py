"""Run one exercise on a generated trace and print the evaluation table.

Use ``--signal 0`` for the null control.  The defaults reproduce the 100k
account acceptance run (about 25 s and 1.5 GB on one core).

    python3 scripts/planted_signal.py --signal 1.0
    python3 scripts/planted_signal.py --signal 0.0 --seed 2
"""

import argparse
import time

from earlywarn.exercise import PRESETS, preset
from earlywarn.features import FEATURE_NAMES
from earlywarn.ingest import build_ledger
from earlywarn.metrics import render_table
from earlywarn.pipeline import run_exercise
from earlywarn.synth import SynthSpec, generate, periodic_campaigns


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--accounts", type=int, default=100_000)
    ap.add_argument("--signal", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--victims", type=int, default=250, help="compromised accounts per week")
    ap.add_argument("--preset", default="ce_b", choices=PRESETS)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    n = args.accounts
    counts = {"vulnerable": n // 20, "fake_dormant": n // 100, "fake_active": n // 100}
    counts["robust"] = n - sum(counts.values())
    spec = SynthSpec(counts=counts, n_days=118, seed=args.seed, signal_strength=args.signal,
                     campaigns=periodic_campaigns(118, args.victims))
    t0 = time.perf_counter()
    logins, flags, truth = generate(spec)
    t1 = time.perf_counter()
    ledger = build_ledger(logins, flags)
    result = run_exercise(ledger, logins, preset(args.preset), args.threads)
    t2 = time.perf_counter()

    print(f"{len(logins)} logins, {len(flags)} flags, {len(truth)} accounts; "
          f"generate {t1 - t0:.1f}s, exercise {t2 - t1:.1f}s")
    print(f"training counts: {result.counts}\n")
    print(render_table(result.report))
    imp = result.model.feature_importances
    print("top features: " + ", ".join(f"{FEATURE_NAMES[i]} {100 * imp[i]:.1f}%"
                                       for i in imp.argsort()[::-1][:5]))


if __name__ == "__main__":
    main()
