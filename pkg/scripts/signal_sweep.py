"""AUC as a function of signal strength, averaged over seeds.

    python3 scripts/signal_sweep.py --accounts 30000 --seeds 1 2
"""

import argparse

import numpy as np

from earlywarn.exercise import preset
from earlywarn.ingest import build_ledger
from earlywarn.pipeline import run_exercise
from earlywarn.synth import SynthSpec, generate, periodic_campaigns


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--accounts", type=int, default=30_000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--strengths", type=float, nargs="+",
                    default=[0.0, 0.1, 0.25, 0.5, 0.75, 1.0])
    args = ap.parse_args()

    n = args.accounts
    counts = {"vulnerable": n // 20, "fake_dormant": n // 100, "fake_active": n // 100}
    counts["robust"] = n - sum(counts.values())
    victims = max(1, n * 250 // 100_000)
    config = preset("ce_b")
    print("signal\t" + "\t".join(f"AUC_H{h}" for h in config.horizons))
    for s in args.strengths:
        aucs = []
        for seed in args.seeds:
            spec = SynthSpec(counts=counts, seed=seed, signal_strength=s,
                             campaigns=periodic_campaigns(118, victims))
            logins, flags, _ = generate(spec)
            report = run_exercise(build_ledger(logins, flags), logins, config).report
            aucs.append([report.auc(h) for h in config.horizons])
        mean = np.mean(np.array(aucs, dtype=float), axis=0)
        print(f"{s:g}\t" + "\t".join(f"{a:.3f}" for a in mean), flush=True)


if __name__ == "__main__":
    main()
