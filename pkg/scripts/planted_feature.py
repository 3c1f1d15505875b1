"""Plant a signal in a single feature and check that importances find it.

Vulnerable accounts behave exactly like robust ones except for a larger geo
pool, and campaigns only widen the geo pool, so ``uniq_geos`` should rank first.

    python3 scripts/planted_feature.py
"""

import argparse
from dataclasses import replace

from earlywarn.exercise import preset
from earlywarn.features import FEATURE_NAMES
from earlywarn.ingest import build_ledger
from earlywarn.pipeline import run_exercise
from earlywarn.synth import DEFAULT_ARCHETYPES, SynthSpec, generate, periodic_campaigns


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--accounts", type=int, default=30_000)
    ap.add_argument("--seed", type=int, default=1111)
    ap.add_argument("--geo-pool", type=float, default=6.0)
    args = ap.parse_args()

    arch = dict(DEFAULT_ARCHETYPES)
    arch["robust"] = replace(arch["robust"], daily_login_rate=1.0)
    arch["vulnerable"] = replace(arch["robust"], name="vulnerable", geo_pool=args.geo_pool,
                                 vulnerability=1.0)
    n_vuln = args.accounts // 20
    spec = SynthSpec(counts={"robust": args.accounts - n_vuln, "vulnerable": n_vuln},
                     seed=args.seed, archetypes=arch,
                     campaigns=periodic_campaigns(118, max(1, args.accounts * 80 // 30_000),
                                                  geo_mult=2.0, asn_mult=1.0, ua_mult=1.0,
                                                  rate_mult=1.0))
    logins, flags, _ = generate(spec)
    result = run_exercise(build_ledger(logins, flags), logins, preset("ce_b"))
    imp = result.model.feature_importances
    print("rank\tfeature\tname\timportance_pct")
    for rank, i in enumerate(imp.argsort()[::-1], start=1):
        print(f"{rank}\tf{i + 1}\t{FEATURE_NAMES[i]}\t{100 * imp[i]:.2f}")
    print("\nAUC by horizon: " + ", ".join(f"H{h} {result.report.auc(h):.3f}"
                                           for h in result.report.horizons))


if __name__ == "__main__":
    main()
