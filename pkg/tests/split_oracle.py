"""Exhaustive Gini split search in exact arithmetic, plus a fixed instance corpus."""

import random
from fractions import Fraction


def gini(pos, tot):
    if tot == 0:
        return Fraction(0)
    p = Fraction(pos, tot)
    return 1 - p * p - (1 - p) * (1 - p)


def exhaustive_root_split(X, y, min_samples_leaf=1):
    """(feature, threshold) maximizing impurity decrease, or None if nothing helps.

    Candidates are midpoints between consecutive distinct values; ties go to the
    lowest feature, then the lowest threshold.
    """
    n = len(y)
    parent = gini(sum(y), n)
    best = None
    for f in range(len(X[0])):
        values = sorted({row[f] for row in X})
        for a, b in zip(values, values[1:]):
            thr = (a + b) / 2
            left = [yy for row, yy in zip(X, y) if row[f] <= thr]
            right = [yy for row, yy in zip(X, y) if row[f] > thr]
            if len(left) < min_samples_leaf or len(right) < min_samples_leaf:
                continue
            gain = parent - Fraction(len(left), n) * gini(sum(left), len(left)) \
                - Fraction(len(right), n) * gini(sum(right), len(right))
            if gain > 0 and (best is None or gain > best[0]):
                best = (gain, f, thr)
    return None if best is None else (best[1], best[2])


def split_corpus(n_instances=200, seed=2024):
    rng = random.Random(seed)
    out = []
    while len(out) < n_instances:
        n_feat = rng.choice((1, 2))
        n = rng.randint(2, 8)
        X = [[float(rng.randint(0, 4)) for _ in range(n_feat)] for _ in range(n)]
        y = [rng.randint(0, 1) for _ in range(n)]
        if 0 < sum(y) < n:
            out.append((X, y))
    return out
