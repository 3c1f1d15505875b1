"""Random-forest binary classifier grown with Gini impurity.

Trees are CART-style: candidate thresholds are midpoints between consecutive
distinct values of a feature, a sample goes left when ``x <= threshold``, and
each node searches a uniformly drawn subset of ``features_per_split`` features.
Ties on gain go to the lowest feature index, then the lowest threshold.
Bootstrap resampling is represented by integer sample weights.  Tree ``i``
draws from its own stream seeded with ``(seed, i)``, so a fitted forest does
not depend on how many threads grew it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from itertools import product
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ContractError, DegenerateTrainingError, StratificationError
from .features import FEATURE_ORDER_TAG, N_FEATURES, FeatureVector

FORMAT_VERSION = 1
MIN_GAIN = 1e-12
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ForestHyperparams:
    n_trees: int = 100
    max_depth: int = 12
    min_samples_leaf: int = 5
    features_per_split: int = 3
    bootstrap_fraction: float = 1.0
    seed: int = 0
    bootstrap: bool = True

    def __post_init__(self):
        for name in ("n_trees", "max_depth", "min_samples_leaf", "features_per_split"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ContractError(f"{name} must be a positive integer, got {v}")
        if self.features_per_split > N_FEATURES:
            raise ContractError(f"features_per_split must be <= {N_FEATURES}")
        if not 0.0 < self.bootstrap_fraction <= 1.0:
            raise ContractError(f"bootstrap_fraction must be in (0, 1], got {self.bootstrap_fraction}")


def default_grid(seed: int = 0) -> list[ForestHyperparams]:
    return [ForestHyperparams(n_trees=t, max_depth=d, min_samples_leaf=m, features_per_split=k,
                              bootstrap_fraction=1.0, seed=seed)
            for t, d, m, k in product((50, 100, 200), (8, 12, 16), (1, 5), (3, 6))]


@dataclass
class Tree:
    """Nodes in pre-order.  ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray       # positive-class fraction (weighted)
    n_samples: np.ndarray   # weighted sample count

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            internal = f >= 0
            if not internal.any():
                return node
            go_left = X[rows, np.where(internal, f, 0)] <= self.threshold[node]
            node = np.where(internal, np.where(go_left, self.left[node], self.right[node]), node)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return all(np.array_equal(getattr(self, f.name), getattr(other, f.name))
                   for f in fields(self))


@dataclass
class ForestModel:
    trees: list
    hyperparams: ForestHyperparams
    feature_importances: np.ndarray
    feature_order: str = FEATURE_ORDER_TAG
    n_features: int = N_FEATURES

    def __eq__(self, other):
        if not isinstance(other, ForestModel):
            return NotImplemented
        return (self.hyperparams == other.hyperparams and self.feature_order == other.feature_order
                and self.n_features == other.n_features
                and np.array_equal(self.feature_importances, other.feature_importances)
                and self.trees == other.trees)


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    gain: float


def _gini_score(pos, tot):
    """sum over children of (p^2 + q^2) / n; larger is purer."""
    neg = tot - pos
    return (pos * pos + neg * neg) / tot


def best_split(X, y, w, features, min_samples_leaf: int) -> Split | None:
    """Best Gini split of the weighted node ``(X, y, w)`` over ``features``.

    ``X`` rows, ``y`` 0/1 labels and ``w`` positive weights describe only the
    node's samples.  Returns None when no split has positive gain while keeping
    ``min_samples_leaf`` weight on both sides.
    """
    n = w.sum()
    p = np.dot(w, y)
    parent = _gini_score(p, n)
    best = None
    for f in sorted(features):
        x = X[:, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        cw = np.cumsum(w[order])[:-1]
        cp = np.cumsum((w * y)[order])[:-1]
        ok = (xs[1:] != xs[:-1]) & (cw >= min_samples_leaf) & (n - cw >= min_samples_leaf)
        if not ok.any():
            continue
        idx = np.flatnonzero(ok)
        nl, pl = cw[idx], cp[idx]
        gains = (_gini_score(pl, nl) + _gini_score(p - pl, n - nl) - parent) / n
        # Gains within TIE_TOL are ties (rounding noise): keep the lowest threshold
        # here and the lowest feature across features.
        k = int(np.flatnonzero(gains >= gains.max() - TIE_TOL)[0])
        gain = float(gains[k])
        if gain <= MIN_GAIN or (best is not None and gain <= best.gain + TIE_TOL):
            continue
        i = idx[k]
        thr = (xs[i] + xs[i + 1]) / 2.0
        if not xs[i] <= thr < xs[i + 1]:
            thr = float(xs[i])
        best = Split(int(f), float(thr), gain)
    return best


def _grow_tree(X, y, weights, hp: ForestHyperparams, rng, n_features: int):
    k = min(hp.features_per_split, n_features)
    feature, threshold, left, right, value, n_samples = [], [], [], [], [], []
    importance = np.zeros(n_features)
    root_weight = float(weights.sum())

    def build(rows, depth):
        node = len(feature)
        w = weights[rows]
        yy = y[rows]
        tot = float(w.sum())
        pos = float(np.dot(w, yy))
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(pos / tot)
        n_samples.append(int(round(tot)))
        if depth >= hp.max_depth or pos == 0.0 or pos == tot or tot < 2 * hp.min_samples_leaf:
            return node
        feats = rng.choice(n_features, size=k, replace=False) if k < n_features else np.arange(n_features)
        split = best_split(X[rows], yy, w, feats, hp.min_samples_leaf)
        if split is None:
            return node
        importance[split.feature] += tot / root_weight * split.gain
        go_left = X[rows, split.feature] <= split.threshold
        feature[node] = split.feature
        threshold[node] = split.threshold
        left[node] = build(rows[go_left], depth + 1)
        right[node] = build(rows[~go_left], depth + 1)
        return node

    build(np.flatnonzero(weights > 0), 0)
    tree = Tree(np.array(feature, dtype=np.int64), np.array(threshold, dtype=np.float64),
                np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                np.array(value, dtype=np.float64), np.array(n_samples, dtype=np.int64))
    return tree, importance


def _fit_one(X, y, hp, index):
    rng = np.random.default_rng([hp.seed, index])
    n = X.shape[0]
    if hp.bootstrap:
        m = max(1, int(round(hp.bootstrap_fraction * n)))
        weights = np.bincount(rng.integers(0, n, size=m), minlength=n).astype(np.float64)
    else:
        weights = np.ones(n)
    return _grow_tree(X, y, weights, hp, rng, X.shape[1])


def as_arrays(examples) -> tuple[np.ndarray, np.ndarray]:
    """(X, y) from a labeled set with ``X``/``y`` arrays or a sequence of labeled examples."""
    if hasattr(examples, "X") and hasattr(examples, "y"):
        return np.asarray(examples.X, dtype=np.float64), np.asarray(examples.y, dtype=np.int64)
    if isinstance(examples, tuple) and len(examples) == 2:
        X, y = examples
        return np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.int64)
    examples = list(examples)
    X = np.array([ex.vector.values for ex in examples], dtype=np.float64)
    y = np.array([int(ex.label) for ex in examples], dtype=np.int64)
    return X.reshape(len(examples), -1), y


def fit(examples, hp: ForestHyperparams, threads: int = 1,
        feature_order: str = FEATURE_ORDER_TAG) -> ForestModel:
    X, y = as_arrays(examples)
    if X.shape[0] == 0 or y.min() == y.max():
        raise DegenerateTrainingError(
            f"training needs both classes; got {int(y.sum())} positives of {y.size} examples")
    n_features = X.shape[1]
    if n_features != N_FEATURES:
        feature_order = ",".join(f"x{i}" for i in range(n_features))
    if threads > 1 and hp.n_trees > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            grown = list(pool.map(lambda i: _fit_one(X, y, hp, i), range(hp.n_trees)))
    else:
        grown = [_fit_one(X, y, hp, i) for i in range(hp.n_trees)]
    trees = [t for t, _ in grown]
    per_tree = [imp / imp.sum() for _, imp in grown if imp.sum() > 0]
    if per_tree:
        imp = np.mean(per_tree, axis=0)
        imp = imp / imp.sum()
    else:
        imp = np.full(n_features, 1.0 / n_features)
    return ForestModel(trees, hp, imp, feature_order, n_features)


def _check_order(model: ForestModel, vector) -> np.ndarray:
    if isinstance(vector, FeatureVector):
        if vector.feature_order != model.feature_order:
            raise ContractError("feature vector order does not match the model's feature order")
        return np.asarray(vector.values, dtype=np.float64)
    values = np.asarray(vector, dtype=np.float64)
    if values.shape[-1] != model.n_features:
        raise ContractError(f"expected {model.n_features} features, got {values.shape[-1]}")
    return values


def predict_proba_matrix(model: ForestModel, X, threads: int = 1) -> np.ndarray:
    X = np.atleast_2d(_check_order(model, X))
    if X.shape[0] == 0:
        return np.zeros(0)
    if threads > 1 and len(model.trees) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda t: t.predict(X), model.trees))
    else:
        parts = [t.predict(X) for t in model.trees]
    return np.clip(np.sum(parts, axis=0) / len(model.trees), 0.0, 1.0)


def predict_proba(model: ForestModel, vector) -> float:
    """Mean over trees of the leaf positive fraction."""
    values = _check_order(model, vector)
    return float(predict_proba_matrix(model, values.reshape(1, -1))[0])


def classify(model: ForestModel, vector, threshold: float) -> bool:
    if not 0.0 <= threshold <= 1.0:
        raise ContractError(f"threshold {threshold} outside [0, 1]")
    return predict_proba(model, vector) >= threshold


def importances(model: ForestModel) -> np.ndarray:
    return model.feature_importances.copy()


def grid_search(examples, grid: Sequence[ForestHyperparams], validation_fraction: float = 0.25,
                seed: int = 0, threads: int = 1):
    """Pick the candidate with the best validation AUC.

    Returns ``(best, table)`` where ``table`` lists ``(hyperparams, auc)`` in grid
    order.  Ties go to fewer trees, then shallower trees, then grid order.
    """
    from .metrics import roc_from_arrays

    if not grid:
        raise ContractError("grid_search needs at least one candidate")
    if not 0.0 < validation_fraction < 1.0:
        raise ContractError(f"validation_fraction must be in (0, 1), got {validation_fraction}")
    X, y = as_arrays(examples)
    rng = np.random.default_rng(seed)
    val = np.zeros(y.size, dtype=bool)
    for cls in (1, 0):
        idx = rng.permutation(np.flatnonzero(y == cls))
        n_val = int(round(validation_fraction * idx.size))
        if n_val == 0 or n_val == idx.size:
            raise StratificationError(
                f"cannot split {idx.size} examples of class {cls} into fit and validation parts")
        val[idx[:n_val]] = True
    table = []
    for hp in grid:
        model = fit((X[~val], y[~val]), hp, threads=threads)
        scores = predict_proba_matrix(model, X[val], threads=threads)
        table.append((hp, roc_from_arrays(scores, y[val] == 1).auc))
    order = sorted(range(len(grid)),
                   key=lambda i: (-table[i][1], grid[i].n_trees, grid[i].max_depth, i))
    return grid[order[0]], table


# -- persistence -------------------------------------------------------------

def dumps(model: ForestModel) -> str:
    hp = model.hyperparams
    lines = [
        f"earlywarn-forest\t{FORMAT_VERSION}",
        *(f"{k}\t{v!r}" if isinstance(v, float) else f"{k}\t{v}" for k, v in asdict(hp).items()),
        f"n_features\t{model.n_features}",
        f"feature_order\t{model.feature_order}",
        "importances\t" + "\t".join(repr(float(v)) for v in model.feature_importances),
    ]
    for i, tree in enumerate(model.trees):
        lines.append(f"tree\t{i}\t{tree.n_nodes}")
        for j in range(tree.n_nodes):
            lines.append(f"{tree.feature[j]}\t{float(tree.threshold[j])!r}\t"
                         f"{float(tree.value[j])!r}\t{tree.n_samples[j]}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> ForestModel:
    try:
        return _loads(text)
    except (ValueError, KeyError, IndexError) as exc:
        raise ContractError(f"malformed model file: {exc}") from None


def _loads(text: str) -> ForestModel:
    lines = text.splitlines()
    magic, version = lines[0].split("\t")
    if magic != "earlywarn-forest":
        raise ContractError("not a forest model file")
    if int(version) != FORMAT_VERSION:
        raise ContractError(f"unsupported model format version {version}")
    header = {}
    pos = 1
    while pos < len(lines) and not lines[pos].startswith("tree\t"):
        key, _, rest = lines[pos].partition("\t")
        header[key] = rest
        pos += 1
    kinds = {f.name: f.type for f in fields(ForestHyperparams)}
    hp_args = {}
    for name in kinds:
        raw = header[name]
        if name == "bootstrap":
            hp_args[name] = raw == "True"
        elif name == "bootstrap_fraction":
            hp_args[name] = float(raw)
        else:
            hp_args[name] = int(raw)
    hp = ForestHyperparams(**hp_args)
    imp = np.array([float(v) for v in header["importances"].split("\t")])
    trees = []
    while pos < len(lines):
        _, _, n_nodes = lines[pos].split("\t")
        rows = [lines[pos + 1 + j].split("\t") for j in range(int(n_nodes))]
        pos += 1 + int(n_nodes)
        feature = np.array([int(r[0]) for r in rows], dtype=np.int64)
        left = np.full(feature.size, -1, dtype=np.int64)
        right = np.full(feature.size, -1, dtype=np.int64)
        # Rebuild child links from the pre-order layout.
        stack = []
        for j in range(feature.size):
            if stack:
                parent = stack[-1]
                if left[parent] == -1:
                    left[parent] = j
                else:
                    right[parent] = j
                    stack.pop()
            if feature[j] >= 0:
                stack.append(j)
        trees.append(Tree(feature, np.array([float(r[1]) for r in rows]), left, right,
                          np.array([float(r[2]) for r in rows]),
                          np.array([int(r[3]) for r in rows], dtype=np.int64)))
    return ForestModel(trees, hp, imp, header["feature_order"], int(header["n_features"]))


def save_model(model: ForestModel, path) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8")


def load_model(path) -> ForestModel:
    return loads(Path(path).read_text(encoding="utf-8"))
