"""Set-algebra evaluation metrics, ROC/AUC, and horizon sweeps.

The confusion matrix is computed from account sets, with complements taken
relative to the evaluation universe.  AUC is the trapezoidal area under the ROC
points obtained by thresholding at every distinct score (plus 0 and 1); the
area is accumulated in integer counts and divided once, so it matches the
tie-corrected Mann-Whitney statistic to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .core import ACCOUNT_DTYPE, AccountSetLedger
from .errors import ContractError, UndefinedAUCError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def precision(self) -> float | None:
        d = self.tp + self.fp
        return self.tp / d if d else None

    @property
    def recall(self) -> float | None:
        d = self.tp + self.fn
        return self.tp / d if d else None

    @property
    def accuracy(self) -> float | None:
        return (self.tp + self.tn) / self.total if self.total else None

    @property
    def fpr(self) -> float | None:
        d = self.fp + self.tn
        return self.fp / d if d else None


def confusion(predicted, truth, universe) -> ConfusionMatrix:
    """TP = P & S, FP = P - S, FN = S - P, TN = complement of (P | S) in the universe."""
    predicted, truth, universe = set(predicted), set(truth), set(universe)
    if not predicted <= universe:
        raise ContractError(f"{len(predicted - universe)} predicted accounts outside the universe")
    if not truth <= universe:
        raise ContractError(f"{len(truth - universe)} ground-truth accounts outside the universe")
    return ConfusionMatrix(
        tp=len(predicted & truth),
        fp=len(predicted - truth),
        tn=len(universe) - len(predicted | truth),
        fn=len(truth - predicted),
    )


@dataclass(frozen=True)
class RocCurve:
    """ROC points ordered by decreasing threshold (increasing FPR).

    The first point, at threshold +inf, is (0, 0).
    """

    thresholds: tuple
    fpr: tuple
    tpr: tuple
    auc: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr, self.tpr))


def roc_from_arrays(scores, labels) -> RocCurve:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape:
        raise ContractError("scores and labels differ in length")
    n_pos = int(labels.sum())
    n_neg = int(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError(f"AUC undefined with {n_pos} positives and {n_neg} negatives")
    thresholds = np.unique(np.concatenate([scores, [0.0, 1.0]]))[::-1]
    # Per-threshold counts of scores >= T via searchsorted on ascending scores.
    pos_sorted = np.sort(scores[labels])
    neg_sorted = np.sort(scores[~labels])
    tp = n_pos - np.searchsorted(pos_sorted, thresholds, side="left")
    fp = n_neg - np.searchsorted(neg_sorted, thresholds, side="left")
    tp = np.r_[0, tp].astype(np.int64)
    fp = np.r_[0, fp].astype(np.int64)
    twice_area = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    auc = twice_area / (2 * n_pos * n_neg)
    return RocCurve(
        thresholds=(math.inf, *thresholds.tolist()),
        fpr=tuple((fp / n_neg).tolist()),
        tpr=tuple((tp / n_pos).tolist()),
        auc=auc,
    )


def roc_and_auc(scores: Mapping, truth, universe) -> RocCurve:
    universe = sorted(set(universe))
    truth = set(truth)
    missing = [a for a in universe if a not in scores]
    if missing:
        raise ContractError(f"{len(missing)} universe accounts have no score")
    if not truth <= set(universe):
        raise ContractError("ground truth not contained in the universe")
    values = [scores[a] for a in universe]
    labels = [a in truth for a in universe]
    return roc_from_arrays(values, labels)


def btr(auc: float) -> float:
    """Improvement of ``auc`` over a random classifier, as a percentage."""
    if not 0.0 <= auc <= 1.0:
        raise ContractError(f"auc {auc} outside [0, 1]")
    return (auc - 0.5) / 0.5 * 100.0


def format_pct(value: float | None, digits: int = 1) -> str:
    return "-" if value is None else f"{value:.{digits}f}%"


@dataclass
class EvalReport:
    name: str
    thresholds: tuple
    horizons: tuple
    universe_size: int
    cells: dict = field(default_factory=dict)   # (T, H) -> ConfusionMatrix
    roc: dict = field(default_factory=dict)     # H -> RocCurve | None

    def cell(self, threshold: float, horizon: int) -> ConfusionMatrix:
        return self.cells[(threshold, horizon)]

    def auc(self, horizon: int) -> float | None:
        curve = self.roc.get(horizon)
        return None if curve is None else curve.auc

    def btr(self, horizon: int) -> float | None:
        a = self.auc(horizon)
        return None if a is None else btr(a)

    def __eq__(self, other):
        if not isinstance(other, EvalReport):
            return NotImplemented
        return (self.name, tuple(self.thresholds), tuple(self.horizons), self.universe_size,
                self.cells, self.roc) == (other.name, tuple(other.thresholds),
                                          tuple(other.horizons), other.universe_size,
                                          other.cells, other.roc)


def sweep(name: str, scores: np.ndarray, universe: np.ndarray, truths: Mapping,
          thresholds, horizons) -> EvalReport:
    """Evaluate aligned ``scores``/``universe`` arrays against per-horizon truth arrays."""
    universe = np.asarray(universe, dtype=ACCOUNT_DTYPE)
    scores = np.asarray(scores, dtype=np.float64)
    report = EvalReport(name, tuple(thresholds), tuple(horizons), int(universe.size))
    for h in horizons:
        label = np.isin(universe, np.asarray(truths[h], dtype=ACCOUNT_DTYPE))
        n_pos = int(label.sum())
        for t in thresholds:
            pred = scores >= t
            tp = int(np.sum(pred & label))
            fp = int(np.sum(pred & ~label))
            fn = n_pos - tp
            report.cells[(t, h)] = ConfusionMatrix(tp, fp, int(universe.size) - tp - fp - fn, fn)
        try:
            report.roc[h] = roc_from_arrays(scores, label)
        except UndefinedAUCError:
            report.roc[h] = None
    return report


def horizon_sweep(scores: Mapping, ledger: AccountSetLedger, config) -> EvalReport:
    """Threshold x horizon evaluation over the exercise's evaluation universe."""
    from .exercise import evaluation_universe_array, ground_truth_array

    universe = evaluation_universe_array(ledger, config)
    truths = {h: ground_truth_array(ledger, config, h, universe) for h in config.horizons}
    if isinstance(scores, tuple):
        accounts, values = scores
        order = np.argsort(accounts)
        accounts, values = np.asarray(accounts)[order], np.asarray(values)[order]
        pos = np.searchsorted(accounts, universe)
        pos_c = np.minimum(pos, max(accounts.size - 1, 0))
        if accounts.size == 0 or np.any(accounts[pos_c] != universe):
            raise ContractError("scores do not cover the evaluation universe")
        aligned = values[pos_c]
    else:
        try:
            aligned = np.array([scores[a] for a in universe.tolist()], dtype=np.float64)
        except KeyError as exc:
            raise ContractError(f"no score for universe account {exc.args[0]}") from None
    return sweep(config.name, aligned, universe, truths, config.thresholds, config.horizons)


# -- serialization -----------------------------------------------------------

def _num(x) -> str:
    return "none" if x is None else repr(float(x))


def _unnum(s: str):
    return None if s == "none" else float(s)


def write_report(report: EvalReport, out_dir) -> list[Path]:
    """Write metrics.tsv, auc.tsv, one roc_H<h>.tsv per horizon, and report.txt."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    path = out / "metrics.tsv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# name={report.name}\tuniverse={report.universe_size}\n")
        fh.write("threshold\thorizon\ttp\tfp\ttn\tfn\tprecision\trecall\taccuracy\tfpr\n")
        for t in report.thresholds:
            for h in report.horizons:
                c = report.cells[(t, h)]
                fh.write("\t".join([_num(t), str(h), str(c.tp), str(c.fp), str(c.tn), str(c.fn),
                                    _num(c.precision), _num(c.recall), _num(c.accuracy),
                                    _num(c.fpr)]) + "\n")
    written.append(path)
    path = out / "auc.tsv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("horizon\tauc\tbtr_pct\n")
        for h in report.horizons:
            fh.write(f"{h}\t{_num(report.auc(h))}\t{_num(report.btr(h))}\n")
    written.append(path)
    for h in report.horizons:
        curve = report.roc.get(h)
        if curve is None:
            continue
        path = out / f"roc_H{h}.tsv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("threshold\tfpr\ttpr\n")
            for t, f, r in zip(curve.thresholds, curve.fpr, curve.tpr):
                fh.write(f"{_num(t)}\t{_num(f)}\t{_num(r)}\n")
        written.append(path)
    path = out / "report.txt"
    path.write_text(render_table(report), encoding="utf-8")
    written.append(path)
    return written


def read_report(out_dir) -> EvalReport:
    out = Path(out_dir)
    lines = (out / "metrics.tsv").read_text(encoding="utf-8").splitlines()
    meta = dict(kv.split("=", 1) for kv in lines[0][2:].split("\t"))
    cells, thresholds, horizons = {}, [], []
    for line in lines[2:]:
        t, h, tp, fp, tn, fn, *_ = line.split("\t")
        t, h = float(t), int(h)
        if t not in thresholds:
            thresholds.append(t)
        if h not in horizons:
            horizons.append(h)
        cells[(t, h)] = ConfusionMatrix(int(tp), int(fp), int(tn), int(fn))
    report = EvalReport(meta["name"], tuple(thresholds), tuple(horizons),
                        int(meta["universe"]), cells)
    aucs = {}
    for line in (out / "auc.tsv").read_text(encoding="utf-8").splitlines()[1:]:
        h, a, _ = line.split("\t")
        aucs[int(h)] = _unnum(a)
    for h in horizons:
        path = out / f"roc_H{h}.tsv"
        if aucs.get(h) is None or not path.exists():
            report.roc[h] = None
            continue
        rows = [r.split("\t") for r in path.read_text(encoding="utf-8").splitlines()[1:]]
        report.roc[h] = RocCurve(tuple(float(r[0]) for r in rows), tuple(float(r[1]) for r in rows),
                                 tuple(float(r[2]) for r in rows), aucs[h])
    return report


def render_table(report: EvalReport) -> str:
    """Fixed-width summary: one block per threshold, one row per horizon."""
    lines = [f"Classification exercise {report.name}  (evaluation universe: "
             f"{report.universe_size} accounts)", ""]
    lines.append(f"{'H':>5} {'AUC':>7} {'BTR':>8}")
    for h in report.horizons:
        a = report.auc(h)
        lines.append(f"{h:>5} {('-' if a is None else f'{a:.3f}'):>7} "
                     f"{format_pct(report.btr(h), 2):>8}")
    for t in report.thresholds:
        lines.append("")
        lines.append(f"Operating threshold T = {t:g}")
        lines.append(f"{'H':>5} {'TP':>8} {'FP':>8} {'FN':>8} {'PRE':>8} {'REC':>8} "
                     f"{'ACC':>8} {'FPR':>9}")
        for h in report.horizons:
            c = report.cells[(t, h)]
            pct = (lambda v, d=2: format_pct(None if v is None else 100 * v, d))
            lines.append(f"{h:>5} {c.tp:>8} {c.fp:>8} {c.fn:>8} {pct(c.precision):>8} "
                         f"{pct(c.recall):>8} {pct(c.accuracy):>8} {pct(c.fpr, 4):>9}")
    return "\n".join(lines) + "\n"
