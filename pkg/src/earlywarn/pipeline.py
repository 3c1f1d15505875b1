"""End-to-end classification exercise: prune, label, sample, fit, score, evaluate."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .core import AccountSetLedger
from .exercise import (ExerciseConfig, LabeledSet, eligible_training_array,
                       evaluation_universe_array, label_training, undersample)
from .features import FEATURE_NAMES, extract_all
from .forest import (ForestModel, default_grid, dumps, fit, grid_search,
                     predict_proba_matrix)
from .ingest import LoginEvents, build_ledger, parse_flag_file, parse_login_file
from .metrics import EvalReport, horizon_sweep, write_report


def stage_seed(seed: int, stage: int) -> int:
    """Independent 64-bit seed for one pipeline stage."""
    return int(np.random.SeedSequence([seed, stage]).generate_state(1, np.uint64)[0])


STAGE_UNDERSAMPLE = 1
STAGE_GRID = 2


@dataclass
class ExerciseResult:
    config: ExerciseConfig
    model: ForestModel
    report: EvalReport
    accounts: np.ndarray
    scores: np.ndarray
    counts: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    grid: list = field(default_factory=list)


def run_exercise(ledger: AccountSetLedger, events: LoginEvents, config: ExerciseConfig,
                 threads: int = 1) -> ExerciseResult:
    timings: dict = {}
    clock = time.perf_counter()

    def lap(name):
        nonlocal clock
        now = time.perf_counter()
        timings[name] = now - clock
        clock = now

    eligible = eligible_training_array(ledger, config)
    lap("prune")
    train_features = extract_all(ledger, events, config.train_dw, config.unique_rule, threads)
    lap("train_features")
    labeled: LabeledSet = label_training(ledger, eligible, config.train_lw, train_features)
    sample = undersample(labeled, config.undersample_ratio,
                         stage_seed(config.rng_seed, STAGE_UNDERSAMPLE))
    lap("label")
    hp = config.forest
    grid_table: list = []
    if config.grid_search:
        best, grid_table = grid_search(sample, default_grid(hp.seed), config.validation_fraction,
                                       stage_seed(config.rng_seed, STAGE_GRID), threads)
        hp = replace(best, seed=hp.seed)
        lap("grid_search")
    model = fit(sample, hp, threads)
    lap("fit")
    test_features = extract_all(ledger, events, config.test_dw, config.unique_rule, threads)
    universe = evaluation_universe_array(ledger, config)
    scores = predict_proba_matrix(model, test_features.rows(universe), threads)
    lap("score")
    report = horizon_sweep((universe, scores), ledger, config)
    lap("evaluate")
    counts = {
        "eligible": int(eligible.size),
        "labeled_positive": int(labeled.n_positive),
        "labeled_negative": int(len(labeled) - labeled.n_positive),
        "train_positive": int(sample.n_positive),
        "train_negative": int(len(sample) - sample.n_positive),
        "universe": int(universe.size),
    }
    return ExerciseResult(config, model, report, universe, scores, counts, timings, grid_table)


# -- run directory -----------------------------------------------------------

def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def load_trace(data_dir):
    data_dir = Path(data_dir)
    logins = parse_login_file(data_dir / "logins.tsv")
    flags = parse_flag_file(data_dir / "flags.tsv")
    return logins, flags, build_ledger(logins, flags)


def write_scores(path, accounts, scores) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("account\tscore\n")
        for a, s in zip(np.asarray(accounts).tolist(), np.asarray(scores).tolist()):
            fh.write(f"{a}\t{s!r}\n")


def write_importances(path, model: ForestModel) -> None:
    names = FEATURE_NAMES if model.n_features == len(FEATURE_NAMES) else \
        tuple(model.feature_order.split(","))
    imp = model.feature_importances
    order = sorted(range(imp.size), key=lambda i: (-imp[i], i))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("rank\tfeature\tname\timportance\n")
        for rank, i in enumerate(order, start=1):
            fh.write(f"{rank}\tf{i + 1}\t{names[i]}\t{float(imp[i])!r}\n")


def run_ce(data_dir, config, out_dir, threads: int = 1) -> ExerciseResult:
    """Run one exercise on ``data_dir/{logins,flags}.tsv`` and write all outputs to ``out_dir``.

    ``config`` is an :class:`ExerciseConfig` or a callable building one from the
    loaded ledger (so preset windows can follow the trace length).  Everything
    except ``timings.json`` is a deterministic function of the inputs and the
    config, so reruns with the same seed are byte-identical.
    """
    data_dir, out = Path(data_dir), Path(out_dir)
    t0 = time.perf_counter()
    logins, _, ledger = load_trace(data_dir)
    load_time = time.perf_counter() - t0
    if callable(config):
        config = config(ledger)
    out.mkdir(parents=True, exist_ok=True)
    result = run_exercise(ledger, logins, config, threads)
    del logins

    (out / "config.txt").write_text(config.to_key_values(), encoding="utf-8")
    model_text = dumps(result.model)
    (out / "model.txt").write_text(model_text, encoding="utf-8")
    written = ["config.txt", "model.txt", "scores.tsv", "importances.tsv"]
    written += [Path(p).name for p in write_report(result.report, out)]
    write_scores(out / "scores.tsv", result.accounts, result.scores)
    write_importances(out / "importances.tsv", result.model)
    if result.grid:
        with open(out / "grid.tsv", "w", encoding="utf-8") as fh:
            fh.write("n_trees\tmax_depth\tmin_samples_leaf\tfeatures_per_split\tauc\n")
            for hp, auc in result.grid:
                fh.write(f"{hp.n_trees}\t{hp.max_depth}\t{hp.min_samples_leaf}\t"
                         f"{hp.features_per_split}\t{auc!r}\n")
        written.append("grid.tsv")

    outputs = sorted(written)
    manifest = {
        "version": __version__,
        "name": config.name,
        "seed": config.rng_seed,
        "inputs": {name: sha256_file(data_dir / name) for name in ("logins.tsv", "flags.tsv")},
        "ledger": {"epoch": ledger.epoch, "coverage": str(ledger.coverage)},
        "hyperparams": asdict(result.model.hyperparams),
        "counts": result.counts,
        "outputs": {name: sha256_file(out / name) for name in outputs},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")
    timings = {"load": load_time, **result.timings}
    (out / "timings.json").write_text(json.dumps(timings, indent=2, sort_keys=True) + "\n",
                                      encoding="utf-8")
    return result
