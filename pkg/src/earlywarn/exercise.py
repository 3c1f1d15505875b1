"""Classification exercises: window layout, pruning, labels, and sampling.

A training phase has a data window (features), a buffer window (absorbs flagging
lag), and a label window.  The testing phase scores accounts active in the test
data window and checks them against flags within ``H`` days after it.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .config import format_value, parse_bool, parse_list, parse_number, read_key_values
from .core import ACCOUNT_DTYPE, AccountSetLedger, DayInterval, as_account_array
from .errors import ConfigError, ContractError, DegenerateTrainingError
from .features import FeatureMatrix, FeatureVector
from .forest import ForestHyperparams

PRESETS = ("ce_a", "ce_b", "ce_c", "ce_d")
DEFAULT_TRACE_DAYS = 118
# Heuristic 3: account age and prior activity before the training data window.
DEFAULT_MIN_ACCOUNT_AGE_DAYS = 60
DEFAULT_MIN_ACTIVE_DAYS = 20


@dataclass(frozen=True)
class ExerciseConfig:
    train_dw: DayInterval
    train_bw: DayInterval
    train_lw: DayInterval
    test_dw: DayInterval
    test_lw: DayInterval
    extended_lw: DayInterval | None = None
    preprocess_interval: DayInterval | None = None
    horizons: tuple = (7,)
    thresholds: tuple = (0.5, 0.9)
    undersample_ratio: float = 1.0
    min_account_age_days: int | None = None
    min_active_days: int | None = None
    exclude_preflagged: bool = False
    rng_seed: int = 0
    name: str = "custom"
    unique_rule: str = "daily_sum"
    forest: ForestHyperparams = field(default_factory=ForestHyperparams)
    grid_search: bool = False
    validation_fraction: float = 0.25

    def __post_init__(self):
        order = [("train_dw", self.train_dw), ("train_bw", self.train_bw),
                 ("train_lw", self.train_lw), ("test_dw", self.test_dw),
                 ("test_lw", self.test_lw)]
        if self.extended_lw is not None:
            order.append(("extended_lw", self.extended_lw))
        for (na, a), (nb, b) in zip(order, order[1:]):
            if not a.end < b.start:
                raise ConfigError(f"{na} {a} must end before {nb} {b} starts")
        if self.preprocess_interval is not None and not self.preprocess_interval.end < self.train_dw.start:
            raise ConfigError("preprocess_interval must end before train_dw starts")
        if not self.horizons:
            raise ConfigError("at least one horizon is required")
        for h in self.horizons:
            if not self.h_min <= h <= self.h_max:
                raise ConfigError(f"horizon {h} outside [{self.h_min}, {self.h_max}]")
        if not self.thresholds:
            raise ConfigError("at least one threshold is required")
        for t in self.thresholds:
            if not 0.0 <= t <= 1.0:
                raise ConfigError(f"threshold {t} outside [0, 1]")
        if not self.undersample_ratio > 0:
            raise ConfigError(f"undersample_ratio must be positive, got {self.undersample_ratio}")
        for name in ("min_account_age_days", "min_active_days"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ConfigError(f"{name} must be non-negative")
        if not 0 <= self.rng_seed < 2**64:
            raise ConfigError("rng_seed must be an unsigned 64-bit integer")

    @property
    def h_min(self) -> int:
        return self.test_lw.end - self.test_dw.end

    @property
    def h_max(self) -> int:
        last = self.extended_lw if self.extended_lw is not None else self.test_lw
        return last.end - self.test_dw.end

    def horizon_window(self, horizon: int) -> DayInterval:
        return DayInterval(self.test_dw.end + 1, self.test_dw.end + horizon)

    def to_key_values(self) -> str:
        """Canonical ``key = value`` rendering, readable by :func:`load_config`."""
        out = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "forest":
                for hf in fields(ForestHyperparams):
                    if hf.name != "seed":
                        out.append(f"{hf.name} = {format_value(getattr(value, hf.name))}")
                continue
            out.append(f"{f.name} = {format_value(value)}")
        return "\n".join(out) + "\n"


@dataclass(frozen=True)
class LabeledExample:
    account: int
    vector: FeatureVector
    label: bool


class LabeledSet(Sequence):
    """Training examples as aligned arrays; indexing yields :class:`LabeledExample`."""

    def __init__(self, accounts, X, y, window: DayInterval):
        self.accounts = np.asarray(accounts, dtype=ACCOUNT_DTYPE)
        self.X = np.asarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=bool)
        self.window = window

    def __len__(self):
        return int(self.accounts.size)

    def __getitem__(self, i):
        if isinstance(i, (slice, np.ndarray)):
            return LabeledSet(self.accounts[i], self.X[i], self.y[i], self.window)
        acc = int(self.accounts[i])
        return LabeledExample(acc, FeatureVector(acc, self.window, tuple(self.X[i].tolist())),
                              bool(self.y[i]))

    @property
    def n_positive(self) -> int:
        return int(self.y.sum())

    @property
    def positives(self) -> set:
        return set(self.accounts[self.y].tolist())

    @property
    def negatives(self) -> set:
        return set(self.accounts[~self.y].tolist())


# -- presets -----------------------------------------------------------------

def preset(name: str, epoch: int = 0, trace_days: int = DEFAULT_TRACE_DAYS, **overrides) -> ExerciseConfig:
    """Week layouts for exercises A-D; week 1 starts on day ``epoch``.

    The extended label window runs to the last trace day.
    """
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose one of {', '.join(PRESETS)}")
    W = lambda a, b=None: DayInterval.weeks(a, a if b is None else b, epoch)  # noqa: E731
    last_day = epoch + trace_days - 1
    kw: dict = {}
    if name == "ce_a":
        kw = dict(train_dw=W(1), train_bw=W(2), train_lw=W(3), test_dw=W(4), test_lw=W(5))
    elif name in ("ce_b", "ce_c"):
        kw = dict(train_dw=W(9), train_bw=W(10), train_lw=W(11), test_dw=W(12), test_lw=W(13))
    else:
        kw = dict(train_dw=W(1, 3), train_bw=W(4, 6), train_lw=W(7, 9), test_dw=W(10, 12),
                  test_lw=W(13, 15))
    if name == "ce_c":
        kw["preprocess_interval"] = W(1, 4)
        kw["exclude_preflagged"] = True
        # Age is only observable inside the trace: cap it so accounts first seen
        # during the trace's first week still qualify.
        kw["min_account_age_days"] = min(DEFAULT_MIN_ACCOUNT_AGE_DAYS,
                                         kw["train_dw"].start - epoch - 6)
        kw["min_active_days"] = DEFAULT_MIN_ACTIVE_DAYS
    if last_day < kw["test_lw"].end:
        raise ConfigError(f"preset {name} needs at least {kw['test_lw'].end - epoch + 1} trace days")
    if last_day > kw["test_lw"].end:
        kw["extended_lw"] = DayInterval(kw["test_lw"].end + 1, last_day)
    h_min = kw["test_lw"].end - kw["test_dw"].end
    h_max = last_day - kw["test_dw"].end
    kw["horizons"] = tuple(sorted({h for h in (h_min, 7, 21, 30, h_max) if h_min <= h <= h_max}))
    kw["name"] = name
    kw.update(overrides)
    return ExerciseConfig(**kw)


_INTERVAL_KEYS = ("train_dw", "train_bw", "train_lw", "test_dw", "test_lw", "extended_lw",
                  "preprocess_interval")
_ALIASES = {"horizon": "horizons", "threshold": "thresholds", "seed": "rng_seed"}


def config_from_mapping(values: dict) -> ExerciseConfig:
    """Build a config from string ``key -> value`` pairs (a preset may seed the defaults)."""
    values = {_ALIASES.get(k, k): v for k, v in values.items()}
    epoch = parse_number(values.pop("epoch", "0"), "epoch", int)
    trace_days = parse_number(values.pop("trace_days", str(DEFAULT_TRACE_DAYS)), "trace_days", int)
    preset_name = values.pop("preset", None)
    kw: dict = {}
    forest_kw: dict = {}
    hp_fields = {f.name: f for f in fields(ForestHyperparams)}
    for key, raw in values.items():
        none = raw.strip().lower() == "none"
        try:
            if key in _INTERVAL_KEYS:
                kw[key] = None if none else DayInterval.parse(raw)
            elif key == "horizons":
                kw[key] = parse_list(raw, key, int)
            elif key == "thresholds":
                kw[key] = parse_list(raw, key, float)
            elif key in ("undersample_ratio", "validation_fraction"):
                kw[key] = parse_number(raw, key, float)
            elif key in ("min_account_age_days", "min_active_days"):
                kw[key] = None if none else parse_number(raw, key, int)
            elif key in ("exclude_preflagged", "grid_search"):
                kw[key] = parse_bool(raw, key)
            elif key == "rng_seed":
                kw[key] = parse_number(raw, key, int)
            elif key in ("name", "unique_rule"):
                kw[key] = raw
            elif key in hp_fields and key != "seed":
                if key == "bootstrap":
                    forest_kw[key] = parse_bool(raw, key)
                elif key == "bootstrap_fraction":
                    forest_kw[key] = parse_number(raw, key, float)
                else:
                    forest_kw[key] = parse_number(raw, key, int)
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    seed = kw.get("rng_seed", 0)
    try:
        kw["forest"] = ForestHyperparams(seed=seed, **forest_kw)
    except ContractError as exc:
        raise ConfigError(str(exc)) from None
    if preset_name is not None:
        return preset(preset_name, epoch=epoch, trace_days=trace_days, **kw)
    missing = [k for k in _INTERVAL_KEYS[:5] if k not in kw]
    if missing:
        raise ConfigError(f"config needs a preset or the windows {', '.join(missing)}")
    return ExerciseConfig(**kw)


def load_config(path) -> ExerciseConfig:
    return config_from_mapping(read_key_values(path))


def with_seed(config: ExerciseConfig, seed: int) -> ExerciseConfig:
    return replace(config, rng_seed=seed, forest=replace(config.forest, seed=seed))


# -- training set ------------------------------------------------------------

def eligible_training_array(ledger: AccountSetLedger, config: ExerciseConfig) -> np.ndarray:
    start = config.train_dw.start
    eligible = ledger.active_array(config.train_dw)
    flagged = ledger.flagged_array(DayInterval(start, config.train_bw.end))
    eligible = np.setdiff1d(eligible, flagged, assume_unique=True)
    if config.exclude_preflagged:
        eligible = np.setdiff1d(eligible, ledger.flagged_through(start - 1), assume_unique=True)
    if config.min_account_age_days is not None:
        first = ledger.first_seen_array(eligible)
        eligible = eligible[first <= start - config.min_account_age_days]
    if config.min_active_days is not None:
        if start > ledger.coverage.start:
            history = DayInterval(ledger.coverage.start, start - 1)
            counts = ledger.active_day_counts(eligible, history)
        else:
            counts = np.zeros(eligible.size, dtype=np.int64)
        eligible = eligible[counts >= config.min_active_days]
    return eligible


def prune_training_accounts(ledger: AccountSetLedger, config: ExerciseConfig) -> set:
    """Accounts active in the training data window that survive the exclusion heuristics."""
    return set(eligible_training_array(ledger, config).tolist())


def label_training(ledger: AccountSetLedger, eligible, train_lw: DayInterval,
                   features: FeatureMatrix) -> LabeledSet:
    """One example per eligible account; positive iff flagged in ``train_lw``."""
    accounts = np.sort(as_account_array(eligible))
    flagged = ledger.flagged_array(train_lw)
    y = np.isin(accounts, flagged)
    return LabeledSet(accounts, features.rows(accounts), y, features.window)


def undersample(examples, ratio: float, seed: int) -> LabeledSet:
    """Keep every positive and ``floor(ratio * positives)`` uniformly drawn negatives."""
    if not ratio > 0:
        raise ContractError(f"undersample ratio must be positive, got {ratio}")
    if not isinstance(examples, LabeledSet):
        examples = list(examples)
        window = examples[0].vector.window if examples else DayInterval(0, 0)
        examples = LabeledSet([e.account for e in examples],
                              np.array([e.vector.values for e in examples]).reshape(len(examples), -1),
                              [e.label for e in examples], window)
    pos = np.flatnonzero(examples.y)
    neg = np.flatnonzero(~examples.y)
    if pos.size == 0:
        raise DegenerateTrainingError(
            f"no positive examples among {len(examples)} training accounts; cannot train")
    k = min(int(math.floor(ratio * pos.size)), neg.size)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(neg, size=k, replace=False) if k else np.zeros(0, dtype=np.int64)
    keep = np.sort(np.concatenate([pos, chosen]))
    return examples[keep]


# -- evaluation --------------------------------------------------------------

def evaluation_universe_array(ledger: AccountSetLedger, config: ExerciseConfig) -> np.ndarray:
    universe = ledger.active_array(config.test_dw)
    universe = np.setdiff1d(universe, ledger.flagged_through(config.train_lw.end), assume_unique=True)
    if config.preprocess_interval is not None:
        universe = np.setdiff1d(universe, ledger.flagged_array(config.preprocess_interval),
                                assume_unique=True)
    return universe


def evaluation_universe(ledger: AccountSetLedger, config: ExerciseConfig) -> set:
    """Accounts active in the test data window and never flagged up to the training label window's end."""
    return set(evaluation_universe_array(ledger, config).tolist())


def ground_truth_array(ledger: AccountSetLedger, config: ExerciseConfig, horizon: int,
                       universe: np.ndarray | None = None) -> np.ndarray:
    if not config.h_min <= horizon <= config.h_max:
        raise ConfigError(f"horizon {horizon} outside [{config.h_min}, {config.h_max}]")
    if universe is None:
        universe = evaluation_universe_array(ledger, config)
    flagged = ledger.flagged_array(config.horizon_window(horizon))
    return np.intersect1d(universe, flagged, assume_unique=True)


def ground_truth_at_horizon(ledger: AccountSetLedger, config: ExerciseConfig, horizon: int) -> set:
    """Universe accounts flagged within ``horizon`` days after the test data window."""
    return set(ground_truth_array(ledger, config, horizon).tolist())
