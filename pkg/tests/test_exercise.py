import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from earlywarn.config import parse_key_values
from earlywarn.core import DayInterval
from earlywarn.errors import ConfigError, DegenerateTrainingError
from earlywarn.exercise import (ExerciseConfig, LabeledSet, config_from_mapping,
                                evaluation_universe, ground_truth_at_horizon, label_training,
                                preset, prune_training_accounts, undersample, with_seed)
from earlywarn.features import extract_all
from earlywarn.ingest import FlagEvent, LoginEvent, LoginEvents, build_ledger

W = DayInterval


def small_config(**kw):
    base = dict(train_dw=W(20, 24), train_bw=W(25, 27), train_lw=W(28, 30), test_dw=W(31, 35),
                test_lw=W(36, 38), extended_lw=W(39, 49), horizons=(3, 7, 14))
    base.update(kw)
    return ExerciseConfig(**base)


def random_trace(seed, n_accounts=60, n_days=50, p_login=0.25, p_flag=0.01):
    rng = random.Random(seed)
    logins = [LoginEvent(a, d) for a in range(1, n_accounts + 1)
              for d in range(n_days) if rng.random() < p_login]
    flags = [FlagEvent(a, d) for a in range(1, n_accounts + 1)
             for d in range(n_days) if rng.random() < p_flag]
    logins.append(LoginEvent(n_accounts + 1, 0))
    logins.append(LoginEvent(n_accounts + 1, n_days - 1))
    return logins, flags


def brute_eligible(logins, flags, cfg):
    start = cfg.train_dw.start
    accounts = {e.account for e in logins if e.day in cfg.train_dw}
    out = set()
    for a in accounts:
        fdays = [f.day for f in flags if f.account == a]
        ldays = {e.day for e in logins if e.account == a}
        if any(start <= d <= cfg.train_bw.end for d in fdays):
            continue
        if cfg.exclude_preflagged and any(d < start for d in fdays):
            continue
        if cfg.min_account_age_days is not None and min(ldays) > start - cfg.min_account_age_days:
            continue
        if cfg.min_active_days is not None and \
                len({d for d in ldays if d < start}) < cfg.min_active_days:
            continue
        out.add(a)
    return out


class TestPresets:
    def test_week_layout(self):
        a = preset("ce_a")
        assert (a.train_dw, a.train_bw, a.train_lw, a.test_dw, a.test_lw) == \
            (W(0, 6), W(7, 13), W(14, 20), W(21, 27), W(28, 34))
        d = preset("ce_d")
        assert d.train_dw == W(0, 20) and d.test_lw == W(84, 104)

    def test_horizon_bounds(self):
        b = preset("ce_b")
        assert (b.h_min, b.h_max) == (7, 34)
        assert b.horizons == (7, 21, 30, 34)
        assert preset("ce_d").horizons == (21, 30, 34)

    def test_ce_c_heuristics(self):
        c = preset("ce_c")
        assert c.exclude_preflagged and c.min_active_days == 20
        assert c.preprocess_interval == W(0, 27)
        assert c.min_account_age_days == 50

    def test_short_trace_rejected(self):
        with pytest.raises(ConfigError):
            preset("ce_b", trace_days=80)
        with pytest.raises(ConfigError):
            preset("ce_x")


class TestConfig:
    def test_overlapping_windows_rejected(self):
        with pytest.raises(ConfigError):
            small_config(train_bw=W(24, 27))

    def test_horizon_out_of_range(self):
        with pytest.raises(ConfigError):
            small_config(horizons=(2,))
        with pytest.raises(ConfigError):
            small_config(horizons=(15,))

    def test_threshold_range(self):
        with pytest.raises(ConfigError):
            small_config(thresholds=(1.5,))

    def test_key_value_round_trip(self):
        cfg = with_seed(preset("ce_c"), 99)
        again = config_from_mapping(parse_key_values(cfg.to_key_values()))
        assert again == cfg

    def test_preset_with_overrides(self):
        cfg = config_from_mapping({"preset": "ce_b", "threshold": "0.3,0.6", "seed": "5",
                                   "n_trees": "7"})
        assert cfg.thresholds == (0.3, 0.6) and cfg.rng_seed == 5
        assert cfg.forest.n_trees == 7 and cfg.forest.seed == 5

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            config_from_mapping({"preset": "ce_b", "colour": "blue"})


class TestPrune:
    def test_flag_in_buffer_excluded(self):
        cfg = small_config()
        led = build_ledger([LoginEvent(1, 21), LoginEvent(2, 21), LoginEvent(3, 0),
                            LoginEvent(3, 49)], [FlagEvent(1, 26)])
        assert prune_training_accounts(led, cfg) == {2}

    def test_no_flags_is_noop(self):
        logins, _ = random_trace(1)
        led = build_ledger(logins, [])
        cfg = small_config()
        assert prune_training_accounts(led, cfg) == \
            {e.account for e in logins if e.day in cfg.train_dw}

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_predicate_oracle(self, seed):
        logins, flags = random_trace(seed, p_flag=0.02)
        led = build_ledger(logins, flags)
        for cfg in (small_config(), small_config(exclude_preflagged=True),
                    small_config(min_account_age_days=15, min_active_days=4),
                    small_config(exclude_preflagged=True, min_account_age_days=18,
                                 min_active_days=6)):
            assert prune_training_accounts(led, cfg) == brute_eligible(logins, flags, cfg)


class TestLabels:
    def test_flagged_in_label_window_is_positive(self):
        cfg = small_config()
        logins = [LoginEvent(1, 21), LoginEvent(2, 22), LoginEvent(3, 23), LoginEvent(9, 0),
                  LoginEvent(9, 49)]
        led = build_ledger(logins, [FlagEvent(1, 29), FlagEvent(3, 26)])
        eligible = prune_training_accounts(led, cfg)
        assert eligible == {1, 2}
        feats = extract_all(led, LoginEvents.from_records(logins), cfg.train_dw)
        labeled = label_training(led, eligible, cfg.train_lw, feats)
        assert [(e.account, e.label) for e in labeled] == [(1, True), (2, False)]

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_oracle(self, seed):
        logins, flags = random_trace(seed + 10, p_flag=0.03)
        led = build_ledger(logins, flags)
        cfg = small_config()
        eligible = prune_training_accounts(led, cfg)
        feats = extract_all(led, LoginEvents.from_records(logins), cfg.train_dw)
        labeled = label_training(led, eligible, cfg.train_lw, feats)
        truth = {f.account for f in flags if f.day in cfg.train_lw}
        assert {e.account: e.label for e in labeled} == {a: a in truth for a in eligible}
        assert labeled.positives.isdisjoint(labeled.negatives)


def labeled_set(n_pos, n_neg):
    n = n_pos + n_neg
    return LabeledSet(np.arange(1, n + 1), np.zeros((n, 13)), [True] * n_pos + [False] * n_neg,
                      W(0, 6))


class TestUndersample:
    def test_one_to_one(self):
        s = undersample(labeled_set(5, 100), 1.0, seed=0)
        assert s.n_positive == 5 and len(s) == 10

    def test_cap(self):
        s = undersample(labeled_set(5, 100), 1000.0, seed=0)
        assert len(s) == 105

    def test_no_positives(self):
        with pytest.raises(DegenerateTrainingError):
            undersample(labeled_set(0, 10), 1.0, seed=0)

    def test_seed_behaviour(self):
        base = labeled_set(10, 500)
        first = undersample(base, 1.0, seed=1).accounts.tolist()
        assert undersample(base, 1.0, seed=1).accounts.tolist() == first
        samples = {tuple(undersample(base, 1.0, seed=s).accounts.tolist()) for s in range(100)}
        assert len(samples) == 100


@given(st.integers(1, 30), st.integers(0, 80), st.floats(0.1, 5.0), st.integers(0, 2**32))
def test_undersample_keeps_positives_without_duplicates(n_pos, n_neg, ratio, seed):
    base = labeled_set(n_pos, n_neg)
    s = undersample(base, ratio, seed)
    acc = s.accounts.tolist()
    assert len(acc) == len(set(acc))
    assert s.positives == base.positives
    assert len(s) - s.n_positive == min(int(ratio * n_pos), n_neg)


class TestEvaluation:
    def test_universe(self):
        cfg = small_config()
        logins = [LoginEvent(1, 32), LoginEvent(2, 33), LoginEvent(3, 34), LoginEvent(4, 10),
                  LoginEvent(9, 0), LoginEvent(9, 49)]
        flags = [FlagEvent(1, 29), FlagEvent(3, 5)]
        led = build_ledger(logins, flags)
        assert evaluation_universe(led, cfg) == {2}

    def test_preprocess_interval(self):
        cfg = small_config(preprocess_interval=W(0, 9))
        logins = [LoginEvent(1, 32), LoginEvent(2, 33), LoginEvent(9, 0), LoginEvent(9, 49)]
        led = build_ledger(logins, [FlagEvent(2, 40)])
        assert evaluation_universe(led, cfg) == {1, 2}

    def test_horizon_boundaries(self):
        cfg = small_config()
        logins = [LoginEvent(1, 32), LoginEvent(2, 33), LoginEvent(9, 0), LoginEvent(9, 49)]
        led = build_ledger(logins, [FlagEvent(1, 35 + 7), FlagEvent(2, 35 + 8)])
        assert ground_truth_at_horizon(led, cfg, 7) == {1}
        assert ground_truth_at_horizon(led, cfg, 14) == {1, 2}
        with pytest.raises(ConfigError):
            ground_truth_at_horizon(led, cfg, 20)

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_oracle(self, seed):
        logins, flags = random_trace(seed + 20, p_flag=0.02)
        led = build_ledger(logins, flags)
        cfg = small_config()
        uni = {e.account for e in logins if e.day in cfg.test_dw} - \
            {f.account for f in flags if f.day <= cfg.train_lw.end}
        assert evaluation_universe(led, cfg) == uni
        for h in cfg.horizons:
            truth = {f.account for f in flags if 35 < f.day <= 35 + h} & uni
            assert ground_truth_at_horizon(led, cfg, h) == truth


@given(st.integers(0, 10_000), st.integers(7, 20), st.integers(1, 12), st.booleans())
def test_heuristics_never_enlarge_training_set(seed, age, active, preflagged):
    logins, flags = random_trace(seed, n_accounts=30, p_flag=0.03)
    led = build_ledger(logins, flags)
    loose = prune_training_accounts(led, small_config())
    strict = prune_training_accounts(led, small_config(exclude_preflagged=preflagged,
                                                       min_account_age_days=age,
                                                       min_active_days=active))
    assert strict <= loose


@given(st.integers(0, 10_000))
def test_truth_monotone_in_horizon(seed):
    logins, flags = random_trace(seed, n_accounts=30, p_flag=0.05)
    led = build_ledger(logins, flags)
    cfg = small_config(horizons=(3, 5, 9, 14))
    truths = [ground_truth_at_horizon(led, cfg, h) for h in cfg.horizons]
    assert all(a <= b for a, b in zip(truths, truths[1:]))
