import random
from collections import defaultdict
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from earlywarn.core import DayInterval
from earlywarn.errors import ContractError, CoverageError
from earlywarn.features import (FEATURE_NAMES, N_FEATURES, aggregate_window, daily_features,
                                extract_all)
from earlywarn.ingest import CATEGORY_COLUMNS, LoginEvent, LoginEvents, build_ledger

from conftest import random_logins


def oracle(events, window, rule="daily_sum"):
    """Independent recount straight from raw records with Python sets."""
    by_acc = defaultdict(list)
    for e in events:
        if e.day in window:
            by_acc[e.account].append(e)
    out = {}
    for acc, evs in by_acc.items():
        row = [len(evs)]
        for f in CATEGORY_COLUMNS:
            if rule == "daily_sum":
                row.append(len({(e.day, getattr(e, f)) for e in evs if getattr(e, f) != -1}))
            else:
                row.append(len({getattr(e, f) for e in evs if getattr(e, f) != -1}))
        row.append(sum(1 for e in evs if e.success == 1))
        row.append(sum(1 for e in evs if e.success == 0))
        row.append(int(any(e.verified_mobile == 1 for e in evs)))
        out[acc] = tuple(float(v) for v in row)
    return out


def matrix_as_dict(m):
    return {acc: m[acc].values for acc in m}


class TestDailyFeatures:
    def test_singleton(self):
        e = LoginEvent(1, 0, source=0, login_type=0, status=0, password_status=0, action=0,
                       geo=7, geo_status=-1, asn=100, user_agent=3, success=1, verified_mobile=0)
        d = daily_features([e])
        assert d.values() == (1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1, 0, 0)

    def test_two_geos(self):
        a = LoginEvent(1, 0, source=0, geo=7, success=1)
        b = LoginEvent(1, 0, source=0, geo=9, success=1)
        d = daily_features([a, b])
        assert d.uniq_geos == 2 and d.uniq_sources == 1

    def test_fifty_random_events_match_recount(self):
        rng = random.Random(5)
        evs = [replace(e, account=3, day=2) for e in random_logins(rng, 50, 1, 1)]
        d = daily_features(evs)
        assert tuple(float(v) for v in d.values()) == oracle(evs, DayInterval(2, 2))[3]

    def test_mixed_rows_rejected(self):
        with pytest.raises(ContractError):
            daily_features([LoginEvent(1, 0), LoginEvent(2, 0)])
        with pytest.raises(ContractError):
            daily_features([LoginEvent(1, 0), LoginEvent(1, 1)])
        with pytest.raises(ContractError):
            daily_features([])


class TestAggregateWindow:
    def test_one_day_is_identity(self):
        d = daily_features([LoginEvent(1, 4, geo=3, success=1, verified_mobile=1)])
        v = aggregate_window([d], DayInterval(0, 6))
        assert v.values == tuple(float(x) for x in d.values())

    def test_daily_uniques_add(self):
        d1 = daily_features([LoginEvent(1, 1, geo=3)])
        d2 = daily_features([LoginEvent(1, 2, geo=4)])
        assert aggregate_window([d1, d2], DayInterval(0, 6)).values[6] == 2.0

    def test_empty_is_absent(self):
        assert aggregate_window([], DayInterval(0, 6)) is None

    def test_seven_random_days_match_oracle(self):
        rng = random.Random(6)
        evs = random_logins(rng, 120, 1, 7)
        days = defaultdict(list)
        for e in evs:
            days[e.day].append(e)
        v = aggregate_window([daily_features(x) for x in days.values()], DayInterval(0, 6))
        assert v.values == oracle(evs, DayInterval(0, 6))[1]


class TestExtractAll:
    def test_empty_window(self):
        evs = [LoginEvent(1, 0), LoginEvent(1, 10)]
        led = build_ledger(evs, [])
        assert len(extract_all(led, LoginEvents.from_records(evs), DayInterval(3, 6))) == 0

    def test_three_disjoint_accounts(self):
        rng = random.Random(8)
        evs = [replace(e, account=acc) for acc in (11, 22, 33) for e in random_logins(rng, 15, 1, 7)]
        evs.append(LoginEvent(99, 0))
        evs.append(LoginEvent(99, 20))
        led = build_ledger(evs, [])
        m = extract_all(led, LoginEvents.from_records(evs), DayInterval(0, 6))
        assert matrix_as_dict(m) == {k: v for k, v in oracle(evs, DayInterval(0, 6)).items()}

    def test_idempotent(self):
        rng = random.Random(9)
        evs = random_logins(rng, 500, 40, 14)
        led = build_ledger(evs, [])
        table = LoginEvents.from_records(evs)
        w = DayInterval(0, 6)
        assert extract_all(led, table, w) == extract_all(led, table, w)

    def test_coverage_checked(self):
        evs = [LoginEvent(1, 0), LoginEvent(1, 5)]
        led = build_ledger(evs, [])
        with pytest.raises(CoverageError):
            extract_all(led, LoginEvents.from_records(evs), DayInterval(0, 9))

    def test_epoch_shift(self):
        evs = [LoginEvent(1, 100, geo=1), LoginEvent(1, 101, geo=2), LoginEvent(2, 104)]
        led = build_ledger(evs, [])
        m = extract_all(led, LoginEvents.from_records(evs), DayInterval(0, 1))
        assert list(m) == [1] and m[1].values[0] == 2.0 and m[1].values[6] == 2.0

    def test_threads_do_not_change_result(self):
        rng = random.Random(10)
        evs = random_logins(rng, 120_000, 3000, 7)
        led = build_ledger(evs, [])
        table = LoginEvents.from_records(evs)
        w = DayInterval(0, 6)
        assert extract_all(led, table, w, threads=3) == extract_all(led, table, w, threads=1)


def test_feature_order_is_frozen():
    assert N_FEATURES == 13
    assert FEATURE_NAMES[6] == "uniq_geos" and FEATURE_NAMES[12] == "verified_mobile"


@st.composite
def small_trace(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(1, 80))
    return random_logins(random.Random(seed), n, 10, 7)


@given(small_trace(), st.sampled_from(["daily_sum", "window_distinct"]))
def test_matches_recount_oracle(evs, rule):
    led = build_ledger(evs, [])
    lo = min(e.day for e in evs)
    w = DayInterval(0, led.coverage.end)
    shifted = [replace(e, day=e.day - lo) for e in evs]
    m = extract_all(led, LoginEvents.from_records(evs), w, unique_rule=rule)
    assert matrix_as_dict(m) == oracle(shifted, w, rule)


@given(small_trace(), st.integers(0, 6), st.integers(0, 6))
def test_window_monotonicity_and_conservation(evs, a, b):
    led = build_ledger(evs, [])
    table = LoginEvents.from_records(evs)
    lo, hi = sorted((a, b))
    hi = min(hi, led.coverage.end)
    lo = min(lo, hi)
    small = extract_all(led, table, DayInterval(lo, hi))
    big = extract_all(led, table, led.coverage)
    for acc in small:
        s, g = small[acc].values, big[acc].values
        assert all(g[i] >= s[i] for i in range(12))
    n_in = sum(1 for e in evs if lo <= e.day - led.epoch <= hi)
    assert sum(small[a].values[0] for a in small) == n_in


@given(small_trace())
def test_row_invariants(evs):
    led = build_ledger(evs, [])
    m = extract_all(led, LoginEvents.from_records(evs), led.coverage)
    for acc in m:
        v = m[acc].values
        assert all(x >= 0 for x in v)
        assert all(v[i] <= v[0] for i in range(1, 10))
        assert v[10] + v[11] <= v[0]
        assert v[12] in (0.0, 1.0)


def test_success_counts_partition_when_always_present():
    evs = [LoginEvent(1, 0, success=1), LoginEvent(1, 0, success=0), LoginEvent(1, 1, success=1)]
    led = build_ledger(evs, [])
    v = extract_all(led, LoginEvents.from_records(evs), led.coverage)[1].values
    assert v[10] + v[11] == v[0]
