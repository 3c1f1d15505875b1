"""The 13 low-cost login features, computed per account-day and summed over a window.

Feature order is fixed; model files record it and importance reports rely on it.
Unique-count features skip the missing sentinel.  By default a window's unique
count is the sum of the daily unique counts (``"daily_sum"``); the alternative
``"window_distinct"`` counts distinct values over the whole window.
"""

from __future__ import annotations

from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .core import ACCOUNT_DTYPE, AccountSetLedger, DayInterval
from .errors import ContractError
from .ingest import CATEGORY_COLUMNS, MISSING, LoginEvent, LoginEvents

FEATURE_NAMES = (
    "login_attempts",
    "uniq_sources",
    "uniq_login_types",
    "uniq_statuses",
    "uniq_password_statuses",
    "uniq_actions",
    "uniq_geos",
    "uniq_geo_statuses",
    "uniq_asns",
    "uniq_user_agents",
    "successful_logins",
    "unsuccessful_logins",
    "verified_mobile",
)
N_FEATURES = len(FEATURE_NAMES)
FEATURE_ORDER_TAG = ",".join(FEATURE_NAMES)
UNIQUE_FIELDS = CATEGORY_COLUMNS  # f2..f10, same order
UNIQUE_RULES = ("daily_sum", "window_distinct")


@dataclass(frozen=True)
class DailyFeatures:
    account: int
    day: int
    login_attempts: int
    uniq_sources: int
    uniq_login_types: int
    uniq_statuses: int
    uniq_password_statuses: int
    uniq_actions: int
    uniq_geos: int
    uniq_geo_statuses: int
    uniq_asns: int
    uniq_user_agents: int
    successful_logins: int
    unsuccessful_logins: int
    verified_mobile: bool

    def values(self) -> tuple:
        return tuple(int(getattr(self, name)) for name in FEATURE_NAMES)


@dataclass(frozen=True)
class FeatureVector:
    account: int
    window: DayInterval
    values: tuple
    feature_order: str = FEATURE_ORDER_TAG

    def __post_init__(self):
        if len(self.values) != N_FEATURES:
            raise ContractError(f"feature vector needs {N_FEATURES} values, got {len(self.values)}")


def daily_features(events: Sequence[LoginEvent]) -> DailyFeatures:
    """Features of one account on one day."""
    if not events:
        raise ContractError("daily_features needs at least one event")
    account, day = events[0].account, events[0].day
    if any(e.account != account or e.day != day for e in events):
        raise ContractError("daily_features events must share one account and one day")
    uniques = [len({getattr(e, f) for e in events} - {MISSING}) for f in UNIQUE_FIELDS]
    return DailyFeatures(
        account, day, len(events), *uniques,
        sum(e.success == 1 for e in events),
        sum(e.success == 0 for e in events),
        any(e.verified_mobile == 1 for e in events),
    )


def aggregate_window(daily: Sequence[DailyFeatures], window: DayInterval) -> FeatureVector | None:
    """Sum daily rows over ``window``; verified_mobile is OR-ed.  None if no rows."""
    if not daily:
        return None
    account = daily[0].account
    for row in daily:
        if row.account != account:
            raise ContractError("aggregate_window rows must belong to one account")
        if row.day not in window:
            raise ContractError(f"daily row for day {row.day} outside window {window}")
    sums = [sum(row.values()[i] for row in daily) for i in range(N_FEATURES - 1)]
    mobile = int(any(row.verified_mobile for row in daily))
    return FeatureVector(account, window, tuple(float(v) for v in sums) + (float(mobile),))


class FeatureMatrix(Mapping):
    """Feature vectors of all accounts active in a window, stored as one array.

    ``accounts`` is sorted; row ``i`` of ``values`` belongs to ``accounts[i]``.
    """

    def __init__(self, accounts: np.ndarray, values: np.ndarray, window: DayInterval):
        self.accounts = np.asarray(accounts, dtype=ACCOUNT_DTYPE)
        self.values = np.asarray(values, dtype=np.float64).reshape(-1, N_FEATURES)
        self.window = window

    def _index(self, account) -> int:
        i = int(np.searchsorted(self.accounts, np.uint64(account)))
        if i >= self.accounts.size or self.accounts[i] != np.uint64(account):
            raise KeyError(account)
        return i

    def __getitem__(self, account) -> FeatureVector:
        return FeatureVector(int(account), self.window, tuple(self.values[self._index(account)].tolist()))

    def __iter__(self) -> Iterator[int]:
        return iter(self.accounts.tolist())

    def __len__(self) -> int:
        return int(self.accounts.size)

    def rows(self, accounts) -> np.ndarray:
        """Value rows for ``accounts`` (all must be present)."""
        accounts = np.asarray(accounts, dtype=ACCOUNT_DTYPE)
        if self.accounts.size == 0:
            if accounts.size:
                raise KeyError("no accounts in feature matrix")
            return np.zeros((0, N_FEATURES))
        pos = np.searchsorted(self.accounts, accounts)
        pos_c = np.minimum(pos, self.accounts.size - 1)
        missing = self.accounts[pos_c] != accounts
        if missing.any():
            raise KeyError(int(accounts[missing][0]))
        return self.values[pos_c]

    def __eq__(self, other):
        if not isinstance(other, FeatureMatrix):
            return super().__eq__(other)
        return (self.window == other.window and np.array_equal(self.accounts, other.accounts)
                and np.array_equal(self.values, other.values))


def _distinct_per_group(group: np.ndarray, *keys: np.ndarray, n_groups: int) -> np.ndarray:
    """Number of distinct key tuples within each group id."""
    if group.size == 0:
        return np.zeros(n_groups, dtype=np.int64)
    order = np.lexsort(keys[::-1] + (group,)) if keys else np.argsort(group, kind="stable")
    g = group[order]
    new = np.ones(g.size, dtype=bool)
    new[1:] = g[1:] != g[:-1]
    for k in keys:
        ks = k[order]
        new[1:] |= ks[1:] != ks[:-1]
    return np.bincount(g[new], minlength=n_groups)


def _extract_block(account, day, cols, unique_rule):
    accounts, inv = np.unique(account, return_inverse=True)
    n = accounts.size
    out = np.zeros((n, N_FEATURES), dtype=np.float64)
    out[:, 0] = np.bincount(inv, minlength=n)
    for j, field in enumerate(UNIQUE_FIELDS, start=1):
        x = cols[field]
        keep = x != MISSING
        if unique_rule == "daily_sum":
            out[:, j] = _distinct_per_group(inv[keep], day[keep], x[keep], n_groups=n)
        else:
            out[:, j] = _distinct_per_group(inv[keep], x[keep], n_groups=n)
    success = cols["success"]
    out[:, 10] = np.bincount(inv, weights=(success == 1), minlength=n)
    out[:, 11] = np.bincount(inv, weights=(success == 0), minlength=n)
    out[:, 12] = np.bincount(inv, weights=(cols["verified_mobile"] == 1), minlength=n) > 0
    return accounts, out


def extract_all(ledger: AccountSetLedger, events: LoginEvents, window: DayInterval,
                unique_rule: str = "daily_sum", threads: int = 1) -> FeatureMatrix:
    """One feature vector per account active in ``window``.

    ``events`` are the raw login events the ledger was built from (file days);
    they are shifted to ledger days with the ledger epoch.
    """
    if unique_rule not in UNIQUE_RULES:
        raise ContractError(f"unknown unique_rule {unique_rule!r}")
    ledger.check_window(window)
    day = events.day - ledger.epoch
    mask = (day >= window.start) & (day <= window.end)
    account = events.account[mask]
    day = day[mask]
    cols = {c: events.data[c][mask] for c in (*UNIQUE_FIELDS, "success", "verified_mobile")}

    threads = max(1, int(threads))
    if threads == 1 or account.size < 100_000:
        accounts, values = _extract_block(account, day, cols, unique_rule)
        return FeatureMatrix(accounts, values, window)

    part = (account % np.uint64(threads)).astype(np.int64)

    def run(p):
        sel = part == p
        return _extract_block(account[sel], day[sel], {c: v[sel] for c, v in cols.items()},
                              unique_rule)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(run, range(threads)))
    accounts = np.concatenate([r[0] for r in results])
    values = np.concatenate([r[1] for r in results])
    order = np.argsort(accounts, kind="stable")
    return FeatureMatrix(accounts[order], values[order], window)


def write_feature_dump(path, matrix: FeatureMatrix) -> None:
    header = ["account", "window_start", "window_end"] + [f"f{i}" for i in range(1, N_FEATURES + 1)]
    with open(Path(path), "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for acc, row in zip(matrix.accounts.tolist(), matrix.values.astype(np.int64).tolist()):
            fh.write("\t".join(map(str, [acc, matrix.window.start, matrix.window.end, *row])) + "\n")
