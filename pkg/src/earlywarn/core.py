"""Day arithmetic and the account-set ledger.

Days are plain integers counted from the trace epoch (day 0 is the earliest day
seen in either input file).  Account ids are opaque unsigned 64-bit integers.
The ledger stores, per account, the days with login activity and the days with a
suspicious flag; window queries return the union of the per-day sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import CoverageError, ContractError

Day = int
AccountId = int

ACCOUNT_DTYPE = np.uint64


@dataclass(frozen=True, order=True)
class DayInterval:
    """Closed interval of days ``[start, end]``."""

    start: Day
    end: Day

    def __post_init__(self):
        if int(self.start) != self.start or int(self.end) != self.end:
            raise ContractError(f"interval bounds must be integers: {self.start}, {self.end}")
        if self.start > self.end:
            raise ContractError(f"interval start {self.start} after end {self.end}")

    @property
    def length_days(self) -> int:
        return self.end - self.start + 1

    def __contains__(self, day) -> bool:
        return self.start <= day <= self.end

    def __iter__(self):
        return iter(range(self.start, self.end + 1))

    def contains_interval(self, other: "DayInterval") -> bool:
        return self.start <= other.start and other.end <= self.end

    def overlaps(self, other: "DayInterval") -> bool:
        return not (self.end < other.start or other.end < self.start)

    def __str__(self) -> str:
        return f"{self.start}..{self.end}"

    @classmethod
    def parse(cls, text: str) -> "DayInterval":
        lo, sep, hi = text.strip().partition("..")
        if not sep:
            raise ValueError(f"expected 'start..end', got {text!r}")
        return cls(int(lo), int(hi))

    @classmethod
    def week(cls, week: int, epoch: int = 0) -> "DayInterval":
        """Week ``week`` (1-based) counted from ``epoch``."""
        start = epoch + 7 * (week - 1)
        return cls(start, start + 6)

    @classmethod
    def weeks(cls, first: int, last: int, epoch: int = 0) -> "DayInterval":
        return cls(cls.week(first, epoch).start, cls.week(last, epoch).end)


def _unique_pairs(accounts, days) -> tuple[np.ndarray, np.ndarray]:
    accounts = np.asarray(accounts, dtype=ACCOUNT_DTYPE)
    days = np.asarray(days, dtype=np.int64)
    if accounts.shape != days.shape:
        raise ContractError("account and day arrays differ in length")
    if accounts.size == 0:
        return accounts, days
    order = np.lexsort((days, accounts))
    a, d = accounts[order], days[order]
    keep = np.ones(a.size, dtype=bool)
    keep[1:] = (a[1:] != a[:-1]) | (d[1:] != d[:-1])
    return a[keep], d[keep]


def _as_set(arr: np.ndarray) -> set[AccountId]:
    return set(arr.tolist())


class _PairIndex:
    """Sorted unique (account, day) pairs with a per-account offset table."""

    def __init__(self, accounts, days):
        self.accounts, self.days = _unique_pairs(accounts, days)
        if self.accounts.size:
            starts = np.flatnonzero(np.r_[True, self.accounts[1:] != self.accounts[:-1]])
        else:
            starts = np.zeros(0, dtype=np.int64)
        self.keys = self.accounts[starts]
        self.offsets = np.r_[starts, self.accounts.size].astype(np.int64)

    def days_of(self, account: AccountId) -> tuple[Day, ...]:
        i = np.searchsorted(self.keys, np.uint64(account))
        if i >= self.keys.size or self.keys[i] != np.uint64(account):
            return ()
        return tuple(self.days[self.offsets[i] : self.offsets[i + 1]].tolist())

    def in_window(self, window: DayInterval) -> np.ndarray:
        mask = (self.days >= window.start) & (self.days <= window.end)
        return np.unique(self.accounts[mask])

    def first_day(self) -> np.ndarray:
        return self.days[self.offsets[:-1]]

    def count_in_window(self, window: DayInterval) -> np.ndarray:
        """Number of distinct days in ``window`` per key (aligned with ``self.keys``)."""
        mask = (self.days >= window.start) & (self.days <= window.end)
        idx = np.repeat(np.arange(self.keys.size), np.diff(self.offsets))
        return np.bincount(idx[mask], minlength=self.keys.size)

    def __eq__(self, other):
        return (
            isinstance(other, _PairIndex)
            and np.array_equal(self.accounts, other.accounts)
            and np.array_equal(self.days, other.days)
        )


class AccountSetLedger:
    """Immutable per-account login and flag day sets over a covered interval.

    ``login_accounts/login_days`` and ``flag_accounts/flag_days`` are parallel
    arrays of (account, day) observations in ledger days; duplicates collapse.
    """

    def __init__(self, login_accounts, login_days, flag_accounts, flag_days,
                 coverage: DayInterval, epoch: int = 0):
        self.coverage = coverage
        self.epoch = int(epoch)
        self._logins = _PairIndex(login_accounts, login_days)
        self._flags = _PairIndex(flag_accounts, flag_days)
        for name, idx in (("login", self._logins), ("flag", self._flags)):
            if idx.days.size and (idx.days.min() < coverage.start or idx.days.max() > coverage.end):
                raise ContractError(f"{name} day outside ledger coverage {coverage}")

    # -- raw views ---------------------------------------------------------
    @property
    def login_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        return self._logins.accounts, self._logins.days

    @property
    def flag_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        return self._flags.accounts, self._flags.days

    @property
    def login_accounts(self) -> np.ndarray:
        return self._logins.keys

    @property
    def flag_accounts(self) -> np.ndarray:
        return self._flags.keys

    def login_days(self, account: AccountId) -> tuple[Day, ...]:
        return self._logins.days_of(account)

    def flag_days(self, account: AccountId) -> tuple[Day, ...]:
        return self._flags.days_of(account)

    # -- window queries ----------------------------------------------------
    def check_window(self, window: DayInterval) -> None:
        if window.start < self.coverage.start:
            raise CoverageError(
                f"window start {window.start} precedes coverage start {self.coverage.start}")
        if window.end > self.coverage.end:
            raise CoverageError(
                f"window end {window.end} exceeds coverage end {self.coverage.end}")

    def active_array(self, window: DayInterval) -> np.ndarray:
        self.check_window(window)
        return self._logins.in_window(window)

    def flagged_array(self, window: DayInterval) -> np.ndarray:
        self.check_window(window)
        return self._flags.in_window(window)

    def flagged_through(self, day: Day) -> np.ndarray:
        """Accounts flagged on any day <= ``day`` (no coverage check: a prefix query)."""
        return np.unique(self._flags.accounts[self._flags.days <= day])

    def first_seen_array(self, accounts=None) -> np.ndarray:
        """First login day per account, -1 where never seen."""
        first = self._logins.first_day()
        if accounts is None:
            return first
        accounts = np.asarray(accounts, dtype=ACCOUNT_DTYPE)
        out = np.full(accounts.size, -1, dtype=np.int64)
        if self._logins.keys.size == 0:
            return out
        pos = np.searchsorted(self._logins.keys, accounts)
        pos_c = np.minimum(pos, self._logins.keys.size - 1)
        hit = self._logins.keys[pos_c] == accounts
        out[hit] = first[pos_c[hit]]
        return out

    def active_day_counts(self, accounts, window: DayInterval) -> np.ndarray:
        """Distinct login days inside ``window`` for each of ``accounts``."""
        counts = self._logins.count_in_window(window)
        accounts = np.asarray(accounts, dtype=ACCOUNT_DTYPE)
        out = np.zeros(accounts.size, dtype=np.int64)
        if self._logins.keys.size == 0:
            return out
        pos = np.searchsorted(self._logins.keys, accounts)
        pos_c = np.minimum(pos, self._logins.keys.size - 1)
        hit = self._logins.keys[pos_c] == accounts
        out[hit] = counts[pos_c[hit]]
        return out

    def __eq__(self, other):
        if not isinstance(other, AccountSetLedger):
            return NotImplemented
        return (self.coverage == other.coverage and self.epoch == other.epoch
                and self._logins == other._logins and self._flags == other._flags)

    def __repr__(self):
        return (f"AccountSetLedger(coverage={self.coverage}, epoch={self.epoch}, "
                f"accounts={self._logins.keys.size}, flagged={self._flags.keys.size})")


def active_accounts(ledger: AccountSetLedger, window: DayInterval) -> set[AccountId]:
    """Accounts with at least one login on a day in ``window``."""
    return _as_set(ledger.active_array(window))


def flagged_accounts(ledger: AccountSetLedger, window: DayInterval) -> set[AccountId]:
    """Accounts flagged as suspicious on at least one day in ``window``."""
    return _as_set(ledger.flagged_array(window))


def first_seen(ledger: AccountSetLedger, account: AccountId) -> Day | None:
    days = ledger.login_days(account)
    return days[0] if days else None


def as_account_array(accounts: Iterable[AccountId]) -> np.ndarray:
    if isinstance(accounts, np.ndarray):
        return accounts.astype(ACCOUNT_DTYPE, copy=False)
    return np.fromiter((int(a) for a in accounts), dtype=ACCOUNT_DTYPE)
