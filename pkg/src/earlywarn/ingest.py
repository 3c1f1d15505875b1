"""Login and flag trace files: parsing, writing, and ledger construction.

Both files are tab-separated with a required header line.  Every field is an
integer code; the day column additionally accepts a decimal part, which is
truncated toward the day boundary.  ``-1`` marks a missing value.

Login file columns::

    account day source login_type status password_status action geo
    geo_status asn user_agent success verified_mobile

Flag file columns::

    account day
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
import pandas as pd

from .core import ACCOUNT_DTYPE, AccountSetLedger, DayInterval
from .errors import EmptyTraceError, ParseError

MISSING = -1

LOGIN_COLUMNS = (
    "account", "day", "source", "login_type", "status", "password_status", "action",
    "geo", "geo_status", "asn", "user_agent", "success", "verified_mobile",
)
FLAG_COLUMNS = ("account", "day")
CATEGORY_COLUMNS = LOGIN_COLUMNS[2:11]
BOOL_COLUMNS = ("success", "verified_mobile")

_ACCOUNT = r"\d{1,20}"
_DAY = r"-?\d{1,15}(?:\.\d+)?"
_CODE = r"(?:-1|\d{1,18})"
_BOOL = r"(?:-1|0|1)"
_FIELD_RE = {
    "account": re.compile(_ACCOUNT),
    "day": re.compile(_DAY),
    **{c: re.compile(_CODE) for c in CATEGORY_COLUMNS},
    **{c: re.compile(_BOOL) for c in BOOL_COLUMNS},
}
_MAX_ACCOUNT = 2**64 - 1


def _line_pattern(columns):
    parts = {"account": _ACCOUNT, "day": _DAY, **{c: _CODE for c in CATEGORY_COLUMNS},
             **{c: _BOOL for c in BOOL_COLUMNS}}
    return re.compile(r"\t".join(parts[c] for c in columns) + r"\n?")


_LOGIN_LINE = _line_pattern(LOGIN_COLUMNS)
_FLAG_LINE = _line_pattern(FLAG_COLUMNS)


@dataclass(frozen=True)
class LoginEvent:
    """One login record.  ``success`` and ``verified_mobile`` are 1/0, or -1 when absent."""

    account: int
    day: int
    source: int = MISSING
    login_type: int = MISSING
    status: int = MISSING
    password_status: int = MISSING
    action: int = MISSING
    geo: int = MISSING
    geo_status: int = MISSING
    asn: int = MISSING
    user_agent: int = MISSING
    success: int = MISSING
    verified_mobile: int = MISSING


@dataclass(frozen=True)
class FlagEvent:
    account: int
    day: int


class _EventTable(Sequence):
    """Columnar storage behaving as a sequence of record objects."""

    columns: tuple[str, ...] = ()
    record_type: type = object

    def __init__(self, data: dict[str, np.ndarray] | None = None):
        data = data or {}
        cols = {}
        for name in self.columns:
            dtype = ACCOUNT_DTYPE if name == "account" else np.int64
            cols[name] = np.ascontiguousarray(data.get(name, np.zeros(0)), dtype=dtype)
        sizes = {a.size for a in cols.values()}
        if len(sizes) > 1:
            raise ValueError(f"column lengths differ: {sizes}")
        self.data = cols

    @classmethod
    def from_records(cls, records: Iterable) -> "_EventTable":
        records = list(records)
        return cls({name: np.array([getattr(r, name) for r in records], dtype=object)
                    .astype(ACCOUNT_DTYPE if name == "account" else np.int64)
                    for name in cls.columns} if records else None)

    @classmethod
    def concat(cls, tables: Sequence["_EventTable"]) -> "_EventTable":
        if not tables:
            return cls()
        return cls({n: np.concatenate([t.data[n] for t in tables]) for n in cls.columns})

    def __getattr__(self, name):
        data = self.__dict__.get("data")
        if data is not None and name in data:
            return data[name]
        raise AttributeError(name)

    def __len__(self) -> int:
        return int(self.data["account"].size)

    def __getitem__(self, i):
        if isinstance(i, slice) or isinstance(i, np.ndarray):
            return type(self)({n: a[i] for n, a in self.data.items()})
        return self.record_type(**{n: int(a[i]) for n, a in self.data.items()})

    def __iter__(self) -> Iterator:
        rows = zip(*(self.data[n].tolist() for n in self.columns))
        for row in rows:
            yield self.record_type(*row)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return all(np.array_equal(self.data[n], other.data[n]) for n in self.columns)

    def __repr__(self):
        return f"{type(self).__name__}(n={len(self)})"


class LoginEvents(_EventTable):
    columns = LOGIN_COLUMNS
    record_type = LoginEvent


class FlagEvents(_EventTable):
    columns = FLAG_COLUMNS
    record_type = FlagEvent


def _locate_error(path, lineno: int, line: str, columns) -> ParseError:
    text = line.rstrip("\n")
    if text.endswith("\r"):
        return ParseError(path, lineno, len(text), "carriage return in line")
    parts = text.split("\t")
    for col, (name, value) in enumerate(zip(columns, parts), start=1):
        if not _FIELD_RE[name].fullmatch(value):
            return ParseError(path, lineno, col, f"bad value {value!r} for column '{name}'")
        if name == "account" and int(value) > _MAX_ACCOUNT:
            return ParseError(path, lineno, col, f"account id {value} exceeds 64 bits")
    if len(parts) != len(columns):
        return ParseError(path, lineno, min(len(parts), len(columns)) + 1,
                          f"expected {len(columns)} fields, found {len(parts)}")
    return ParseError(path, lineno, 1, "unparseable line")


def _read_table(path, columns, line_re, table_cls):
    path = Path(path)
    n_rows = 0
    with open(path, "r", encoding="utf-8", newline="") as fh:
        try:
            header = fh.readline()
            if header == "":
                return table_cls()
            if header.rstrip("\n") != "\t".join(columns):
                raise ParseError(path, 1, 1, f"header must be {'<TAB>'.join(columns)!r}")
            for lineno, line in enumerate(fh, start=2):
                if not line_re.fullmatch(line):
                    raise _locate_error(path, lineno, line, columns)
                account = line[: line.index("\t")] if "\t" in line else line
                if len(account) == 20 and int(account) > _MAX_ACCOUNT:
                    raise _locate_error(path, lineno, line, columns)
                n_rows += 1
        except UnicodeDecodeError as exc:
            raise ParseError(path, 0, 0, f"not valid UTF-8: {exc}") from None
    if n_rows == 0:
        return table_cls()
    dtypes = {c: (np.uint64 if c == "account" else np.float64 if c == "day" else np.int64)
              for c in columns}
    frame = pd.read_csv(path, sep="\t", header=0, names=list(columns), dtype=dtypes,
                        engine="c", na_filter=False)
    data = {c: frame[c].to_numpy() for c in columns}
    data["day"] = np.floor(data["day"]).astype(np.int64)
    return table_cls(data)


def parse_login_file(path) -> LoginEvents:
    """Parse a login TSV.  Raises :class:`ParseError` carrying the line and column."""
    return _read_table(path, LOGIN_COLUMNS, _LOGIN_LINE, LoginEvents)


def parse_flag_file(path) -> FlagEvents:
    return _read_table(path, FLAG_COLUMNS, _FLAG_LINE, FlagEvents)


def _write_table(path, table: _EventTable) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(table.columns) + "\n")
        if len(table):
            frame = pd.DataFrame({c: table.data[c] for c in table.columns})
            frame.to_csv(fh, sep="\t", header=False, index=False, lineterminator="\n")


def write_login_file(path, events: LoginEvents) -> None:
    _write_table(path, events if isinstance(events, LoginEvents) else LoginEvents.from_records(events))


def write_flag_file(path, events: FlagEvents) -> None:
    _write_table(path, events if isinstance(events, FlagEvents) else FlagEvents.from_records(events))


def build_ledger(logins, flags) -> AccountSetLedger:
    """Build the ledger; day 0 is the earliest day present in either input."""
    if not isinstance(logins, LoginEvents):
        logins = LoginEvents.from_records(logins)
    if not isinstance(flags, FlagEvents):
        flags = FlagEvents.from_records(flags)
    if len(logins) == 0 and len(flags) == 0:
        raise EmptyTraceError("both login and flag inputs are empty")
    days = np.concatenate([logins.day, flags.day])
    epoch = int(days.min())
    coverage = DayInterval(0, int(days.max()) - epoch)
    return AccountSetLedger(logins.account, logins.day - epoch, flags.account,
                            flags.day - epoch, coverage=coverage, epoch=epoch)


def relative_days(events: _EventTable, ledger: AccountSetLedger) -> np.ndarray:
    """Event days expressed in ledger days."""
    return events.day - ledger.epoch
