import random
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from earlywarn.core import DayInterval
from earlywarn.errors import EmptyTraceError, ParseError
from earlywarn.ingest import (FLAG_COLUMNS, LOGIN_COLUMNS, FlagEvent, FlagEvents, LoginEvent,
                              LoginEvents, build_ledger, parse_flag_file, parse_login_file,
                              write_flag_file, write_login_file)

from conftest import random_flags, random_logins

DATA = Path(__file__).parent / "data"
LOGIN_HEADER = "\t".join(LOGIN_COLUMNS) + "\n"
FLAG_HEADER = "\t".join(FLAG_COLUMNS) + "\n"
GOOD_LOGIN = "5\t3\t0\t1\t0\t0\t0\t7\t0\t100\t12\t1\t0\n"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestParseLoginFile:
    def test_empty_file(self, tmp_path):
        assert len(parse_login_file(write(tmp_path, "l.tsv", ""))) == 0

    def test_header_only(self, tmp_path):
        assert len(parse_login_file(write(tmp_path, "l.tsv", LOGIN_HEADER))) == 0

    def test_single_line_is_identity(self, tmp_path):
        events = parse_login_file(write(tmp_path, "l.tsv", LOGIN_HEADER + GOOD_LOGIN))
        assert list(events) == [LoginEvent(5, 3, 0, 1, 0, 0, 0, 7, 0, 100, 12, 1, 0)]

    def test_non_numeric_day_on_line_7(self, tmp_path):
        lines = [GOOD_LOGIN] * 5 + [GOOD_LOGIN.replace("\t3\t", "\tmonday\t", 1)] + [GOOD_LOGIN]
        with pytest.raises(ParseError) as err:
            parse_login_file(write(tmp_path, "l.tsv", LOGIN_HEADER + "".join(lines)))
        assert err.value.line == 7 and err.value.column == 2
        assert ":7:2:" in str(err.value)

    def test_short_line_reports_first_missing_column(self, tmp_path):
        with pytest.raises(ParseError) as err:
            parse_login_file(write(tmp_path, "l.tsv", LOGIN_HEADER + "5\t3\t0\n"))
        assert (err.value.line, err.value.column) == (2, 4)

    def test_bad_header(self, tmp_path):
        with pytest.raises(ParseError) as err:
            parse_login_file(write(tmp_path, "l.tsv", "account\tday\n" + GOOD_LOGIN))
        assert err.value.line == 1

    def test_account_overflow(self, tmp_path):
        line = GOOD_LOGIN.replace("5\t", "18446744073709551616\t", 1)
        with pytest.raises(ParseError) as err:
            parse_login_file(write(tmp_path, "l.tsv", LOGIN_HEADER + line))
        assert err.value.column == 1

    def test_unknown_codes_accepted_verbatim(self, tmp_path):
        line = "5\t3\t987654\t1\t0\t0\t0\t7\t0\t100\t12\t1\t0\n"
        assert parse_login_file(write(tmp_path, "l.tsv", LOGIN_HEADER + line))[0].source == 987654

    def test_golden_file(self):
        events = parse_login_file(DATA / "logins_golden.tsv")
        assert len(events) == 4
        # Fractional days are truncated to the day.
        assert events[1].day == 4 and events[1].geo == 9 and events[1].verified_mobile == -1
        assert events[3].account == 2**64 - 1


class TestParseFlagFile:
    def test_empty(self, tmp_path):
        assert len(parse_flag_file(write(tmp_path, "f.tsv", ""))) == 0

    def test_single(self, tmp_path):
        assert list(parse_flag_file(write(tmp_path, "f.tsv", FLAG_HEADER + "8\t2\n"))) == \
            [FlagEvent(8, 2)]

    def test_malformed(self, tmp_path):
        with pytest.raises(ParseError) as err:
            parse_flag_file(write(tmp_path, "f.tsv", FLAG_HEADER + "8\t2\n8\t2\t1\n"))
        assert (err.value.line, err.value.column) == (3, 3)


class TestBuildLedger:
    def test_single_login_and_flag(self):
        led = build_ledger([LoginEvent(1, 4)], [FlagEvent(1, 6)])
        assert led.epoch == 4
        assert led.coverage == DayInterval(0, 2)
        assert led.login_days(1) == (0,) and led.flag_days(1) == (2,)

    def test_duplicate_flags_collapse(self):
        led = build_ledger([LoginEvent(1, 0)], [FlagEvent(1, 6), FlagEvent(1, 6)])
        assert led.flag_days(1) == (6,)

    def test_both_empty(self):
        with pytest.raises(EmptyTraceError):
            build_ledger([], [])

    def test_golden_files(self):
        led = build_ledger(parse_login_file(DATA / "logins_golden.tsv"),
                           parse_flag_file(DATA / "flags_golden.tsv"))
        assert led.epoch == 4 and led.coverage == DayInterval(0, 5)
        assert led.login_days(101) == (0,)
        assert led.flag_days(101) == (2,)
        assert led.flag_days(202) == (5,)


def test_round_trip(tmp_path):
    rng = random.Random(7)
    logins = LoginEvents.from_records(random_logins(rng, 2000, 100, 30))
    flags = FlagEvents.from_records(random_flags(rng, 50, 100, 30))
    write_login_file(tmp_path / "l.tsv", logins)
    write_flag_file(tmp_path / "f.tsv", flags)
    logins2 = parse_login_file(tmp_path / "l.tsv")
    flags2 = parse_flag_file(tmp_path / "f.tsv")
    assert logins2 == logins and flags2 == flags
    assert build_ledger(logins2, flags2) == build_ledger(logins, flags)


@given(st.text(alphabet="0123456789\t\n.-ab\r ", max_size=200))
def test_parser_is_total(tmp_path_factory, body):
    path = tmp_path_factory.mktemp("fuzz") / "l.tsv"
    path.write_text(LOGIN_HEADER + body, encoding="utf-8", newline="")
    try:
        events = parse_login_file(path)
    except ParseError as exc:
        assert exc.line >= 2 and exc.column >= 1
    else:
        n_lines = body.count("\n") + (1 if body and not body.endswith("\n") else 0)
        assert len(events) == n_lines


@given(st.binary(max_size=120))
def test_flag_parser_is_total_on_bytes(tmp_path_factory, body):
    path = tmp_path_factory.mktemp("fuzzb") / "f.tsv"
    path.write_bytes(FLAG_HEADER.encode() + body)
    try:
        parse_flag_file(path)
    except ParseError:
        pass
