"""CSV schema v1: parsing, serialization, validation."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xctlab.errors import (
    DuplicateIdError,
    HeaderMismatchError,
    NumericParseError,
    RecordInvariantError,
    RowArityError,
    UnknownColumnError,
)
from xctlab.fibertable import (
    COLUMN_NAMES,
    FiberTable,
    parse_csv,
    write_csv,
)

from helpers import make_record, random_table

HEADER = ",".join(COLUMN_NAMES)


def test_column_count_is_twenty():
    assert len(COLUMN_NAMES) == 20


def test_use_case_table_parses():
    table = random_table(214, seed=4)
    text = write_csv(table)
    parsed = parse_csv(text)
    assert len(parsed) == 214


def test_header_only_is_empty_table():
    table = parse_csv(HEADER + "\n")
    assert len(table) == 0


def test_row_arity_error_names_row():
    bad = HEADER + "\n1,2,3\n"
    with pytest.raises(RowArityError) as exc:
        parse_csv(bad)
    assert exc.value.row == 2
    assert exc.value.got == 3
    assert exc.value.expected == 20


def test_header_mismatch_lists_columns():
    with pytest.raises(HeaderMismatchError) as exc:
        parse_csv("id,bogus\n")
    assert "bogus" in exc.value.extra
    assert "start_x" in exc.value.missing
    with pytest.raises(HeaderMismatchError):
        parse_csv("")


def test_numeric_parse_error_names_cell():
    row = write_csv(random_table(1)).strip().splitlines()[-1]
    cells = row.split(",")
    cells[7] = "abc"
    with pytest.raises(NumericParseError) as exc:
        parse_csv(HEADER + "\n" + ",".join(cells) + "\n")
    assert exc.value.column == "straight_length"


def test_duplicate_id_rejected():
    table = random_table(2)
    text = write_csv(table)
    lines = text.strip().splitlines()
    dup = lines[:-1] + [lines[-2]]  # repeat the first data row
    with pytest.raises(DuplicateIdError):
        parse_csv("\n".join(dup) + "\n")


def test_unit_comment_lines_ignored():
    table = random_table(3, seed=1)
    text = write_csv(table)
    assert text.startswith("#")
    assert parse_csv(text) == table


def test_curved_shorter_than_straight_rejected():
    rec = make_record(1, (0, 0, 0), (0, 0, 10), 0.5)
    object.__setattr__(rec, "curved_length", 9.0)
    with pytest.raises(RecordInvariantError):
        FiberTable([rec])


def test_straight_length_must_match_endpoints():
    rec = make_record(1, (0, 0, 0), (0, 0, 10), 0.5)
    object.__setattr__(rec, "straight_length", 10.5)
    with pytest.raises(RecordInvariantError):
        FiberTable([rec])


def test_column_access():
    table = random_table(214, seed=2)
    vals = table.column("straight_length")
    assert len(vals) == 214
    assert vals == [r.straight_length for r in table]
    assert table.column("id") == [float(r.id) for r in table]
    with pytest.raises(UnknownColumnError) as exc:
        table.column("bogus")
    assert "straight_length" in exc.value.valid


def test_write_empty_table_is_header_only():
    text = write_csv(FiberTable([]))
    data_lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    assert data_lines == [HEADER]


def test_one_record_two_data_lines():
    text = write_csv(random_table(1, seed=3))
    data_lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    assert len(data_lines) == 2


def test_serialization_is_byte_stable():
    table = random_table(214, seed=5)
    once = write_csv(table)
    twice = write_csv(parse_csv(once))
    assert once == twice


def test_column_map_adapts_foreign_headers():
    table = random_table(2, seed=6)
    text = write_csv(table)
    foreign = text.replace("straight_length", "LengthStraight", 1)
    with pytest.raises(HeaderMismatchError):
        parse_csv(foreign)
    parsed = parse_csv(foreign, column_map={"LengthStraight": "straight_length"})
    assert parsed == table


@given(n=st.integers(0, 40), seed=st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_parse_write_identity(n, seed):
    table = random_table(n, seed=seed)
    assert parse_csv(write_csv(table)) == table
