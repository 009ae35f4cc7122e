import pytest

from reference_tables import TABLE1, TABLE1_LABELS, TABLE2, TABLE2_LABELS
from scfp.problems import table1_columns, table2_columns
from scfp.solvers import run
from scfp.tables import (combined_table, compare_traces, fmt_float, fmt_x,
                         iterations_to_threshold, result_table)


@pytest.fixture(scope="module")
def table1():
    return {label: run(pb) for label, pb in table1_columns()}


@pytest.fixture(scope="module")
def table2():
    return {label: run(pb) for label, pb in table2_columns()}


def test_formats():
    assert fmt_x(76 / 21) == "3.619047619047619"
    assert fmt_x(6) == "6.000000000000000"
    assert fmt_float(1 / 3) == "3.33333333333333e-01"


def test_labels_match(table1, table2):
    assert tuple(table1) == TABLE1_LABELS and tuple(table2) == TABLE2_LABELS


def test_table1_strings(table1):
    for n, printed in TABLE1.items():
        for label, text in zip(TABLE1_LABELS, printed):
            if text is None:
                assert n not in table1[label].iterates()
                continue
            got = table1[label].iterates()[n].coords[0]
            assert fmt_x(got) == fmt_x(float(text))


def test_table2_strings(table2):
    for n, printed in TABLE2.items():
        for label, text in zip(TABLE2_LABELS, printed):
            got = table2[label].iterates()[n].coords[0]
            assert fmt_x(got) == fmt_x(float(text))


def test_result_table_rows(table1):
    header, rows = result_table(table1["alg_x0=x1=6"])
    assert header[:2] == ["n", "x[0]"] and len(rows) == 26
    assert rows[0][2:] == ["", "", ""] and rows[2][1] == TABLE1[2][2]


def test_combined_table_blank_for_missing(table1):
    _, rows = combined_table(list(table1.items()))
    assert rows[0][1] == "" and rows[0][3] == "6.000000000000000"


def test_threshold_and_compare(table1):
    assert iterations_to_threshold(table1["alg_x0=x1=6"]) == 22
    assert iterations_to_threshold(table1["ma_x1=6"]) is None
    _, _, summary, counts = compare_traces(table1["alg_x0=x1=6"], table1["ma_x1=6"],
                                           labels=("alg", "ma"))
    assert counts == (22, None) and "not reached" in summary
