import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iot_extratrees.data_ingest import (
    CATEGORICAL,
    NUMERIC,
    ColumnSchema,
    DataError,
    RawTable,
    infer_schema,
    is_number,
    load_csv,
    table_from_rows,
    write_csv,
)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_well_formed_csv(tmp_path):
    p = _write(tmp_path / "a.csv", "x,y,label\n1,2,Benign\n3,4,Attack\n")
    t = load_csv(p, "label")
    assert t.row_count == 2
    assert len(t.schema) == 3
    assert [c.index for c in t.schema] == [0, 1, 2]
    assert t.label_column == "label"
    assert t.kind("x") == NUMERIC and t.kind("label") == CATEGORICAL
    np.testing.assert_array_equal(t.column("y"), [2.0, 4.0])


def test_ragged_row_names_row(tmp_path):
    rows = "".join(f"{i},{i},a\n" for i in range(1, 5)) + "5,a\n"
    p = _write(tmp_path / "r.csv", "x,y,label\n" + rows)
    with pytest.raises(DataError, match="row 5"):
        load_csv(p, "label")


def test_header_only(tmp_path):
    p = _write(tmp_path / "h.csv", "x,y,label\n")
    t = load_csv(p, "label")
    assert t.row_count == 0
    assert t.names == ["x", "y", "label"]


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError, match="nope.csv"):
        load_csv(tmp_path / "nope.csv")


def test_empty_file(tmp_path):
    p = _write(tmp_path / "e.csv", "")
    with pytest.raises(DataError, match="empty"):
        load_csv(p)


def test_label_absent(tmp_path):
    p = _write(tmp_path / "a.csv", "x,y\n1,2\n")
    with pytest.raises(DataError, match="label"):
        load_csv(p, "label")


def test_quoted_fields_and_delimiter(tmp_path):
    p = _write(tmp_path / "q.csv", 'a;b\n"x;y";1\n"he said ""hi""\nthere";2\n')
    t = load_csv(p, delimiter=";")
    assert t.column("a").tolist() == ["x;y", 'he said "hi"\nthere']
    assert t.kind("b") == NUMERIC


def test_max_rows_include_exclude(tmp_path):
    body = "".join(f"{i},{i * 2},{i * 3},c\n" for i in range(10))
    p = _write(tmp_path / "m.csv", "id,a,b,label\n" + body)
    t = load_csv(p, "label", max_rows=4, exclude=["id"])
    assert t.row_count == 4 and t.names == ["a", "b", "label"]
    t = load_csv(p, "label", include=["b"])
    assert t.names == ["b", "label"]


@pytest.mark.parametrize(
    "cells, kind",
    [
        (["1.5", "2e3", "inf"], NUMERIC),
        (["DDoS-UDP_Flood", "Benign"], CATEGORICAL),
        (["1", "x", "3"], CATEGORICAL),
        (["-inf", "NaN", "", "+.5", "1E-3"], NUMERIC),
        (["1_000"], CATEGORICAL),
    ],
)
def test_infer_schema(cells, kind):
    t = table_from_rows(["c"], [[c] for c in cells], kinds={"c": CATEGORICAL})
    assert infer_schema(t)[0].kind == kind


def test_label_always_categorical():
    t = table_from_rows(["x", "label"], [["1", "0"], ["2", "1"]], "label")
    assert [c.kind for c in infer_schema(t)] == [NUMERIC, CATEGORICAL]


def test_missing_numeric_cell_is_marked(tmp_path):
    p = _write(tmp_path / "n.csv", "x,label\n1,a\n,b\nnan,c\n")
    t = load_csv(p, "label")
    assert t.kind("x") == NUMERIC
    assert t.missing_mask("x").tolist() == [False, True, False]


def test_duplicate_column_names_rejected(tmp_path):
    p = _write(tmp_path / "d.csv", "x,x\n1,2\n")
    with pytest.raises(DataError, match="duplicate"):
        load_csv(p)


def test_table_is_read_only(blob_csv):
    t = load_csv(blob_csv, "label")
    with pytest.raises(ValueError):
        t.column("feat_0")[0] = 1.0


cell = st.one_of(
    st.floats(allow_nan=True, allow_infinity=True).map(repr),
    st.integers(-10**6, 10**6).map(str),
    st.sampled_from(["", "Benign", "DDoS-ACK_Fragmentation", "a,b", 'q"uote', "inf", "-inf"]),
)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(
    lambda w: st.lists(st.lists(cell, min_size=w, max_size=w), min_size=0, max_size=12)
))
def test_csv_round_trip(tmp_path_factory, rows):
    width = len(rows[0]) if rows else 2
    header = [f"c{j}" for j in range(width)]
    src = table_from_rows(header, rows)
    path = tmp_path_factory.mktemp("rt") / "t.csv"
    write_csv(src, path)
    back = load_csv(path)
    assert back.equals(src)
    write_csv(back, path)
    assert load_csv(path).equals(src)


@settings(max_examples=40, deadline=None)
@given(st.lists(cell, min_size=1, max_size=20), st.randoms())
def test_infer_schema_ignores_row_order(cells, rnd):
    t = table_from_rows(["c"], [[c] for c in cells], kinds={"c": CATEGORICAL})
    shuffled = list(cells)
    rnd.shuffle(shuffled)
    u = table_from_rows(["c"], [[c] for c in shuffled], kinds={"c": CATEGORICAL})
    assert infer_schema(t) == infer_schema(u) == infer_schema(t)


def test_is_number():
    assert is_number("3") and is_number("-2.5e-7") and is_number("INF") and is_number("nan")
    assert not is_number("") and not is_number(" 1") and not is_number("0x10")
