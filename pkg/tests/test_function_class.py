import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from tlcbounds.errors import InputError, InvalidArgumentError, NotRepresentableError
from tlcbounds.function_class import (
    ROOT8,
    FunctionTable,
    LossTable,
    average_loss,
    difference_class,
    estimate_B,
    fourth_moment_proxy,
    h0_floor,
    load_function_table,
    load_loss_table,
    squared_class,
    star_class,
    surrogate_variance,
    variance_operator,
)


@pytest.mark.parametrize("row,expected", [((0, 1, 0, 1), 0.5), ((2.5,) * 7, 2.5), ((1, 2, 3, 4), 2.5)])
def test_average_loss(row, expected):
    assert average_loss(row) == expected


@pytest.mark.parametrize("row,expected", [((0, 1, 0, 1), 0.5), ((0, 0, 0), 0.0), ((1, -1, 2, 0), 1.5)])
def test_variance_operator(row, expected):
    assert variance_operator(row) == expected


def test_empty_rows_rejected():
    with pytest.raises(InvalidArgumentError):
        average_loss([])
    with pytest.raises(InvalidArgumentError):
        variance_operator([])


def test_fourth_moment_proxy():
    assert fourth_moment_proxy(FunctionTable.from_rows([[1, 1, 1, 1]])) == 1
    assert fourth_moment_proxy(FunctionTable.from_rows([[0, 1, 0, 1]])) == 0.5
    assert fourth_moment_proxy(FunctionTable.from_rows([[2, 0, 0, 0], [1, 1, 1, 1]])) == 4


def test_squared_class():
    sq = squared_class(FunctionTable.from_rows([[0, 1, 0, 1]]))
    assert sq.values.tolist() == [[0, 1, 0, 1]]
    assert squared_class(FunctionTable.from_rows([[-2, 2]])).values.tolist() == [[4, 4]]
    assert squared_class(FunctionTable.from_rows([[1, 0]], range_bound=3)).range_bound == 9
    assert squared_class(FunctionTable.from_rows([[1, 0]])).range_bound == pytest.approx(8.0)


def test_h0_floor():
    assert h0_floor(0) == pytest.approx(2.828427, abs=1e-6)
    assert h0_floor(5) == 5
    assert h0_floor(ROOT8) == ROOT8
    with pytest.raises(InvalidArgumentError):
        h0_floor(-1)


def test_table_invariants():
    with pytest.raises(InvalidArgumentError):
        FunctionTable(np.array([[4.0]]), ROOT8)
    with pytest.raises(InvalidArgumentError):
        FunctionTable(np.array([[1.0]]), 1.0)
    with pytest.raises(InvalidArgumentError):
        LossTable.from_rows([[-1, 0]])
    t = FunctionTable.from_rows([[1, 2]])
    with pytest.raises(ValueError):
        t.values[0, 0] = 3


def test_surrogate_variance_examples():
    losses = LossTable.from_rows([[0, 0], [1, 1]])
    assert surrogate_variance([0, 0], losses, 1.0) == 0.0
    assert surrogate_variance([1, 1], losses, 1.0) == 2.0
    with pytest.raises(NotRepresentableError):
        surrogate_variance([0.5, 0], losses, 1.0)


def test_estimate_B_examples():
    assert estimate_B(LossTable.from_rows([[1, 2, 3]])) == 0
    assert estimate_B(LossTable.from_rows([[0, 0], [2, 0]])) == 2
    assert estimate_B(LossTable.from_rows([[0, 0], [1, 0]])) == 1
    # tied minimisers with different losses: T_n > 0 while L_n = 0
    assert math.isinf(estimate_B(LossTable.from_rows([[0, 1], [1, 0]])))


def test_star_index_ties_to_lowest():
    assert LossTable.from_rows([[1, 0], [0, 1], [0, 0]]).star_index == 2
    assert LossTable.from_rows([[0, 1], [1, 0]]).star_index == 0


loss_tables = arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 6)), elements=st.integers(0, 6).map(lambda v: v / 2))


@given(loss_tables)
def test_loss_table_properties(grid):
    losses = LossTable.from_rows(grid)
    B = estimate_B(losses)
    excess = losses.excess_rows()
    for row in excess:
        assert average_loss(row) >= -1e-12
        if math.isfinite(B):
            assert variance_operator(row) <= B * average_loss(row) + 1e-9
    for row in losses.loss:
        assert variance_operator(row) <= losses.range_bound * np.max(np.abs(row)) + 1e-12
    if math.isfinite(B):
        table, costs, pairs = difference_class(losses, B)
        for row, cost, (f1, f2) in zip(table.values, costs, pairs):
            assert np.allclose(row, losses.loss[f1] - losses.loss[f2])
            assert surrogate_variance(row, losses, B) == pytest.approx(cost, abs=1e-12)
            assert cost >= variance_operator(row) - 1e-9


def test_difference_class_dedupes_and_star_class():
    losses = LossTable.from_rows([[0, 0], [1, 1], [1, 1]])
    table, costs, _ = difference_class(losses, 1.0)
    assert table.M == 3  # 0, +1, -1
    assert sorted(costs.tolist()) == [0.0, 2.0, 2.0]
    star, loc = star_class(losses, 2.0)
    assert star.values.tolist() == [[0, 0], [1, 1], [1, 1]]
    assert loc.tolist() == [0, 2, 2]


def test_csv_loading(tmp_path):
    p = tmp_path / "cls.csv"
    p.write_text("# H0=10\na,1,2,3\nb,0,0,-1\n")
    t = load_function_table(p)
    assert t.range_bound == 10 and t.names == ("a", "b") and t.n == 3
    p.write_text("# H0=1\n1,2,3\n")
    assert load_function_table(p).range_bound == 3  # only raises
    p.write_text("1,2\n1,x\n")
    with pytest.raises(InputError, match=":2:"):
        load_function_table(p)
    p.write_text("1,2\n1,2,3\n")
    with pytest.raises(InputError, match=":2:"):
        load_function_table(p)
    p.write_text("# L0=4\n1,2\n0,0\n")
    losses = load_loss_table(p)
    assert losses.range_bound == 4 and losses.star_index == 1
    p.write_text("1,-2\n")
    with pytest.raises(InputError):
        load_loss_table(p)
    with pytest.raises(InputError):
        load_function_table(tmp_path / "missing.csv")
