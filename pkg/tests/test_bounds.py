import math

import pytest
from hypothesis import given, strategies as st

from tlcbounds.bounds import (
    BoundInputs,
    ConstantSet,
    concentration_deviation,
    constant_set,
    excess_risk_bound,
    general_sup_bound,
    generic_prior_excess,
    optimal_alpha_term,
    prior_sup_bounds,
    tlc_constants,
    tlc_uniform_bound,
)
from tlcbounds.errors import InvalidArgumentError, InvalidClassError
from tlcbounds.function_class import ROOT8, FunctionTable

TINY = 1e-300


def test_optimal_alpha_term():
    assert optimal_alpha_term(4, 1) == 4
    assert optimal_alpha_term(0, 7) == 0
    assert optimal_alpha_term(0.2, 0.04) == pytest.approx(0.178885, abs=1e-6)
    grid = min(0.2 / a + 0.04 * a for a in [k / 1000 for k in range(1, 10000)])
    assert grid == pytest.approx(optimal_alpha_term(0.2, 0.04), rel=1e-5)
    with pytest.raises(InvalidArgumentError):
        optimal_alpha_term(-1, 1)


def test_concentration_examples():
    inp = BoundInputs(u=100, m=100, x=1, r=1, expected_gap=0.3, square_complexity=0.05)
    assert concentration_deviation(inp) == pytest.approx(2.504525, abs=2e-6)
    assert concentration_deviation(BoundInputs(100, 100, TINY, expected_gap=0.3)) == pytest.approx(0.3)
    assert concentration_deviation(BoundInputs(1, 5, 1)) == pytest.approx(64)
    with pytest.raises(InvalidArgumentError):
        BoundInputs(3, 3, 0)


def test_tlc_constants():
    c = tlc_constants(2, ROOT8)
    assert c.c0 == pytest.approx(48 * 16384 / 49) and c.c0 == pytest.approx(16049.63, abs=0.01)
    assert c.c1 == pytest.approx(9352)
    assert tlc_constants(1 + 1e-12, ROOT8).c0 == pytest.approx(8024.8, abs=0.1)
    assert tlc_constants(3, ROOT8).c1 - tlc_constants(3, 0 + ROOT8).c1 == 0
    assert 16 * ROOT8**2 == pytest.approx(128)
    with pytest.raises(InvalidArgumentError):
        tlc_constants(1, ROOT8)


def test_uniform_bound():
    c = tlc_constants(2, ROOT8)
    inp = BoundInputs(100, 100, 1, K_peel=2, r_u=1e-3, r_m=1e-3)
    assert tlc_uniform_bound(0.2, 0.1, inp, c) == pytest.approx(0.2 + 0.05 + c.c0 * 0.002 + c.c1 / 100)
    assert tlc_uniform_bound(0.2, 0.1, BoundInputs(100, 100, TINY, K_peel=2), c) == pytest.approx(0.25)


def test_excess_risk_bound():
    assert excess_risk_bound(BoundInputs(50, 50, TINY, B=1, K_peel=2)) == pytest.approx(0, abs=1e-200)
    inp = BoundInputs(100, 100, 1, B=1, K_peel=2, r_u=1e-3, r_m=1e-3, r_star=1e-3)
    cs = constant_set(2, ROOT8, 1)
    assert cs.hat_c2 == max(cs.c0, cs.c1)
    assert cs.c2 == pytest.approx(cs.hat_c2 * 2)
    assert cs.c3 == pytest.approx(cs.c1 + 4 * cs.c2 / 2)
    expected = cs.c0 * 2e-3 + 4 * cs.c2 * 1e-3 / 2 + cs.c3 / 100
    assert excess_risk_bound(inp) == pytest.approx(expected)
    assert excess_risk_bound(inp, cs) == pytest.approx(expected)
    doubled = excess_risk_bound(inp.with_x(2))
    assert doubled - excess_risk_bound(inp) == pytest.approx(cs.c3 / 100)
    with pytest.raises(InvalidArgumentError):
        excess_risk_bound(BoundInputs(10, 10, 1, B=2, K_peel=2))


def test_constant_overrides():
    cs = constant_set(2, ROOT8, 0.5, {"c0": 1.0, "c5": 3.0, "hat_c2": 10.0})
    assert cs.c0 == 1.0 and cs.c5 == 3.0 and cs.c2 == pytest.approx(10 / 0.75)
    assert cs.provenance["c0"] == "configured" and cs.provenance["c1"] == "formula"
    assert constant_set(2, ROOT8, 5, {"c2": 4.0}).c2 == 4.0
    with pytest.raises(InvalidArgumentError):
        constant_set(2, ROOT8, None, {"c9": 1})
    with pytest.raises(InvalidArgumentError):
        ConstantSet(c0=-1, c1=1)


def test_general_sup_bound():
    inp = BoundInputs(100, 100, 1)
    assert general_sup_bound(inp) == pytest.approx(0.32)
    assert general_sup_bound(BoundInputs(100, 100, TINY)) == pytest.approx(0, abs=1e-200)
    small_m = BoundInputs(300, 100, 1)
    assert general_sup_bound(small_m) == pytest.approx(4 * 100 / 400 * 2 * 8 / 100)
    ok = FunctionTable.from_rows([[1, -1, 0.5, -0.5]])
    general_sup_bound(inp, ok)
    with pytest.raises(InvalidClassError):
        general_sup_bound(inp, FunctionTable.from_rows([[1, 0, 0, 0]]))


def test_prior_sup_bounds():
    v1, _ = prior_sup_bounds(BoundInputs(10, 90, 1, r=1), 0)
    assert v1 == pytest.approx(2 * math.sqrt(2), abs=1e-6)
    _, v2 = prior_sup_bounds(BoundInputs(90, 10, TINY), 0)
    assert v2 == pytest.approx(2)
    # u ~ sqrt(n)/2 keeps n/u^2 near 4, so v1 settles at 4*sqrt(2); slower test growth makes it diverge
    for n in (10**4, 10**5, 10**6):
        u = int(math.isqrt(n) // 2)
        v1, _ = prior_sup_bounds(BoundInputs(u, n - u, 1, r=1), 0)
        assert v1 == pytest.approx(4 * math.sqrt(2), rel=0.01)
    prev = 0.0
    for n in (10**2, 10**3, 10**4, 10**5, 10**6):
        u = int(n**0.3)
        v1, _ = prior_sup_bounds(BoundInputs(u, n - u, 1, r=1), 0)
        assert v1 > prev
        prev = v1

def test_generic_prior_excess():
    assert generic_prior_excess(BoundInputs(50, 50, 1), 0.01, 0.01) == pytest.approx(0.08)
    assert generic_prior_excess(BoundInputs(4, 5, 1), 0, 0, theta=2) == pytest.approx(2 * (1 / 5 + 1 / 4))
    a = generic_prior_excess(BoundInputs(20, 80, 1), 0.01, 0.01)
    b = generic_prior_excess(BoundInputs(10, 90, 1), 0.01, 0.01)
    assert b > a


sizes = st.integers(1, 10_000)
pos = st.floats(1e-6, 10)
nonneg = st.floats(0, 10)


@given(sizes, sizes, pos, pos, nonneg, nonneg, nonneg, nonneg)
def test_bounds_nonnegative_and_monotone_in_x(u, m, x, dx, r, eg, sq, rf):
    lo = BoundInputs(u, m, x, r=r, expected_gap=eg, square_complexity=sq, r_u=rf, r_m=rf, r_star=rf, B=0.5, K_peel=2)
    hi = lo.with_x(x + dx)
    c = tlc_constants(2, ROOT8)
    conc = concentration_deviation(lo)
    assert conc >= eg
    assert concentration_deviation(hi) >= conc
    assert general_sup_bound(hi) >= general_sup_bound(lo) >= 0
    assert excess_risk_bound(hi) >= excess_risk_bound(lo) >= 0
    assert tlc_uniform_bound(0.1, 0.2, hi, c) >= tlc_uniform_bound(0.1, 0.2, lo, c)
    for a, b in zip(prior_sup_bounds(lo, eg), prior_sup_bounds(hi, eg)):
        assert b >= a >= 0
