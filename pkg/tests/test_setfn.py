import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_dr_ratios, subsets
from nonsubdelay.errors import CapacityError, ContractError, OutOfRangeError
from nonsubdelay.setfn import (
    CountingOracle,
    DecomposedFunction,
    FunctionOracle,
    ModularFunction,
    RangeCost,
    TableFunction,
    ZeroFunction,
    analyze_dr_ratios,
    check_assumptions,
    from_mask,
    marginal_gain,
    to_mask,
)


def test_mask_round_trip():
    assert to_mask([1, 3], 4) == 0b101
    assert from_mask(0b101) == (1, 3)
    assert to_mask([], 3) == 0
    with pytest.raises(OutOfRangeError):
        to_mask([0], 3)
    with pytest.raises(OutOfRangeError):
        to_mask([4], 3)


def test_range_cost_gain_example():
    # F({2,5}) - F({2}) = 4 - 1
    assert marginal_gain(RangeCost(6), 5, {2}) == 3.0


def test_zero_and_modular_gain():
    assert marginal_gain(ZeroFunction(4), 2, {1, 3}) == 0.0
    assert marginal_gain(ModularFunction([1, 2, 3]), 3, {1}) == 3.0


def test_marginal_gain_errors():
    f = RangeCost(4)
    with pytest.raises(ContractError):
        marginal_gain(f, 2, {2})
    with pytest.raises(OutOfRangeError):
        marginal_gain(f, 5, {1})
    # out-of-range errors are also IndexError for callers that catch that
    with pytest.raises(IndexError):
        marginal_gain(f, 0)


def test_range_cost_table_matches_scalar():
    f = RangeCost(7, scale=0.5)
    tab = f.table()
    assert all(tab[m] == f.value(m) for m in range(1 << 7))


def test_modular_ratios_are_one():
    a, b = analyze_dr_ratios(ModularFunction([1.0, 2.0, 3.0]))
    assert a == pytest.approx(1.0, abs=1e-12)
    assert b == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", range(3, 11))
def test_range_cost_alpha(n):
    alpha, _ = analyze_dr_ratios(RangeCost(n))
    assert abs(alpha - 1.0 / (n - 1)) <= 1e-12


def test_square_cardinality_matches_enumeration():
    fn = lambda S: float(len(S) ** 2)  # noqa: E731
    got = analyze_dr_ratios(FunctionOracle(3, fn))
    want = brute_dr_ratios(fn, 3)
    # frozen: gains 2|A|+1, worst alpha at A = {}, |B| = 2
    assert want == (pytest.approx(1 / 5), pytest.approx(1.0))
    assert got == pytest.approx(want, abs=1e-12)


def test_no_constraining_pair_gives_inf():
    assert analyze_dr_ratios(ZeroFunction(3)) == (np.inf, np.inf)


def test_capacity_guard():
    with pytest.raises(CapacityError):
        analyze_dr_ratios(ZeroFunction(21))
    with pytest.raises(CapacityError):
        analyze_dr_ratios(RangeCost(5), guard=4)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 4), data=st.data())
def test_analyzer_matches_pair_enumeration(n, data):
    vals = data.draw(st.lists(st.integers(-300, 300).map(lambda v: v / 100), min_size=(1 << n) - 1, max_size=(1 << n) - 1))
    tab = np.array([0.0] + vals)
    f = TableFunction(tab)
    want = brute_dr_ratios(lambda S: tab[to_mask(S, n)], n)
    got = analyze_dr_ratios(f)
    for g, w in zip(got, want):
        if np.isinf(w):
            assert g == w
        else:
            assert g == pytest.approx(w, rel=1e-9, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 4), seed=st.integers(0, 2**31))
def test_submodular_alpha_at_least_one(n, seed):
    # concave of modular weights is submodular and nondecreasing
    w = np.random.default_rng(seed).random(n) + 0.1
    fn = lambda S: float(np.sqrt(sum(w[i - 1] for i in S)))  # noqa: E731
    alpha, _ = analyze_dr_ratios(FunctionOracle(n, fn))
    assert alpha >= 1.0 - 1e-12


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**31))
def test_gains_telescope_along_a_chain(n, seed):
    rng = np.random.default_rng(seed)
    tab = np.concatenate([[0.0], rng.normal(size=(1 << n) - 1)])
    f = TableFunction(tab)
    perm = rng.permutation(n) + 1
    total, S = 0.0, set()
    for i in perm:
        total += marginal_gain(f, int(i), S)
        S.add(int(i))
    assert total == pytest.approx(tab[-1], abs=1e-12)


def test_assumptions_clean_for_range_cost_pair():
    n = 6
    report = check_assumptions(DecomposedFunction(RangeCost(n), ZeroFunction(n)), L=n)
    assert report.ok


def test_assumptions_report_normalization():
    upper = TableFunction(np.array([1.0, 1.0, 1.0, 1.0]))
    report = check_assumptions(DecomposedFunction(upper, ZeroFunction(2)), L=10)
    assert report.normalization == ["upper"]


def test_assumptions_report_monotonicity():
    # f({1}) = 1, f({1,2}) = 0
    upper = TableFunction(np.array([0.0, 1.0, 1.0, 0.0]))
    report = check_assumptions(DecomposedFunction(upper, ZeroFunction(2)), L=10)
    assert ("upper", (1,), (1, 2)) in report.monotonicity


def test_assumptions_report_bound():
    report = check_assumptions(DecomposedFunction(RangeCost(3), RangeCost(3)), L=5)
    assert report.bound == [((1, 3), 6.0), ((1, 2, 3), 6.0)]


def test_counting_oracle_and_memo():
    calls = []

    def fn(S):
        calls.append(S)
        return float(len(S))

    f = CountingOracle(FunctionOracle(3, fn, memoize=True))
    f({1, 2})
    f({2, 1})
    f.values([0, 3])
    assert f.calls == 4
    assert len(calls) == 2  # {1,2} once, {} once


def test_table_function_validation():
    with pytest.raises(ContractError):
        TableFunction(np.zeros(3))


def test_subsets_helper_counts():
    assert sum(1 for _ in subsets(4)) == 16
