import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonsubdelay.errors import ParameterError
from nonsubdelay.estimator import (
    build_mixture,
    estimate_for_outcome,
    exact_expectation,
    sample_and_estimate,
)
from nonsubdelay.lovasz import decompose, lovasz_subgradient
from nonsubdelay.setfn import CountingOracle, ModularFunction, RangeCost, TableFunction, ZeroFunction


def random_table(rng, n, scale=1.0):
    return TableFunction(np.concatenate([[0.0], scale * rng.normal(size=(1 << n) - 1)]))


def test_mixture_one_dimension():
    np.testing.assert_allclose(build_mixture(decompose([0.5]), 0.5).probs, [0.5, 0.5])


@pytest.mark.parametrize("mu", [0.01, 0.3, 0.9])
def test_mixture_at_origin(mu):
    n = 4
    p = build_mixture(decompose(np.zeros(n)), mu).probs
    assert p[0] == pytest.approx((1 - mu) + mu / (n + 1))
    np.testing.assert_allclose(p[1:], mu / (n + 1))


@pytest.mark.parametrize("mu", [0.0, 1.0, -0.2, 1.5])
def test_mixture_rejects_mu(mu):
    with pytest.raises(ParameterError):
        build_mixture(decompose([0.2, 0.4]), mu)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 8), mu=st.floats(1e-4, 0.999), seed=st.integers(0, 2**31))
def test_mixture_invariants(n, mu, seed):
    dist = build_mixture(decompose(np.random.default_rng(seed).random(n)), mu)
    assert np.all(dist.probs >= mu / (n + 1) - 1e-15)
    assert dist.floor == pytest.approx(mu / (n + 1))
    assert dist.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_one_dimension_outcomes():
    c = 1.7
    f = TableFunction(np.array([0.0, c]))
    chain = decompose([0.5])
    dist = build_mixture(chain, 0.5)
    np.testing.assert_allclose(estimate_for_outcome(chain, dist, 1, c), [2 * c])
    np.testing.assert_allclose(estimate_for_outcome(chain, dist, 0, 0.0), [0.0])
    np.testing.assert_allclose(exact_expectation(f, chain, dist), [c])


def test_zero_function_and_empty_outcome(rng):
    chain = decompose(rng.random(4))
    dist = build_mixture(chain, 0.3)
    obs, est = sample_and_estimate(ZeroFunction(4), chain, dist, rng)
    np.testing.assert_array_equal(est.g_hat, 0.0)
    np.testing.assert_array_equal(estimate_for_outcome(chain, dist, 0, 0.0), 0.0)


@pytest.mark.parametrize("mu", [0.05, 0.2, 0.5, 0.9])
def test_range_cost_expectation(mu):
    chain = decompose([0.9, 0.2, 0.5])
    got = exact_expectation(RangeCost(3), chain, build_mixture(chain, mu))
    np.testing.assert_allclose(got, [1.0, 0.0, 2.0], atol=1e-12)


def test_modular_expectation(rng):
    w = [1.0, -2.0, 3.5]
    chain = decompose(rng.random(3))
    got = exact_expectation(ModularFunction(w), chain, build_mixture(chain, 0.37))
    np.testing.assert_allclose(got, w, atol=1e-12)


def test_exact_unbiasedness_random_instances(rng):
    for _ in range(100):
        n = int(rng.integers(1, 9))
        f = random_table(rng, n)
        x = rng.random(n)
        chain = decompose(x)
        mu = float(rng.choice([0.05, 0.2, 0.5]))
        got = exact_expectation(f, chain, build_mixture(chain, mu))
        np.testing.assert_allclose(got, lovasz_subgradient(f, x), atol=1e-10)


def test_single_oracle_call(rng):
    f = CountingOracle(random_table(rng, 5))
    chain = decompose(rng.random(5))
    dist = build_mixture(chain, 0.2)
    for k in range(1, 21):
        obs, est = sample_and_estimate(f, chain, dist, rng, round=k)
        assert f.calls == k
        assert obs.mask in set(int(m) for m in chain.masks)
        assert est.round == k


def test_estimate_support_is_adjacent(rng):
    n = 6
    f = random_table(rng, n)
    chain = decompose(rng.random(n))
    dist = build_mixture(chain, 0.2)
    for _ in range(50):
        obs, est = sample_and_estimate(f, chain, dist, rng)
        allowed = {int(chain.perm[j]) for j in (obs.index - 1, obs.index) if 0 <= j < n}
        assert set(np.flatnonzero(est.g_hat)) <= allowed


@settings(max_examples=80, deadline=None)
@given(n=st.integers(1, 7), mu=st.floats(0.01, 0.99), seed=st.integers(0, 2**31))
def test_magnitude_bound(n, mu, seed):
    rng = np.random.default_rng(seed)
    f = random_table(rng, n)
    L = float(np.abs(f.table()).max())
    chain = decompose(rng.random(n))
    dist = build_mixture(chain, mu)
    for i in range(n + 1):
        g = estimate_for_outcome(chain, dist, i, f.value(int(chain.masks[i])))
        assert np.abs(g).max() <= 2 * L * (n + 1) / mu + 1e-9
