"""Acceptance criteria, one test each, at their stated tolerances.

Every test records a PASS/FAIL line that is printed in the terminal
summary. The two reproduction criteria share one run of the full
experiment matrix (T = 8000, n = 10, 20 seeds, d in {10, 20, 500}).
"""

import logging
import math
import os
import time

import numpy as np
import pytest

from conftest import record_criterion
from nonsubdelay.algorithms import LearnerConfig, default_params, make_learner
from nonsubdelay.estimator import build_mixture, estimate_for_outcome, exact_expectation
from nonsubdelay.feedback import DelaySchedule, FeedbackRouter, generate_delays
from nonsubdelay.harness.config import ExperimentConfig
from nonsubdelay.harness.outputs import read_csv
from nonsubdelay.harness.runner import run_experiment
from nonsubdelay.lovasz import check_subgradient_bounds, decompose, lovasz_subgradient
from nonsubdelay.setfn import ModularFunction, RangeCost, TableFunction, analyze_dr_ratios
from nonsubdelay.sparsebench import BenchConfig, SparseBench, generate_round, round_objective

DELAYS = (10, 20, 500)
SEEDS = tuple(range(20))


def paired_gap(result, better, worse, d):
    """Seed-paired mean of worse - better and its standard error."""
    diff = result.final_regrets(worse, d) - result.final_regrets(better, d)
    return float(diff.mean()), float(diff.std(ddof=1) / math.sqrt(diff.size))


@pytest.fixture(scope="module")
def full_matrix():
    config = ExperimentConfig(
        bench=BenchConfig(n=10, s=128, k=2, gamma=0.1, noise_std=0.1, T=8000),
        delay_kind="uniform",
        delay_ds=DELAYS,
        seeds=SEEDS,
        parallel=os.cpu_count() or 1,
        records=False,
    )
    logging.disable(logging.WARNING)
    try:
        return run_experiment(config, write=False)
    finally:
        logging.disable(logging.NOTSET)


def test_c01_exact_unbiasedness():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 9))
        f = TableFunction(np.concatenate([[0.0], rng.normal(size=(1 << n) - 1)]))
        x = rng.random(n)
        chain = decompose(x)
        mu = float(rng.choice([0.05, 0.2, 0.5]))
        err = exact_expectation(f, chain, build_mixture(chain, mu)) - lovasz_subgradient(f, x)
        worst = max(worst, float(np.abs(err).max()))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 1.0
    assert record_criterion(1, "exact unbiasedness", ok, f"max |E[ghat] - g| = {worst:.2e}, {elapsed:.2f}s")


def test_c02_monte_carlo_unbiasedness():
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    n, N = 5, 10**6
    f = round_objective(generate_round(BenchConfig(n=n, seed=2), 1), 0.1)
    x = rng.random(n)
    chain = decompose(x)
    dist = build_mixture(chain, 0.2)
    # every draw yields one of n + 1 estimates, so per-sample moments follow from the counts
    draws = rng.choice(n + 1, size=N, p=dist.probs)
    counts = np.bincount(draws, minlength=n + 1).astype(np.float64)
    values = f.values(chain.masks)
    est = np.array([estimate_for_outcome(chain, dist, i, float(values[i])) for i in range(n + 1)])
    mean = counts @ est / N
    var = (counts @ est**2 / N - mean**2) * N / (N - 1)
    se = np.sqrt(var / N)
    z = np.abs(mean - lovasz_subgradient(f, x)) / se
    elapsed = time.perf_counter() - start
    ok = bool(np.all(z < 5)) and elapsed < 30
    assert record_criterion(2, "Monte Carlo unbiasedness", ok, f"max z = {z.max():.2f} over {N} draws, {elapsed:.1f}s")


def test_c03_subgradient_bound_enumeration():
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    failures = 0
    for i in range(20):
        f = round_objective(generate_round(BenchConfig(n=6, seed=300 + i), 1), 0.1)
        alpha, _ = analyze_dr_ratios(f.upper)
        _, beta = analyze_dr_ratios(f.lower)
        report = check_subgradient_bounds(f, alpha, beta, rng.random(6), tol=1e-9)
        failures += bool(report.subset_violations)
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 10
    assert record_criterion(3, "subset bound by enumeration", ok, f"{failures}/20 instances violated, {elapsed:.1f}s")


def test_c04_analyzer():
    worst = max(abs(analyze_dr_ratios(RangeCost(n))[0] - 1.0 / (n - 1)) for n in range(3, 11))
    rng = np.random.default_rng(4)
    modular = [analyze_dr_ratios(ModularFunction(rng.random(int(rng.integers(1, 8))) + 0.1)) for _ in range(20)]
    mod_err = max(max(abs(a - 1), abs(b - 1)) for a, b in modular)
    ok = worst <= 1e-12 and mod_err <= 1e-12
    assert record_criterion(4, "DR-ratio analyzer", ok, f"range-cost err {worst:.1e}, modular err {mod_err:.1e}")


def test_c05_routing():
    rng = np.random.default_rng(5)
    bad = 0
    for _ in range(1000):
        T = int(rng.integers(1, 201))
        delays = rng.integers(1, int(rng.integers(1, 51)) + 1, size=T)
        router = FeedbackRouter(T)
        for k, d in enumerate(delays, start=1):
            router.route(k, int(d))
        seen = [k for t in range(1, T + 1) for k in router.arrivals(t)]
        once = len(seen) == len(set(seen)) and set(seen).isdisjoint(router.overdue)
        bad += not (once and len(seen) + len(router.overdue) == T)
    assert record_criterion(5, "exactly-once routing", bad == 0, f"{bad}/1000 schedules inconsistent")


def test_c06_blocking_equivalence():
    T, n = 500, 6
    bench = SparseBench(BenchConfig(n=n, s=32, T=T, seed=6))
    objs = bench.objectives()
    base = default_params("DBGD-NF", T, n, bench.loss_bound(), 1, 1.0, q=0.1)
    block = LearnerConfig("BDBGD-NF", T, n, base.eta, mu=base.mu, K=1)
    x0 = np.full(n, 0.5)
    a = make_learner(base, np.ones(T), np.random.default_rng(6), x0=x0).run(objs)
    b = make_learner(block, np.ones(T), np.random.default_rng(6), x0=x0).run(objs)
    same_sets = [r.mask for r in a] == [r.mask for r in b]
    same_loss = [r.loss for r in a] == [r.loss for r in b]
    same_x = all(np.array_equal(r.x, s.x) for r, s in zip(a, b))
    ok = same_sets and same_loss and same_x
    assert record_criterion(6, "blocking with K=1 reduces to DBGD-NF", ok,
                            f"sets {same_sets}, losses {same_loss}, iterates {same_x}")


@pytest.mark.slow
def test_c07_full_information_reproduction(full_matrix):
    res = full_matrix
    parts, ok = [], True
    gaps = {}
    for d in DELAYS:
        dogd = res.final_regrets("DOGD-NF", d).mean()
        doagd = res.final_regrets("DOAGD", d).mean()
        gaps[d] = doagd - dogd
        ok &= dogd <= doagd
        parts.append(f"d={d}: gap {gaps[d]:.0f}")
    ok &= gaps[500] > gaps[10]
    assert record_criterion(7, "full-information ordering", bool(ok), "; ".join(parts) + f"; {len(SEEDS)} seeds")


@pytest.mark.slow
def test_c08_bandit_reproduction(full_matrix):
    res = full_matrix
    parts, ok = [], True
    for better, worse in (("BDBGD-NF", "DBGD-NF"), ("DBGD-NF", "DBAGD")):
        gap, se = paired_gap(res, better, worse, 500)
        ok &= gap >= se
        parts.append(f"d=500 {worse}-{better} = {gap:.0f} (SE {se:.0f})")
    for d in (10, 20):
        gap = float(res.final_regrets("DBAGD", d).mean() - res.final_regrets("DBGD-NF", d).mean())
        ok &= gap >= 0
        parts.append(f"d={d} DBAGD-DBGD-NF = {gap:.0f}")
    assert record_criterion(8, "bandit ordering", bool(ok), "; ".join(parts))


def test_c09_spike_schedule_mean_delay():
    T = 8100
    router = FeedbackRouter(T)
    for k, d in enumerate(generate_delays(DelaySchedule("spike", T)), start=1):
        router.route(k, int(d))
    _, d_bar = router.delay_stats()
    r = math.isqrt(T)
    want = (r * T / 2 + (T - r)) / T
    ok = abs(d_bar - want) <= 1e-9
    assert record_criterion(9, "spike schedule mean delay", ok, f"d_bar = {d_bar!r}, expected {want!r}")


def test_c10_comparator_and_ledger(tmp_path):
    start = time.perf_counter()
    seeds = tuple(range(20))
    config = ExperimentConfig(
        bench=BenchConfig(n=8, T=50),
        algorithms=("DOGD-NF", "DBGD-NF"),
        q_grid=(0.1,),
        delay_ds=(5,),
        seeds=seeds,
        out_dir=str(tmp_path),
        plots=False,
    )
    logging.disable(logging.WARNING)
    try:
        result = run_experiment(config)
    finally:
        logging.disable(logging.NOTSET)
    worst_gap = worst_ledger = 0.0
    suboptimal = 0
    for seed in seeds:
        bench = SparseBench(BenchConfig(n=8, T=50, seed=seed))
        exact = [bench.exact_objective(t) for t in range(1, 51)]
        totals = sum(np.asarray(f.table()) for f in exact)  # second enumeration, by lstsq
        for run in (r for r in result.runs if r.seed == seed):
            S = run.ledger.best_mask
            gap = totals[S] - totals.min()
            suboptimal += gap > 1e-9
            worst_gap = max(worst_gap, gap)
            stem = f"{run.algorithm}_d5_q{'none' if run.q is None else repr(run.q)}_s{seed}.csv"
            losses = [float(row["loss"]) for row in read_csv(tmp_path / "records" / stem)]
            alpha, beta = run.summary["alpha"], run.summary["beta"]
            comp = sum(f.upper.value(S) / alpha - beta * f.lower.value(S) for f in exact)
            final_csv = float(read_csv(tmp_path / "runs" / stem)[-1]["regret_ab"])
            worst_ledger = max(worst_ledger, abs(sum(losses) - comp - final_csv))
    elapsed = time.perf_counter() - start
    ok = suboptimal == 0 and worst_ledger <= 1e-9 and elapsed < 30
    assert record_criterion(10, "comparator optimality and ledger", ok,
                            f"{suboptimal} suboptimal, worst ledger diff {worst_ledger:.1e}, {elapsed:.1f}s")
