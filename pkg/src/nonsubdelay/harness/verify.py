"""Fast self-checks behind ``nonsubdelay verify``.

Each check returns ``(name, passed, detail)``. They use small random
instances so the whole suite finishes in a few seconds.
"""

from typing import Callable, List, Tuple

import numpy as np

from ..algorithms import default_params, make_learner
from ..estimator import build_mixture, exact_expectation
from ..feedback import BlockPools, FeedbackRouter
from ..lovasz import check_subgradient_bounds, decompose, lovasz_subgradient
from ..setfn import RangeCost, TableFunction, analyze_dr_ratios
from ..sparsebench import BenchConfig, SparseBench, generate_round, round_objective

Check = Tuple[str, bool, str]


def check_reconstruction(rng, trials: int = 200) -> Check:
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 9))
        x = rng.random(n)
        if rng.random() < 0.3:
            x = np.round(x * 4) / 4  # exercise ties
        chain = decompose(x)
        worst = max(worst, float(np.abs(chain.reconstruct() - x).max()), abs(chain.lambdas.sum() - 1.0))
    return "chain reconstruction", worst <= 1e-12, f"max error {worst:.3g}"


def check_unbiasedness(rng, trials: int = 100) -> Check:
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 9))
        f = TableFunction(np.concatenate([[0.0], rng.normal(size=(1 << n) - 1)]))
        x = rng.random(n)
        mu = float(rng.choice([0.05, 0.2, 0.5]))
        chain = decompose(x)
        err = exact_expectation(f, chain, build_mixture(chain, mu)) - lovasz_subgradient(f, x)
        worst = max(worst, float(np.abs(err).max()))
    return "estimator unbiasedness", worst <= 1e-10, f"max deviation {worst:.3g}"


def check_bounds(rng, trials: int = 5) -> Check:
    bad = 0
    for i in range(trials):
        data = generate_round(BenchConfig(n=6, T=1, seed=int(rng.integers(1 << 31))), 1)
        f = round_objective(data, 0.1)
        alpha, _ = analyze_dr_ratios(f.upper)
        _, beta = analyze_dr_ratios(f.lower)
        if not check_subgradient_bounds(f, alpha, beta, rng.random(6)).ok:
            bad += 1
    return "approximate subgradient bound", bad == 0, f"{bad}/{trials} instances violated"


def check_range_ratio() -> Check:
    worst = 0.0
    for n in range(3, 11):
        alpha, _ = analyze_dr_ratios(RangeCost(n))
        worst = max(worst, abs(alpha - 1.0 / (n - 1)))
    return "range-cost ratio", worst <= 1e-12, f"max deviation {worst:.3g}"


def check_routing(rng, trials: int = 300) -> Check:
    for _ in range(trials):
        T = int(rng.integers(1, 201))
        delays = rng.integers(1, 51, size=T)
        router = FeedbackRouter(T)
        for k, d in enumerate(delays, start=1):
            router.route(k, int(d), k)
        seen = [k for t in range(1, T + 1) for k, _ in router.receive(t)]
        if sorted(seen + router.overdue) != list(range(1, T + 1)):
            return "feedback routing", False, f"lost or duplicated feedback for T={T}"
        K = int(rng.integers(1, T + 1))
        pools = BlockPools(T, K)
        done = sum(len(g) for g in pools.deposit_and_collect((k, k) for k in range(1, T + 1)).values())
        if done != T:
            return "feedback routing", False, f"block pools released {done} of {T}"
    return "feedback routing", True, f"{trials} schedules"


def check_learner_smoke() -> Check:
    bench = SparseBench(BenchConfig(n=4, s=16, T=30, seed=3))
    L = bench.loss_bound()
    delays = np.full(30, 3)
    spent = 0
    for name in ("DOGD-NF", "DOAGD", "DBGD-NF", "BDBGD-NF", "DBAGD"):
        params = default_params(name, 30, 4, L, 3, 3.0)
        records = make_learner(params, delays, np.random.default_rng(0), x0=np.full(4, 0.5)).run(bench.objectives())
        spent += sum(r.oracle_calls for r in records)
    expected = 2 * 30 * 5 + 3 * 30
    return "learner oracle budget", spent == expected, f"{spent} calls, expected {expected}"


CHECKS: List[Callable] = [
    check_reconstruction,
    check_unbiasedness,
    check_bounds,
    check_range_ratio,
    check_routing,
]


def run_checks(seed: int = 0) -> List[Check]:
    rng = np.random.default_rng(seed)
    out = []
    for check in CHECKS:
        out.append(check(rng) if check.__code__.co_argcount else check())
    out.append(check_learner_smoke())
    return out
