"""Run matrix: algorithm x exploration factor x delay regime x seed.

A cell is one (seed, delay regime) pair. Inside a cell every learner sees
the same benchmark rounds, the same delay vector and the same uniform
stream, so algorithms are compared on common random numbers.
"""

import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .. import __version__, kernels
from ..algorithms import default_params, is_bandit, make_learner
from ..errors import SolverError
from ..feedback import DelaySchedule, canonical_kind, delay_stats, generate_delays, load_delays
from ..setfn import analyze_dr_ratios
from ..sparsebench import BenchConfig, RestrictedGain, SparseBench, generate_round, select_minimizer
from .config import ExperimentConfig
from .regret import RegretLedger, compute_regret

log = logging.getLogger(__name__)

DELAY_STREAM = 1
LEARNER_STREAM = 2


@dataclass
class RunTrace:
    masks: np.ndarray
    losses: np.ndarray
    delays: np.ndarray
    oracle_calls: np.ndarray

    @classmethod
    def from_records(cls, records):
        return cls(
            masks=np.array([r.mask for r in records], dtype=np.int64),
            losses=np.array([r.loss for r in records], dtype=np.float64),
            delays=np.array([r.delay for r in records], dtype=np.int64),
            oracle_calls=np.array([r.oracle_calls for r in records], dtype=np.int64),
        )


@dataclass
class RunResult:
    algorithm: str
    d: int
    q: Optional[float]
    seed: int
    fingerprint: str
    ledger: RegretLedger
    trace: Optional[RunTrace]
    params: Dict[str, object]
    summary: Dict[str, object]

    @property
    def feedback(self) -> str:
        return "bandit" if is_bandit(self.algorithm) else "full"


@dataclass
class CellFailure:
    seed: int
    d: int
    error: str


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: List[RunResult]
    chosen_q: Dict[Tuple[str, int], Optional[float]]
    failures: List[CellFailure] = field(default_factory=list)
    wall_time: float = 0.0

    def chosen_runs(self, algorithm: str, d: int) -> List[RunResult]:
        q = self.chosen_q[(algorithm, d)]
        return [r for r in self.runs if r.algorithm == algorithm and r.d == d and r.q == q]

    def final_regrets(self, algorithm: str, d: int, vanilla: bool = False) -> np.ndarray:
        runs = sorted(self.chosen_runs(algorithm, d), key=lambda r: r.seed)
        return np.array([r.ledger.final_regret if vanilla else r.ledger.final_regret_ab for r in runs])


def fingerprint(config: ExperimentConfig, algorithm: str, q, d: int, seed: int) -> str:
    payload = {
        "bench": replace(config.bench, seed=seed).__dict__,
        "algorithm": algorithm,
        "q": q,
        "d": d,
        "delay_kind": canonical_kind(config.delay_kind),
        "delay_file": config.delay_file,
        "x0": config.x0,
        "overrides": config.overrides.get(algorithm, {}),
        "alpha": config.alpha,
        "beta": config.beta,
        "L": config.L,
        "L_factor": config.L_factor,
        "beta_n": config.beta_n,
        "version": __version__,
    }
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def delay_labels(config: ExperimentConfig) -> Tuple[int, ...]:
    """Regime labels: the configured max delays, or one regime for fixed schedules."""
    kind = canonical_kind(config.delay_kind)
    if kind in ("constant", "uniform"):
        return tuple(config.delay_ds)
    if kind == "spike":
        return (max(1, config.bench.T // 2),)
    return (int(load_delays(config.delay_file).max()),)


def make_delays(config: ExperimentConfig, seed: int, d: int) -> np.ndarray:
    kind = canonical_kind(config.delay_kind)
    T = config.bench.T
    if kind == "custom":
        delays = load_delays(config.delay_file)
        return generate_delays(DelaySchedule("custom", T, delays=tuple(int(v) for v in delays)))
    rng = np.random.default_rng([seed, DELAY_STREAM, d])
    return generate_delays(DelaySchedule(kind, T, d=d), rng)


def ratio_settings(config: ExperimentConfig, seed: int):
    """(alpha, beta, alpha_source, beta_source) for the ledger."""
    n = config.bench.n
    if config.alpha is not None:
        alpha, alpha_src = config.alpha, "config"
    else:
        alpha, alpha_src = (1.0 / (n - 1) if n > 1 else 1.0), "range-cost"
    if config.beta is not None:
        beta, beta_src = config.beta, "config"
    else:
        n_sub = min(n, config.beta_n)
        sub = replace(config.bench, n=n_sub, k=min(config.bench.k, n_sub), T=1, seed=seed)
        _, beta = analyze_dr_ratios(RestrictedGain(generate_round(sub, 1)))
        if not np.isfinite(beta):
            beta = 1.0
        beta_src = f"analyzer(n={n_sub})"
    return float(alpha), float(beta), alpha_src, beta_src


def _learner_params(config: ExperimentConfig, algorithm: str, q, L: float, d_max: int, d_bar: float):
    params = default_params(algorithm, config.bench.T, config.bench.n, L, d_max, d_bar, q if q is not None else 1.0)
    opts = {k: v for k, v in config.overrides.get(algorithm, {}).items() if k in ("eta", "mu", "K")}
    if opts:
        params = replace(params, **opts)
    return params


def run_cell(config: ExperimentConfig, seed: int, d: int, keep_trace: bool = True) -> List[RunResult]:
    bench = SparseBench(replace(config.bench, seed=seed))
    objectives = bench.objectives()
    best_mask, _ = select_minimizer(bench.cumulative_table())
    L = config.L if config.L is not None else bench.loss_bound(config.L_factor)
    alpha, beta, alpha_src, beta_src = ratio_settings(config, seed)
    delays = make_delays(config, seed, d)
    d_max, d_bar = delay_stats(delays)
    x0 = np.full(bench.n, config.x0)

    out = []
    for algorithm in config.algorithms:
        for q in config.q_values(algorithm):
            params = _learner_params(config, algorithm, q, L, d_max, d_bar)
            rng = np.random.default_rng([seed, LEARNER_STREAM])
            start = time.perf_counter()
            records = make_learner(params, delays, rng, x0=x0).run(objectives)
            elapsed = time.perf_counter() - start
            ledger = compute_regret(records, objectives, alpha, beta, comparator=best_mask)
            trace = RunTrace.from_records(records)
            summary = {
                "final_regret_ab": ledger.final_regret_ab,
                "final_regret": ledger.final_regret,
                "d_max": d_max,
                "d_bar": d_bar,
                "wall_time": elapsed,
                "oracle_calls": int(trace.oracle_calls.sum()),
                "alpha": alpha,
                "beta": beta,
                "alpha_source": alpha_src,
                "beta_source": beta_src,
                "L": L,
                "best_set": list(ledger.best_set),
            }
            out.append(RunResult(
                algorithm=algorithm,
                d=d,
                q=q,
                seed=seed,
                fingerprint=fingerprint(config, algorithm, q, d, seed),
                ledger=ledger,
                trace=trace if keep_trace else None,
                params={"eta": params.eta, "mu": params.mu, "K": params.K},
                summary=summary,
            ))
    return out


def _cell_job(args):
    config, seed, d, keep_trace = args
    try:
        return seed, d, run_cell(config, seed, d, keep_trace), None
    except SolverError as exc:
        return seed, d, [], str(exc)


def choose_q(runs: List[RunResult]) -> Dict[Tuple[str, int], Optional[float]]:
    """Grid search: the q with the lowest seed-mean final (alpha, beta)-regret."""
    groups: Dict[Tuple[str, int, Optional[float]], List[float]] = {}
    for r in runs:
        groups.setdefault((r.algorithm, r.d, r.q), []).append(r.ledger.final_regret_ab)
    best: Dict[Tuple[str, int], Tuple[float, float]] = {}
    chosen = {}
    for (algorithm, d, q), vals in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2] or 0.0)):
        mean = float(np.mean(vals))
        key = (algorithm, d)
        if key not in best or mean < best[key][0]:
            best[key] = (mean, q or 0.0)
            chosen[key] = q
    return chosen


def run_experiment(config: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Execute every cell, run the q grid search and (optionally) write outputs."""
    start = time.perf_counter()
    keep_trace = write and config.records
    jobs = [(config, seed, d, keep_trace) for d in delay_labels(config) for seed in config.seeds]
    log.info("running %d cells with the %s kernels", len(jobs), kernels.BACKEND)
    if config.parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.parallel) as pool:
            outcomes = list(pool.map(_cell_job, jobs))
    else:
        outcomes = [_cell_job(job) for job in jobs]

    runs, failures = [], []
    for seed, d, cell_runs, error in outcomes:
        if error is not None:
            log.error("cell seed=%s d=%s aborted: %s", seed, d, error)
            failures.append(CellFailure(seed, d, error))
        runs.extend(cell_runs)
    result = ExperimentResult(config, runs, choose_q(runs), failures, time.perf_counter() - start)
    if write:
        from .outputs import emit_outputs

        emit_outputs(result)
    return result

