"""Online learners over the Lovász relaxation under delayed feedback.

Full information: DOGD-NF (applies every gradient that arrives) and the
pooling baseline DOAGD (applies the oldest pooled gradient, one per round).
Bandit: DBGD-NF (all arrived estimates), BDBGD-NF (blocked updates from
fully reported blocks) and the pooling baseline DBAGD.

Each learner draws exactly one uniform variate per round from its
generator, so learners built from equal seeds share their randomness.
"""

import heapq
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import ParameterError
from .feedback import BlockPools, FeedbackRouter
from .setfn import SetFunction, from_mask

log = logging.getLogger(__name__)

FULL_INFORMATION = ("DOGD-NF", "DOAGD")
BANDIT = ("DBGD-NF", "BDBGD-NF", "DBAGD")
ALGORITHMS = FULL_INFORMATION + BANDIT
MU_MIN = 1e-6
MU_MAX = 1.0 - 1e-6


def is_bandit(algorithm: str) -> bool:
    return algorithm in BANDIT


@dataclass(frozen=True)
class LearnerConfig:
    algorithm: str
    T: int
    n: int
    eta: float
    mu: Optional[float] = None
    K: Optional[int] = None
    L: Optional[float] = None
    d: Optional[int] = None
    d_bar: Optional[float] = None
    q: Optional[float] = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ParameterError(f"unknown algorithm {self.algorithm!r}")
        if not self.eta > 0:
            raise ParameterError(f"eta must be > 0, got {self.eta}")
        if is_bandit(self.algorithm) and not (self.mu is not None and 0 < self.mu < 1):
            raise ParameterError(f"{self.algorithm} needs mu in (0, 1), got {self.mu}")
        if self.algorithm == "BDBGD-NF" and not (self.K is not None and 1 <= self.K <= self.T):
            raise ParameterError(f"block size K must lie in [1, T], got {self.K}")


def _clamp_mu(mu: float, algorithm: str) -> float:
    clamped = min(max(mu, MU_MIN), MU_MAX)
    if clamped != mu:
        log.warning("%s: exploration probability %.6g clamped to %.6g", algorithm, mu, clamped)
    return clamped


def default_params(algorithm: str, T: int, n: int, L: float, d: float, d_bar: float, q: float = 1.0) -> LearnerConfig:
    """Step size, exploration and block size prescribed for each learner.

    ``q`` scales the exploration probability only (the grid-searched
    factor); it is ignored by the full-information learners.
    """
    for name, v in (("T", T), ("n", n), ("L", L), ("d", d), ("d_bar", d_bar), ("q", q)):
        if not v > 0:
            raise ParameterError(f"{name} must be positive, got {v}")
    mu = K = None
    if algorithm == "DOGD-NF":
        eta = math.sqrt(n) / (L * math.sqrt(d_bar * T))
    elif algorithm == "DOAGD":
        eta = math.sqrt(n) / (L * math.sqrt(d * T))
    elif algorithm == "DBGD-NF":
        eta = 1.0 / (L * d_bar ** (1 / 3) * T ** (2 / 3))
        mu = q * n * d_bar ** (1 / 3) / T ** (1 / 3)
    elif algorithm == "DBAGD":
        eta = 1.0 / (L * d ** (1 / 3) * T ** (2 / 3))
        mu = q * n * d ** (1 / 3) / T ** (1 / 3)
    elif algorithm == "BDBGD-NF":
        eta = min(1.0 / (L * T ** (2 / 3)), 1.0 / (L * math.sqrt(d * T)))
        mu = q * n / T ** (1 / 3)
        K = min(T, max(1, round(T ** (1 / 3))))
    else:
        raise ParameterError(f"unknown algorithm {algorithm!r}")
    if mu is not None:
        mu = _clamp_mu(mu, algorithm)
    return LearnerConfig(algorithm, T, n, eta, mu=mu, K=K, L=L, d=d, d_bar=d_bar,
                         q=q if is_bandit(algorithm) else None)


@dataclass
class RoundRecord:
    t: int
    mask: int
    loss: float
    delay: int
    oracle_calls: int
    x: np.ndarray

    @property
    def subset(self) -> Tuple[int, ...]:
        return from_mask(self.mask)


def _sum_gradients(grads, n):
    total = np.zeros(n)
    for g in grads:
        total = total + g
    return total


class Learner:
    """Common state: current point, feedback router and shared RNG."""

    bandit = False

    def __init__(self, config: LearnerConfig, delays: Sequence[int], rng: np.random.Generator, x0=None):
        delays = np.asarray(delays, dtype=np.int64)
        if delays.shape != (config.T,):
            raise ParameterError(f"need {config.T} delays, got {delays.shape}")
        self.config = config
        self.delays = delays
        self.rng = rng
        n = config.n
        if x0 is None:
            x0 = np.zeros(n)
        self.x = np.clip(np.asarray(x0, dtype=np.float64).copy(), 0.0, 1.0)
        if self.x.shape != (n,):
            raise ParameterError(f"x0 must have length {n}")
        self.router = FeedbackRouter(config.T)
        self.applied: List[int] = []
        self.t = 0

    def _play(self, t, f):
        """Sample S_t from the current point and form its gradient."""
        perm, lambdas, masks = kernels.chain_decompose(self.x)
        u = self.rng.random()
        if self.bandit:
            probs = kernels.mixture_probs(lambdas, self.config.mu)
            i = kernels.draw_index(probs, u)
            loss = f.value(int(masks[i]))
            g = kernels.one_point_estimate(perm, probs, i, loss)
            calls = 1
        else:
            values = f.values(masks)
            i = kernels.draw_index(lambdas, u)
            loss = float(values[i])
            g = kernels.chain_gradient(perm, values)
            calls = masks.shape[0]
        return int(masks[i]), float(loss), g, calls

    def step(self, t: int, f: SetFunction) -> RoundRecord:
        if t != self.t + 1 or t > self.config.T:
            raise ParameterError(f"expected round {self.t + 1}, got {t}")
        self.t = t
        played = self.x
        mask, loss, g, calls = self._play(t, f)
        d_t = int(self.delays[t - 1])
        self.router.route(t, d_t, g)
        self._update(t, self.router.receive(t))
        return RoundRecord(t, mask, loss, d_t, calls, played)

    def _update(self, t, received):
        raise NotImplementedError

    def run(self, objectives) -> List[RoundRecord]:
        return [self.step(t, f) for t, f in enumerate(objectives, start=1)]


class _AllArrivals(Learner):
    def _update(self, t, received):
        if not received:
            return
        self.applied.extend(k for k, _ in received)
        total = _sum_gradients((g for _, g in received), self.config.n)
        self.x = kernels.project_step(self.x, total, self.config.eta)


class _OldestPooled(Learner):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.pool = []

    def _update(self, t, received):
        for k, g in received:
            heapq.heappush(self.pool, (k, g))
        if not self.pool:
            return
        k, g = heapq.heappop(self.pool)
        self.applied.append(k)
        total = _sum_gradients((g,), self.config.n)
        self.x = kernels.project_step(self.x, total, self.config.eta)


class DOGDNF(_AllArrivals):
    """Delayed online gradient descent using every arrived gradient."""


class DBGDNF(_AllArrivals):
    """Delayed bandit gradient descent using every arrived estimate."""

    bandit = True


class DOAGD(_OldestPooled):
    """Pooling baseline, full information."""


class DBAGD(_OldestPooled):
    """Pooling baseline, bandit feedback."""

    bandit = True


class BDBGDNF(Learner):
    """Blocked delayed bandit gradient descent.

    The played point is frozen for each block of K rounds. At a block end
    every pool whose block has fully reported is applied and emptied.
    """

    bandit = True

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.pools = BlockPools(self.config.T, self.config.K)
        self._inbox = []

    @property
    def y(self):
        return self.x

    def _update(self, t, received):
        self._inbox.extend(received)
        K, T = self.config.K, self.config.T
        if t % K != 0 and t != T:
            return
        ready = self.pools.deposit_and_collect(self._inbox)
        self._inbox = []
        if not ready:
            return
        grads = []
        for j in sorted(ready):
            start = (j - 1) * K + 1
            self.applied.extend(range(start, start + len(ready[j])))
            grads.extend(ready[j])
        total = _sum_gradients(grads, self.config.n)
        self.x = kernels.project_step(self.x, total, self.config.eta)


LEARNERS = {
    "DOGD-NF": DOGDNF,
    "DBGD-NF": DBGDNF,
    "BDBGD-NF": BDBGDNF,
    "DOAGD": DOAGD,
    "DBAGD": DBAGD,
}


def make_learner(config: LearnerConfig, delays, rng, x0=None) -> Learner:
    return LEARNERS[config.algorithm](config, delays, rng, x0=x0)


RECORD_HEADER = ("t", "algorithm", "seed", "S_t", "loss", "d_t", "oracle_calls")


def format_subset(mask: int) -> str:
    return " ".join(str(i) for i in from_mask(mask))


def parse_subset(text: str) -> Tuple[int, ...]:
    return tuple(int(v) for v in text.split())


def record_rows(records: Sequence[RoundRecord], algorithm: str, seed: int):
    for r in records:
        yield (r.t, algorithm, seed, format_subset(r.mask), repr(r.loss), r.delay, r.oracle_calls)
