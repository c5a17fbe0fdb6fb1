"""Delay schedules, arrival routing and per-block gradient pools.

Feedback for the query issued at round ``k`` with delay ``d_k >= 1``
arrives at round ``k + d_k - 1`` (``d_k = 1`` means same-round arrival).
Anything landing after the horizon ``T`` is kept as overdue and never
delivered.
"""

import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ParameterError, ProtocolError

SCHEDULE_KINDS = ("constant", "uniform", "spike", "custom")
_ALIASES = {"uniform-random": "uniform", "custom-list": "custom"}


def canonical_kind(kind: str) -> str:
    kind = _ALIASES.get(kind, kind)
    if kind not in SCHEDULE_KINDS:
        raise ParameterError(f"unknown schedule kind {kind!r}")
    return kind


@dataclass(frozen=True)
class DelaySchedule:
    """How to produce the delays d_1..d_T.

    ``kind`` is one of ``constant`` (every delay equals ``d``), ``uniform``
    (i.i.d. uniform on {1..d}), ``spike`` (``T // 2`` for the first
    ``isqrt(T)`` rounds and 1 afterwards; ``d`` is ignored) or ``custom``
    (the explicit ``delays`` list).
    """

    kind: str
    T: int
    d: int = 1
    seed: Optional[int] = None
    delays: Optional[Tuple[int, ...]] = None


def generate_delays(schedule: DelaySchedule, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Return the integer vector (d_1, ..., d_T).

    For ``uniform`` the draws come from ``rng`` when given, otherwise from a
    generator seeded with ``schedule.seed``.
    """
    T, d = schedule.T, schedule.d
    kind = canonical_kind(schedule.kind)
    if T < 1:
        raise ParameterError(f"horizon T must be >= 1, got {T}")
    if kind == "constant":
        if d < 1:
            raise ParameterError(f"max delay d must be >= 1, got {d}")
        return np.full(T, d, dtype=np.int64)
    if kind == "uniform":
        if d < 1:
            raise ParameterError(f"max delay d must be >= 1, got {d}")
        if rng is None:
            rng = np.random.default_rng(schedule.seed)
        return rng.integers(1, d + 1, size=T, dtype=np.int64)
    if kind == "spike":
        out = np.ones(T, dtype=np.int64)
        out[: math.isqrt(T)] = max(1, T // 2)
        return out
    if kind == "custom":
        if schedule.delays is None or len(schedule.delays) != T:
            raise ParameterError("custom schedule needs exactly T delays")
        out = np.asarray(schedule.delays, dtype=np.int64)
        if out.min() < 1:
            raise ParameterError("every delay must be >= 1")
        return out


def delay_stats(delays: Sequence[int]) -> Tuple[int, float]:
    """(maximum delay, average delay)."""
    delays = np.asarray(delays)
    return int(delays.max()), float(delays.sum()) / delays.shape[0]


def save_delays(delays: Sequence[int], path) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in delays))


def load_delays(path) -> np.ndarray:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    out = np.array([int(ln) for ln in lines if ln], dtype=np.int64)
    if out.size == 0 or out.min() < 1:
        raise ParameterError(f"{path}: delays must be positive integers, one per line")
    return out


class FeedbackRouter:
    """Tracks which query rounds report back at which round.

    ``arrivals(t)`` is the index set F_t = {k : k + d_k - 1 = t}. Payloads
    registered with a query are handed out once by :meth:`receive`.
    """

    def __init__(self, T: int):
        self.T = T
        self.pending: Dict[int, List[int]] = defaultdict(list)
        self.overdue: List[int] = []
        self._payloads: Dict[int, object] = {}
        self._delay: Dict[int, int] = {}

    def route(self, query_round: int, delay: int, payload=None) -> int:
        if not 1 <= query_round <= self.T:
            raise ProtocolError(f"query round {query_round} outside [1, {self.T}]")
        if delay < 1:
            raise ProtocolError(f"delay must be >= 1, got {delay}")
        if query_round in self._delay:
            raise ProtocolError(f"round {query_round} already registered")
        self._delay[query_round] = delay
        arrival = query_round + delay - 1
        if arrival > self.T:
            self.overdue.append(query_round)
        else:
            self.pending[arrival].append(query_round)
            self._payloads[query_round] = payload
        return arrival

    def arrivals(self, t: int) -> List[int]:
        return sorted(self.pending.get(t, ()))

    def receive(self, t: int) -> List[Tuple[int, object]]:
        """Pop the payloads arriving at round ``t`` in query-round order."""
        return [(k, self._payloads.pop(k)) for k in self.arrivals(t)]

    @property
    def registered(self) -> int:
        return len(self._delay)

    def delay_stats(self) -> Tuple[int, float]:
        return delay_stats(list(self._delay.values()))


class BlockPools:
    """Gradient pools P_1..P_ceil(T/K), one per block of K rounds.

    A pool is ready once it holds one gradient for every round of its block
    (the final block may be shorter than K). Ready pools are returned once,
    emptied and then closed for further deposits.
    """

    def __init__(self, T: int, K: int):
        if not 1 <= K <= T:
            raise ParameterError(f"block size K must lie in [1, T], got {K}")
        self.T = T
        self.K = K
        self.num_blocks = -(-T // K)
        self.pools: Dict[int, Dict[int, object]] = defaultdict(dict)
        self.consumed = set()

    def block_of(self, k: int) -> int:
        return -(-k // self.K)

    def block_length(self, i: int) -> int:
        return min(i * self.K, self.T) - (i - 1) * self.K

    def deposit_and_collect(self, received) -> Dict[int, List[object]]:
        """Deposit ``(round, gradient)`` pairs and return the newly complete
        pools as ``{block index: [gradients in round order]}``."""
        touched = set()
        for k, grad in received:
            j = self.block_of(k)
            if j in self.consumed:
                raise ProtocolError(f"pool {j} was already consumed")
            if k in self.pools[j]:
                raise ProtocolError(f"round {k} deposited twice")
            self.pools[j][k] = grad
            touched.add(j)
        ready = {}
        for j in sorted(touched):
            pool = self.pools[j]
            if len(pool) == self.block_length(j):
                ready[j] = [pool[k] for k in sorted(pool)]
                del self.pools[j]
                self.consumed.add(j)
        return ready

    @property
    def pending_count(self) -> int:
        return sum(len(p) for p in self.pools.values())
