"""Online structured sparse regression with a range-cost regularizer.

Each round draws a Gaussian design ``A_t`` (s x n) and responses
``y_t = A_t x* + eps_t`` where ``x*`` has ``k`` leading ones. The round
loss over supports is ``H_t(S) = gamma * F(S) - G_t(S)`` with the range cost
``F`` and the restricted-fit improvement
``G_t(S) = l_t(0) - min_{supp(x) in S} l_t(x)``, ``l_t(x) = |A_t x - y_t|^2 / 2``.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import ContractError, SolverError
from .setfn import (
    DecomposedFunction,
    RangeCost,
    SetFunction,
    TableFunction,
    check_enumerable,
    from_mask,
)

DATA_STREAM = 0


@dataclass(frozen=True)
class BenchConfig:
    n: int = 10
    s: int = 128
    k: int = 2
    gamma: float = 0.1
    noise_std: float = 0.1
    T: int = 8000
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ContractError("n must be >= 1")
        if not 1 <= self.k <= self.n:
            raise ContractError(f"k must lie in [1, n], got {self.k}")
        if self.s < 1:
            raise ContractError("s must be >= 1")
        if self.gamma <= 0:
            raise ContractError("gamma must be > 0")
        if self.noise_std < 0:
            raise ContractError("noise_std must be >= 0")
        if self.T < 1:
            raise ContractError("T must be >= 1")


@dataclass(frozen=True)
class RoundData:
    A: np.ndarray
    y: np.ndarray


def x_star(config: BenchConfig) -> np.ndarray:
    x = np.zeros(config.n)
    x[: config.k] = 1.0
    return x


def round_rng(config: BenchConfig, t: int) -> np.random.Generator:
    return np.random.default_rng([config.seed, DATA_STREAM, t])


def generate_round(config: BenchConfig, t: int, rng: np.random.Generator = None) -> RoundData:
    """Draw round ``t``. Without ``rng`` the stream is derived from
    ``(config.seed, t)`` so any round can be regenerated on its own."""
    if rng is None:
        rng = round_rng(config, t)
    A = rng.standard_normal((config.s, config.n))
    eps = rng.normal(0.0, config.noise_std, size=config.s) if config.noise_std > 0 else np.zeros(config.s)
    return RoundData(A, A @ x_star(config) + eps)


def range_cost(S) -> float:
    S = list(S)
    if not S:
        return 0.0
    return float(max(S) - min(S) + 1)


def restricted_loss_min(data: RoundData, S, t: int = None) -> float:
    """min over x supported on S of |A x - y|^2 / 2 (minimum-norm lstsq)."""
    cols = [i - 1 for i in sorted(S)]
    if not cols:
        return 0.5 * float(data.y @ data.y)
    try:
        coef, *_ = np.linalg.lstsq(data.A[:, cols], data.y, rcond=None)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"least squares failed at round {t}, subset {tuple(sorted(S))}: {exc}") from exc
    resid = data.A[:, cols] @ coef - data.y
    return 0.5 * float(resid @ resid)


class RestrictedGain(SetFunction):
    """G(S) = l(0) - restricted minimum, evaluated by lstsq and memoized."""

    def __init__(self, data: RoundData, memoize: bool = True, t: int = None):
        self.data = data
        self.n = data.A.shape[1]
        self.t = t
        self._base = 0.5 * float(data.y @ data.y)
        self._memo = {} if memoize else None

    def value(self, mask):
        if mask == 0:
            return 0.0
        if self._memo is not None and mask in self._memo:
            return self._memo[mask]
        v = self._base - restricted_loss_min(self.data, from_mask(mask), self.t)
        if self._memo is not None:
            self._memo[mask] = v
        return v


class RoundObjective(DecomposedFunction):
    """H = gamma * F - G as a decomposed set function."""

    @property
    def F(self):
        return self.upper

    @property
    def G(self):
        return self.lower


def round_objective(data: RoundData, gamma: float, memoize: bool = True, t: int = None) -> RoundObjective:
    if gamma <= 0:
        raise ContractError("gamma must be > 0")
    n = data.A.shape[1]
    return RoundObjective(RangeCost(n, gamma), RestrictedGain(data, memoize=memoize, t=t))


def gain_tables(rounds: Sequence[RoundData], tol: float = 1e-10) -> np.ndarray:
    """G_t on every subset for every round, shape (T, 2**n).

    Uses the Gram-matrix Cholesky kernel; subsets it flags as numerically
    rank deficient are recomputed with :func:`restricted_loss_min`.
    """
    A = np.stack([r.A for r in rounds])
    y = np.stack([r.y for r in rounds])
    check_enumerable(A.shape[2])
    gram = np.einsum("tsi,tsj->tij", A, A)
    rhs = np.einsum("tsi,ts->ti", A, y)
    values, deficient = kernels.subset_gain_table(gram, rhs, tol)
    for t, m in zip(*np.nonzero(deficient)):
        data = rounds[t]
        values[t, m] = 0.5 * float(data.y @ data.y) - restricted_loss_min(data, from_mask(int(m)), int(t) + 1)
    return values


class SparseBench:
    """All T rounds of one benchmark instance with tabulated objectives.

    Round indices are 1-based throughout.
    """

    def __init__(self, config: BenchConfig):
        check_enumerable(config.n)
        self.config = config
        self.rounds = [generate_round(config, t) for t in range(1, config.T + 1)]
        self.G = gain_tables(self.rounds)
        self.F = RangeCost(config.n, config.gamma).table()

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def T(self) -> int:
        return self.config.T

    def objective(self, t: int) -> RoundObjective:
        return RoundObjective(TableFunction(self.F), TableFunction(self.G[t - 1]))

    def exact_objective(self, t: int) -> RoundObjective:
        """Round ``t`` evaluated by lstsq instead of the table."""
        return round_objective(self.rounds[t - 1], self.config.gamma, t=t)

    def objectives(self) -> List[RoundObjective]:
        return [self.objective(t) for t in range(1, self.T + 1)]

    def loss_bound(self, factor: float = 2.0, t: int = 1) -> float:
        """``factor`` times max_S (gamma F(S) + G_t(S)) on round ``t``."""
        return factor * float(np.max(self.F + self.G[t - 1]))

    def cumulative_table(self) -> np.ndarray:
        """sum_t H_t(S) for every subset."""
        return (self.F[None, :] - self.G).sum(axis=0)


def _tie_key(mask: int):
    members = from_mask(mask)
    return (len(members), members)


def select_minimizer(totals: np.ndarray) -> Tuple[int, float]:
    """Argmin over bitmask-indexed totals; ties by cardinality, then lexicographic."""
    best = float(np.min(totals))
    candidates = np.flatnonzero(totals == best)
    mask = min((int(m) for m in candidates), key=_tie_key)
    return mask, best


def brute_force_comparator(objectives: Sequence[SetFunction]) -> Tuple[Tuple[int, ...], float]:
    """S* = argmin_S sum_t f_t(S) by enumerating all 2**n subsets."""
    if not objectives:
        raise ContractError("need at least one objective")
    n = objectives[0].n
    check_enumerable(n)
    totals = np.zeros(1 << n)
    for f in objectives:
        totals += np.asarray(f.table(), dtype=np.float64)
    mask, best = select_minimizer(totals)
    return from_mask(mask), best
