"""Set functions over the ground set {1, ..., n}.

Subsets appear in two forms. The public API accepts any iterable of
1-indexed element labels; internally a subset is an integer bitmask where
bit ``i - 1`` marks element ``i``. All hot paths work on bitmasks.
"""

from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Tuple

import numpy as np

from .errors import CapacityError, ContractError, OutOfRangeError

ENUMERATION_GUARD = 20


def to_mask(S: Iterable[int], n: int) -> int:
    mask = 0
    for i in S:
        i = int(i)
        if not 1 <= i <= n:
            raise OutOfRangeError(f"element {i} outside ground set [1, {n}]")
        mask |= 1 << (i - 1)
    return mask


def from_mask(mask: int) -> Tuple[int, ...]:
    """Sorted 1-indexed members of ``mask``."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def check_enumerable(n: int, guard: int = ENUMERATION_GUARD) -> None:
    if n > guard:
        raise CapacityError(f"n = {n} exceeds the enumeration guard of {guard}")


class SetFunction:
    """Base class. Subclasses implement :meth:`value` on bitmasks."""

    n: int

    def value(self, mask: int) -> float:
        raise NotImplementedError

    def values(self, masks) -> np.ndarray:
        return np.array([self.value(int(m)) for m in masks], dtype=np.float64)

    def __call__(self, S: Iterable[int] = ()) -> float:
        return self.value(to_mask(S, self.n))

    def table(self) -> np.ndarray:
        """Values on all ``2**n`` subsets, indexed by bitmask."""
        check_enumerable(self.n)
        return self.values(np.arange(1 << self.n))


class FunctionOracle(SetFunction):
    """Wrap ``fn(frozenset_of_labels) -> float``; results are memoized."""

    def __init__(self, n: int, fn: Callable[[frozenset], float], memoize: bool = True):
        if n < 1:
            raise ContractError("ground set size must be >= 1")
        self.n = n
        self._fn = fn
        self._memo = {} if memoize else None

    def value(self, mask):
        if self._memo is None:
            return float(self._fn(frozenset(from_mask(mask))))
        try:
            return self._memo[mask]
        except KeyError:
            v = float(self._fn(frozenset(from_mask(mask))))
            self._memo[mask] = v
            return v


class TableFunction(SetFunction):
    """A set function given by its full table of ``2**n`` values."""

    def __init__(self, table):
        table = np.asarray(table, dtype=np.float64)
        n = int(table.shape[0]).bit_length() - 1
        if n < 1 or table.shape != (1 << n,):
            raise ContractError("table length must be 2**n with n >= 1")
        self.n = n
        self._table = table

    def value(self, mask):
        return float(self._table[mask])

    def values(self, masks):
        return self._table[np.asarray(masks, dtype=np.int64)]

    def table(self):
        return self._table


class ModularFunction(SetFunction):
    """f(S) = sum of weights over S."""

    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.n = self.weights.shape[0]

    def value(self, mask):
        return float(sum(self.weights[i - 1] for i in from_mask(mask)))


class RangeCost(SetFunction):
    """max(S) - min(S) + 1 on nonempty S, 0 on the empty set, times ``scale``."""

    def __init__(self, n: int, scale: float = 1.0):
        self.n = n
        self.scale = float(scale)

    def value(self, mask):
        if mask == 0:
            return 0.0
        hi = int(mask).bit_length()
        lo = (int(mask) & -int(mask)).bit_length()
        return self.scale * (hi - lo + 1)

    def table(self):
        check_enumerable(self.n)
        masks = np.arange(1 << self.n, dtype=np.int64)
        out = np.zeros(1 << self.n)
        nz = masks > 0
        hi = np.floor(np.log2(masks[nz])).astype(np.int64)
        lo = np.floor(np.log2(masks[nz] & -masks[nz])).astype(np.int64)
        out[nz] = self.scale * (hi - lo + 1)
        return out


class ZeroFunction(SetFunction):
    def __init__(self, n: int):
        self.n = n

    def value(self, mask):
        return 0.0


class CountingOracle(SetFunction):
    """Forward to ``inner`` while counting every evaluated subset."""

    def __init__(self, inner: SetFunction):
        self.inner = inner
        self.n = inner.n
        self.calls = 0

    def value(self, mask):
        self.calls += 1
        return self.inner.value(mask)

    def values(self, masks):
        masks = np.asarray(masks)
        self.calls += masks.shape[0]
        return self.inner.values(masks)


class DecomposedFunction(SetFunction):
    """f = upper - lower with ``upper`` weakly DR-submodular and ``lower``
    weakly DR-supermodular, both normalized and nondecreasing."""

    def __init__(self, upper: SetFunction, lower: SetFunction):
        if upper.n != lower.n:
            raise ContractError("parts must share the ground set")
        self.upper = upper
        self.lower = lower
        self.n = upper.n

    def value(self, mask):
        return self.upper.value(mask) - self.lower.value(mask)

    def values(self, masks):
        return self.upper.values(masks) - self.lower.values(masks)


def marginal_gain(f: SetFunction, i: int, S: Iterable[int] = ()) -> float:
    """f(S + {i}) - f(S) for an element ``i`` not in ``S``."""
    if not 1 <= i <= f.n:
        raise OutOfRangeError(f"element {i} outside ground set [1, {f.n}]")
    mask = to_mask(S, f.n)
    bit = 1 << (i - 1)
    if mask & bit:
        raise ContractError(f"element {i} already belongs to S")
    return f.value(mask | bit) - f.value(mask)


def _submask_reduce(arr: np.ndarray, n: int, op) -> np.ndarray:
    """out[B] = op over arr[A] for all A subset of B (sum-over-subsets DP)."""
    out = arr.copy()
    for j in range(n):
        view = out.reshape(-1, 2, 1 << j)
        view[:, 1, :] = op(view[:, 1, :], view[:, 0, :])
    return out


def analyze_dr_ratios(f: SetFunction, guard: int = ENUMERATION_GUARD) -> Tuple[float, float]:
    """Measure the weak DR-submodularity and DR-supermodularity ratios.

    ``alpha`` is the largest value with ``f(i|A) >= alpha * f(i|B)`` and
    ``beta`` the largest with ``f(i|B) >= beta * f(i|A)``, over all
    ``A subset-of B`` (equality allowed) and ``i`` outside ``B``. Only pairs
    whose dominated gain is strictly positive constrain the ratio. If none
    does, ``inf`` is returned for that ratio.

    Submask minima and maxima are computed by a sum-over-subsets sweep, so
    the cost is O(n^2 2^n) rather than a pairwise enumeration.
    """
    n = f.n
    check_enumerable(n, guard)
    table = np.asarray(f.table(), dtype=np.float64)
    size = 1 << n
    masks = np.arange(size, dtype=np.int64)
    alpha = np.inf
    beta = np.inf
    for i in range(n):
        bit = 1 << i
        outside = (masks & bit) == 0
        gain = np.full(size, np.nan)
        gain[outside] = table[masks[outside] | bit] - table[masks[outside]]
        # masks containing i never lie below a B that excludes i; park them
        lo = _submask_reduce(np.where(outside, gain, np.inf), n, np.minimum)
        hi = _submask_reduce(np.where(outside, gain, -np.inf), n, np.maximum)
        pos = np.where(outside & (gain > 0), gain, np.inf)
        lo_pos = _submask_reduce(pos, n, np.minimum)

        gB = gain[outside]
        constrain = gB > 0
        if constrain.any():
            alpha = min(alpha, float(np.min(lo[outside][constrain] / gB[constrain])))

        has_pos = np.isfinite(lo_pos[outside])
        nonneg = has_pos & (gB >= 0)
        if nonneg.any():
            beta = min(beta, float(np.min(gB[nonneg] / hi[outside][nonneg])))
        negative = has_pos & (gB < 0)
        if negative.any():
            beta = min(beta, float(np.min(gB[negative] / lo_pos[outside][negative])))
    return alpha, beta


@dataclass
class AssumptionReport:
    normalization: List[str] = field(default_factory=list)
    monotonicity: List[Tuple[str, Tuple[int, ...], Tuple[int, ...]]] = field(default_factory=list)
    bound: List[Tuple[Tuple[int, ...], float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.normalization or self.monotonicity or self.bound)


def check_assumptions(df: DecomposedFunction, L: float, tol: float = 0.0) -> AssumptionReport:
    """Enumerate all subsets and report violations of normalization,
    monotonicity of each part, and ``upper(S) + lower(S) <= L``.

    Monotonicity is checked on covering pairs ``(S, S + {i})``, which is
    equivalent to checking every nested pair.
    """
    n = df.n
    check_enumerable(n)
    report = AssumptionReport()
    tables = {"upper": np.asarray(df.upper.table()), "lower": np.asarray(df.lower.table())}
    masks = np.arange(1 << n, dtype=np.int64)
    for name, tab in tables.items():
        if tab[0] != 0.0:
            report.normalization.append(name)
        for i in range(n):
            bit = 1 << i
            base = masks[(masks & bit) == 0]
            bad = base[tab[base | bit] < tab[base] - tol]
            for m in bad:
                report.monotonicity.append((name, from_mask(int(m)), from_mask(int(m) | bit)))
    total = tables["upper"] + tables["lower"]
    for m in np.flatnonzero(total > L + tol):
        report.bound.append((from_mask(int(m)), float(total[m])))
    return report
