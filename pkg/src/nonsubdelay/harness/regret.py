"""Vanilla and (alpha, beta)-regret bookkeeping against a fixed comparator."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..algorithms import RoundRecord
from ..errors import CapacityError, ContractError
from ..setfn import ENUMERATION_GUARD, DecomposedFunction, from_mask, to_mask
from ..sparsebench import select_minimizer


@dataclass
class RegretLedger:
    """Per-round losses and comparator terms.

    ``comparator_ab[t]`` is ``upper_t(S*)/alpha - beta*lower_t(S*)`` and
    ``comparator[t]`` is ``f_t(S*)``; all series are indexed from round 1.
    """

    losses: np.ndarray
    comparator_ab: np.ndarray
    comparator: np.ndarray
    alpha: float
    beta: float
    best_mask: int

    @property
    def best_set(self):
        return from_mask(self.best_mask)

    @property
    def cumulative_loss(self) -> np.ndarray:
        return np.cumsum(self.losses)

    @property
    def regret_ab(self) -> np.ndarray:
        return self.cumulative_loss - np.cumsum(self.comparator_ab)

    @property
    def regret(self) -> np.ndarray:
        return self.cumulative_loss - np.cumsum(self.comparator)

    @property
    def final_regret_ab(self) -> float:
        return float(self.regret_ab[-1])

    @property
    def final_regret(self) -> float:
        return float(self.regret[-1])


def comparator_mask(objectives: Sequence[DecomposedFunction], guard: int = ENUMERATION_GUARD) -> int:
    """Bitmask of argmin_S sum_t f_t(S) (ties: smallest, then lexicographic)."""
    n = objectives[0].n
    if n > guard:
        raise CapacityError(f"comparator enumeration over 2**{n} subsets exceeds the guard; supply a comparator")
    totals = np.zeros(1 << n)
    for f in objectives:
        totals += np.asarray(f.table(), dtype=np.float64)
    return select_minimizer(totals)[0]


def compute_regret(
    records: Sequence[RoundRecord],
    objectives: Sequence[DecomposedFunction],
    alpha: float,
    beta: float,
    comparator=None,
) -> RegretLedger:
    """Fill a ledger from a run's records and the realized objectives.

    ``comparator`` may be a bitmask or an iterable of 1-indexed elements;
    when omitted it is found by enumeration.
    """
    if len(records) != len(objectives):
        raise ContractError(f"{len(records)} records but {len(objectives)} objectives")
    if alpha <= 0:
        raise ContractError("alpha must be > 0")
    if comparator is None:
        mask = comparator_mask(objectives)
    elif isinstance(comparator, (int, np.integer)):
        mask = int(comparator)
    else:
        mask = to_mask(comparator, objectives[0].n)
    losses = np.array([r.loss for r in records], dtype=np.float64)
    upper = np.array([f.upper.value(mask) for f in objectives])
    lower = np.array([f.lower.value(mask) for f in objectives])
    return RegretLedger(
        losses=losses,
        comparator_ab=upper / alpha - beta * lower,
        comparator=upper - lower,
        alpha=float(alpha),
        beta=float(beta),
        best_mask=mask,
    )
