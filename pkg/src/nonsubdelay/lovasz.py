"""Chain decomposition of fractional points and the Lovász extension."""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from . import kernels
from .errors import DomainError
from .setfn import DecomposedFunction, SetFunction, check_enumerable, from_mask


@dataclass(frozen=True)
class ChainDecomposition:
    """Sorted order, max chain and convex weights of a point in [0,1]^n.

    ``perm`` is zero-based internally (``perm[0]`` is the index of the
    largest coordinate); :attr:`pi` gives the 1-indexed permutation.
    ``masks[i]`` is the bitmask of the chain set A_i and ``lambdas[i]`` its
    weight, for i = 0..n.
    """

    perm: np.ndarray
    lambdas: np.ndarray
    masks: np.ndarray

    @property
    def n(self) -> int:
        return self.perm.shape[0]

    @property
    def pi(self) -> Tuple[int, ...]:
        return tuple(int(p) + 1 for p in self.perm)

    @property
    def chain(self) -> List[Tuple[int, ...]]:
        return [from_mask(int(m)) for m in self.masks]

    def reconstruct(self) -> np.ndarray:
        """sum_i lambda_i * chi(A_i)."""
        x = np.zeros(self.n)
        # chi(A_i) covers perm[:i], so coordinate perm[k] collects lambda_{k+1..n}
        tail = np.cumsum(self.lambdas[::-1])[::-1]
        x[self.perm] = tail[1:]
        return x


def as_point(x, n=None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or (n is not None and x.shape[0] != n):
        raise DomainError(f"expected a vector of length {n}, got shape {x.shape}")
    if not np.all((x >= 0.0) & (x <= 1.0)):
        raise DomainError("every coordinate must lie in [0, 1]")
    return x


def decompose(x) -> ChainDecomposition:
    """Chain decomposition; ties are broken by ascending element index."""
    x = as_point(x)
    perm, lambdas, masks = kernels.chain_decompose(x)
    return ChainDecomposition(perm, lambdas, masks)


def chain_values(f: SetFunction, chain: ChainDecomposition) -> np.ndarray:
    return np.asarray(f.values(chain.masks), dtype=np.float64)


def lovasz_value(f: SetFunction, x) -> float:
    """f_L(x) = sum_i lambda_i f(A_i)."""
    chain = decompose(as_point(x, f.n))
    return float(np.dot(chain.lambdas, chain_values(f, chain)))


def lovasz_subgradient(f: SetFunction, x) -> np.ndarray:
    """g[pi(i)] = f(A_i) - f(A_{i-1}) over the sorted chain of ``x``."""
    chain = decompose(as_point(x, f.n))
    return kernels.chain_gradient(chain.perm, chain_values(f, chain))


@dataclass
class SubgradientBoundReport:
    """Violations found by :func:`check_subgradient_bounds`.

    ``subset_violations`` holds ``(A, lhs, rhs)`` for the per-subset bound;
    ``point_violation`` holds ``(lhs, rhs)`` if the surrogate bound at x
    fails, and ``identity_gap`` is ``|<g, x> - f_L(x)|``.
    """

    subset_violations: List[Tuple[Tuple[int, ...], float, float]] = field(default_factory=list)
    point_violation: Tuple[float, float] = None
    identity_gap: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.subset_violations and self.point_violation is None


def check_subgradient_bounds(df: DecomposedFunction, alpha: float, beta: float, x, tol: float = 1e-9) -> SubgradientBoundReport:
    """Check the approximate-subgradient bounds of the decomposed function.

    (a) For every subset A, ``sum_{i in A} g_i <= upper(A)/alpha - beta*lower(A)``.
    (b) ``<g, x> <= upper_L(x)/alpha - beta*lower_L(x)``, using the Lovász
        values of the parts in place of their convex closures.
    """
    n = df.n
    check_enumerable(n)
    x = as_point(x, n)
    g = lovasz_subgradient(df, x)
    report = SubgradientBoundReport()

    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(np.float64)
    lhs = bits @ g
    rhs = np.asarray(df.upper.table()) / alpha - beta * np.asarray(df.lower.table())
    for m in np.flatnonzero(lhs > rhs + tol):
        report.subset_violations.append((from_mask(int(m)), float(lhs[m]), float(rhs[m])))

    inner = float(np.dot(g, x))
    report.identity_gap = abs(inner - lovasz_value(df, x))
    bound = lovasz_value(df.upper, x) / alpha - beta * lovasz_value(df.lower, x)
    if inner > bound + tol:
        report.point_violation = (inner, bound)
    return report
