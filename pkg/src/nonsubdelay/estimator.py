"""One-point bandit estimate of the Lovász subgradient.

A single chain set is sampled from the exploration mixture
``p_i = (1 - mu) * lambda_i + mu / (n + 1)``, its loss is importance
weighted into ``fhat_i = 1(i = i*) f(A_i*) / p_i*`` and the estimate is
``ghat[pi(i)] = fhat_i - fhat_{i-1}``.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import kernels
from .errors import ParameterError
from .lovasz import ChainDecomposition
from .setfn import SetFunction, from_mask


@dataclass(frozen=True)
class MixtureDistribution:
    probs: np.ndarray
    mu: float

    @property
    def floor(self) -> float:
        return self.mu / self.probs.shape[0]


@dataclass(frozen=True)
class BanditObservation:
    index: int
    mask: int
    value: float

    @property
    def subset(self):
        return from_mask(self.mask)


@dataclass(frozen=True)
class EstimatedGradient:
    g_hat: np.ndarray
    round: int = 0


def check_mu(mu: float) -> float:
    mu = float(mu)
    if not 0.0 < mu < 1.0:
        raise ParameterError(f"exploration probability must lie in (0, 1), got {mu}")
    return mu


def build_mixture(chain: ChainDecomposition, mu: float) -> MixtureDistribution:
    mu = check_mu(mu)
    return MixtureDistribution(kernels.mixture_probs(chain.lambdas, mu), mu)


def sample_and_estimate(
    f: SetFunction,
    chain: ChainDecomposition,
    dist: MixtureDistribution,
    rng: np.random.Generator,
    round: int = 0,
) -> Tuple[BanditObservation, EstimatedGradient]:
    """Draw one chain set, query ``f`` once and return the estimate."""
    i_star = kernels.draw_index(dist.probs, rng.random())
    mask = int(chain.masks[i_star])
    value = f.value(mask)
    g_hat = kernels.one_point_estimate(chain.perm, dist.probs, i_star, value)
    return BanditObservation(i_star, mask, value), EstimatedGradient(g_hat, round)


def estimate_for_outcome(chain: ChainDecomposition, dist: MixtureDistribution, i_star: int, value: float) -> np.ndarray:
    """The estimate produced if outcome ``i_star`` with loss ``value`` were drawn."""
    return kernels.one_point_estimate(chain.perm, dist.probs, i_star, value)


def exact_expectation(f: SetFunction, chain: ChainDecomposition, dist: MixtureDistribution) -> np.ndarray:
    """E[ghat] summed analytically over all n + 1 outcomes."""
    values = f.values(chain.masks)
    out = np.zeros(chain.n)
    for i, (p, v) in enumerate(zip(dist.probs, values)):
        out += p * estimate_for_outcome(chain, dist, i, float(v))
    return out
