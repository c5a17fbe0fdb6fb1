"""Online nonsubmodular minimization with delayed full-information and
bandit feedback, plus a structured sparse learning benchmark."""

__version__ = "0.1.0"

from .algorithms import (  # noqa: E402
    ALGORITHMS,
    BANDIT,
    FULL_INFORMATION,
    LearnerConfig,
    RoundRecord,
    default_params,
    make_learner,
)
from .estimator import build_mixture, exact_expectation, sample_and_estimate  # noqa: E402
from .feedback import BlockPools, DelaySchedule, FeedbackRouter, generate_delays  # noqa: E402
from .kernels import BACKEND  # noqa: E402
from .lovasz import ChainDecomposition, check_subgradient_bounds, decompose, lovasz_subgradient, lovasz_value  # noqa: E402
from .setfn import (  # noqa: E402
    DecomposedFunction,
    FunctionOracle,
    ModularFunction,
    RangeCost,
    SetFunction,
    TableFunction,
    analyze_dr_ratios,
    check_assumptions,
    marginal_gain,
)
from .sparsebench import BenchConfig, SparseBench, brute_force_comparator, round_objective  # noqa: E402
