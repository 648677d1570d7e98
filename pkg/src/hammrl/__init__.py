"""Measurement-error mitigation for sparse quantum readout distributions.

Observed outcomes form a graph keyed by Hamming distance; the measured
distribution is deconvolved against a distance point-spread function
(Richardson-Lucy), with neighborhood-scoring baselines and a rank-change
evaluation harness built around a Bernstein-Vazirani noise simulator.
"""

from .backend import active_backend, available_backends, set_backend, use_backend
from .baselines import (
    HammerScore,
    PoissonBaselineConfig,
    hammer_mitigate,
    hammer_scores,
    poisson_mitigate,
    score_distance_bound,
)
from .deconv import (
    DEFAULT_CONVERGENCE_TOL,
    DEFAULT_MAX_ITERATIONS,
    DeconvolutionConfig,
    DeconvolutionResult,
    PointSpreadFunction,
    psf_weight,
    richardson_lucy,
    rl_single_iteration,
)
from .distribution import (
    CountsMap,
    ProbDistribution,
    StateGraph,
    build_state_graph,
    from_counts,
    rank_of,
)
from .errors import (
    CapacityError,
    HammrlError,
    InvalidInputError,
    NumericalDegeneracyError,
)
from .evaluation import (
    DatasetReport,
    RankChangeRecord,
    aggregate,
    compare_methods,
    evaluate_method,
    score_circuit,
    total_variation_distance,
)
from .hamming import (
    DENSE_ENUMERATION_LIMIT,
    BitString,
    enumerate_space,
    hamming_distance,
    neighbors_at_distance,
    pack_bitstrings,
)
from .simulator import (
    DEFAULT_SHOTS,
    BvCircuitSpec,
    DatasetSpec,
    NoiseModel,
    analytic_noisy_distribution,
    derive_circuit_seed,
    generate_dataset,
    sample_counts,
    secrets_with_ones,
)

__version__ = "0.1.0"

__all__ = [
    "BitString",
    "BvCircuitSpec",
    "CapacityError",
    "CountsMap",
    "DatasetReport",
    "DatasetSpec",
    "DeconvolutionConfig",
    "DeconvolutionResult",
    "DENSE_ENUMERATION_LIMIT",
    "DEFAULT_CONVERGENCE_TOL",
    "DEFAULT_MAX_ITERATIONS",
    "DEFAULT_SHOTS",
    "HammerScore",
    "HammrlError",
    "InvalidInputError",
    "NoiseModel",
    "NumericalDegeneracyError",
    "PointSpreadFunction",
    "PoissonBaselineConfig",
    "ProbDistribution",
    "RankChangeRecord",
    "StateGraph",
    "active_backend",
    "aggregate",
    "analytic_noisy_distribution",
    "available_backends",
    "build_state_graph",
    "compare_methods",
    "derive_circuit_seed",
    "enumerate_space",
    "evaluate_method",
    "from_counts",
    "generate_dataset",
    "hammer_mitigate",
    "hammer_scores",
    "hamming_distance",
    "neighbors_at_distance",
    "pack_bitstrings",
    "poisson_mitigate",
    "psf_weight",
    "rank_of",
    "richardson_lucy",
    "rl_single_iteration",
    "sample_counts",
    "score_circuit",
    "score_distance_bound",
    "secrets_with_ones",
    "set_backend",
    "total_variation_distance",
    "use_backend",
    "__version__",
]
