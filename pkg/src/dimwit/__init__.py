"""Certified lower bounds on Hilbert-space dimension from measurement statistics."""
from .bounds import (
    Assignment,
    BoundReport,
    CapacityResult,
    avg_recovery_prob,
    blahut_arimoto,
    capacity_bound,
    decoding_joint,
    dim_from_exponent,
    fano_bound,
    proto_bound,
)
from .core import (
    Channel,
    Distribution,
    JointDistribution,
    ProbabilityTable,
    binary_entropy,
    conditional_entropy,
    fano_penalty,
    mutual_information,
    shannon_entropy,
    validate_table,
)
from .games import (
    Game,
    ObservedStats,
    check_unique,
    game_dim_bound,
    induced_prior,
    merge_outcomes,
    string_encoding,
    winning_answer_map,
)
from .quantum import (
    CqEnsemble,
    DensityMatrix,
    Povm,
    QuantumModel,
    additivity_check,
    conditional_vn_entropy,
    guessing_probability,
    helstrom,
    lemma1_vn_chain_check,
    min_entropy,
    random_model,
    rank_entropy,
    smooth_min_entropy_upper,
    splitting_check,
    verify_model,
    von_neumann_entropy,
)
from .search import SearchConfig, search_bound

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "BoundReport",
    "CapacityResult",
    "avg_recovery_prob",
    "blahut_arimoto",
    "capacity_bound",
    "decoding_joint",
    "dim_from_exponent",
    "fano_bound",
    "proto_bound",
    "Channel",
    "Distribution",
    "JointDistribution",
    "ProbabilityTable",
    "binary_entropy",
    "conditional_entropy",
    "fano_penalty",
    "mutual_information",
    "shannon_entropy",
    "validate_table",
    "Game",
    "ObservedStats",
    "check_unique",
    "game_dim_bound",
    "induced_prior",
    "merge_outcomes",
    "string_encoding",
    "winning_answer_map",
    "CqEnsemble",
    "DensityMatrix",
    "Povm",
    "QuantumModel",
    "additivity_check",
    "conditional_vn_entropy",
    "guessing_probability",
    "helstrom",
    "lemma1_vn_chain_check",
    "min_entropy",
    "random_model",
    "rank_entropy",
    "smooth_min_entropy_upper",
    "splitting_check",
    "verify_model",
    "von_neumann_entropy",
    "SearchConfig",
    "search_bound",
]
