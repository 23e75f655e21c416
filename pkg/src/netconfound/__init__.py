"""netconfound: a desk-scale lab for homophily/contagion confounding on networks.

Generators for trait-driven networks, outcome dynamics with and without
social influence, the regression machinery those experiments misuse on
purpose, d-separation checks for the underlying causal graphs, and seeded
Monte Carlo harnesses tying it all together.
"""

__version__ = "0.1.0"

from .causal_dag import CausalDag, build_template, check_admissible, format_path
from .dynamics import OutcomePanel, contagion_panel, latent_trend_panel, voter_init, voter_run
from .inference import (
    ASYMMETRY_COLUMNS,
    ContrastResult,
    DesignMatrix,
    InsufficientDataError,
    RegressionFit,
    SingularDesignError,
    build_asymmetry_design,
    contrast,
    logistic_irls,
    ols,
)
from .network import ReciprocityPartition, SocialNetwork, read_edge_list, write_edge_list
from .experiments import (
    AsymmetryConfig,
    AsymmetrySummary,
    HalvesConfig,
    HalvesResult,
    VoterConfig,
    VoterSummary,
    halves_design,
    replication_rng,
    run_asymmetry_experiment,
    run_halves_experiment,
    run_halves_test,
    run_voter_experiment,
    spurious_coefficient,
)
from .population import (
    TraitAssignment,
    matched_control_network,
    nomination_network,
    nomination_weight,
    planted_partition_network,
    pool_edge_probability,
    sample_latent_uniform,
    uniform_nomination_network,
    with_observed_noisy_copy,
)

__all__ = [
    "__version__",
    "SocialNetwork",
    "ReciprocityPartition",
    "read_edge_list",
    "write_edge_list",
    "TraitAssignment",
    "sample_latent_uniform",
    "with_observed_noisy_copy",
    "pool_edge_probability",
    "nomination_weight",
    "nomination_network",
    "uniform_nomination_network",
    "planted_partition_network",
    "matched_control_network",
    "OutcomePanel",
    "latent_trend_panel",
    "voter_init",
    "voter_run",
    "contagion_panel",
    "DesignMatrix",
    "RegressionFit",
    "ContrastResult",
    "SingularDesignError",
    "InsufficientDataError",
    "ols",
    "contrast",
    "logistic_irls",
    "build_asymmetry_design",
    "ASYMMETRY_COLUMNS",
    "CausalDag",
    "build_template",
    "check_admissible",
    "format_path",
    "AsymmetryConfig",
    "AsymmetrySummary",
    "VoterConfig",
    "VoterSummary",
    "HalvesConfig",
    "HalvesResult",
    "run_asymmetry_experiment",
    "run_voter_experiment",
    "run_halves_test",
    "run_halves_experiment",
    "halves_design",
    "spurious_coefficient",
    "replication_rng",
]
