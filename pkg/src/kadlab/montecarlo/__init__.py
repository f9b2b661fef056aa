"""Samplers, experiment drivers and exact oracles for checking routing-time bounds."""

from .config import ExperimentConfig, config_from_mapping, load_config
from .dominance import DominanceReport, dominance_test, subtree_dominance, tail_comparison
from .experiment import ExperimentResult, run_experiment
from .ids import generate_ids
from .oracle import brute_force_t_distribution, total_variation
from .samplers import sample_beta_min, sample_g1, sample_t_n, sample_w

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "DominanceReport",
    "brute_force_t_distribution",
    "config_from_mapping",
    "dominance_test",
    "generate_ids",
    "load_config",
    "run_experiment",
    "sample_beta_min",
    "sample_g1",
    "sample_t_n",
    "sample_w",
    "subtree_dominance",
    "tail_comparison",
    "total_variation",
]
