"""Metastable distributions of Markov chains with rare transitions."""

from .asymptotics import ZERO, AsymptoticOrder, compare_scale, evaluate, make, ratio_limit
from .chain_model import ChainSpec, TimeScale, instantiate_generator, repair_zero_rates, validate
from .estimator import MetastableChain
from .hierarchy import Hierarchy, build_hierarchy
from .metastable import MetastableDistribution, metastable_all, metastable_distribution
from .verify import TransientSolverConfig, compare, exact_stationary, simulate_paths, transient_distribution

__version__ = "0.1.0"

__all__ = [
    "ZERO",
    "AsymptoticOrder",
    "ChainSpec",
    "Hierarchy",
    "MetastableChain",
    "MetastableDistribution",
    "TimeScale",
    "TransientSolverConfig",
    "build_hierarchy",
    "compare",
    "compare_scale",
    "evaluate",
    "exact_stationary",
    "instantiate_generator",
    "make",
    "metastable_all",
    "metastable_distribution",
    "ratio_limit",
    "repair_zero_rates",
    "simulate_paths",
    "transient_distribution",
    "validate",
]
