"""Exact-arithmetic experiments on planted and unplanted number partitioning."""

from .core import (
    BudgetError,
    DimensionError,
    Energy,
    Instance,
    Partition,
    hamiltonian,
    overlap,
)
from .sampler import PlantedSpec, EnsembleSpec, sample_planted, sample_unplanted
from .enumeration import full_scan, ball_min, extract_level_set, find_m_tuple

__all__ = [
    "BudgetError",
    "DimensionError",
    "Energy",
    "EnsembleSpec",
    "Instance",
    "Partition",
    "PlantedSpec",
    "ball_min",
    "extract_level_set",
    "find_m_tuple",
    "full_scan",
    "hamiltonian",
    "overlap",
    "sample_planted",
    "sample_unplanted",
]
