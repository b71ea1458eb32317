"""Algorithm registry: stable string names used by configs and the CLI."""

from ..core import ConfigurationError
from .base import Algorithm
from .mfea import MFEA, MOMFEA, mfea_step, mo_mfea_step, mo_select, scalar_fitness
from .multipop import DE, GA, MPEKT, de_generation, explicit_transfer, ga_generation, mp_ekt_step

ALGORITHMS = {cls.name: cls for cls in (MFEA, MOMFEA, MPEKT, GA, DE)}


def make_algorithm(name: str, **params) -> Algorithm:
    try:
        cls = ALGORITHMS[name]
    except KeyError:
        raise ConfigurationError(f"unknown algorithm {name!r}; known: {sorted(ALGORITHMS)}") from None
    return cls(**params)


__all__ = [
    "ALGORITHMS", "Algorithm", "make_algorithm", "MFEA", "MOMFEA", "MPEKT", "GA", "DE",
    "mfea_step", "mo_mfea_step", "mo_select", "scalar_fitness", "mp_ekt_step", "explicit_transfer",
    "ga_generation", "de_generation",
]
