"""Cycle structure of generalized sums of Hamiltonian digraphs."""

from .builder import GenSum, OrientationMap, SummandSpec, build, cycles
from .digraph import Digraph, cycle_spectrum, is_pancyclic, is_strong, validate_cycle
from .errors import GensumError

__all__ = [
    "Digraph",
    "GenSum",
    "GensumError",
    "OrientationMap",
    "SummandSpec",
    "build",
    "cycle_spectrum",
    "cycles",
    "is_pancyclic",
    "is_strong",
    "validate_cycle",
]
