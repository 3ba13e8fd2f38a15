"""Dynamical Markov/Lagrange spectra and sublevel-set dimensions for
subshifts of finite type with Cantor-set geometry."""

__version__ = "0.1.0"

from .sft import (
    TransitionSet,
    BlockAlphabet,
    PeriodicPoint,
    JunctionError,
    GlueError,
    is_admissible,
    concat,
    transpose,
    enumerate_admissible,
    build_block_alphabet,
)
from .enclosure import Enclosure
from .geometry import CantorModel, classical_model, continuants, cylinder_interval, cylinder_size
from .potential import ClassicalPotential, TablePotential, CylinderWindow, window_bounds

__all__ = [
    "TransitionSet",
    "BlockAlphabet",
    "PeriodicPoint",
    "JunctionError",
    "GlueError",
    "is_admissible",
    "concat",
    "transpose",
    "enumerate_admissible",
    "build_block_alphabet",
    "Enclosure",
    "CantorModel",
    "classical_model",
    "continuants",
    "cylinder_interval",
    "cylinder_size",
    "ClassicalPotential",
    "TablePotential",
    "CylinderWindow",
    "window_bounds",
]
