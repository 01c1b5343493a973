"""Maximum IR drop for square, triangular and hexagonal power-pad arrangements."""

from .dropformula import (
    BandKind,
    DropResult,
    constant_CH,
    constant_CM,
    constant_CY,
    sweep,
    u_epsilon,
    vmax,
)
from .lattice import Arrangement, LatticeKind, make_lattice

__version__ = "0.1.0"

__all__ = [
    "Arrangement",
    "BandKind",
    "DropResult",
    "LatticeKind",
    "constant_CH",
    "constant_CM",
    "constant_CY",
    "make_lattice",
    "sweep",
    "u_epsilon",
    "vmax",
]
