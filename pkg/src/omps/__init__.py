"""Simulator for a driven optical cavity whose moving end mirror is an
array of weakly coupled micromirrors."""

__version__ = "0.1.0"

from .field import (  # noqa: F401
    Beam,
    DivergedError,
    Grid1D,
    PumpSchedule,
    Simulation,
    SimulationResult,
    initial_state,
    simulate,
)
from .lattice import LatticeState  # noqa: F401
from .model import (  # noqa: F401
    DerivedScales,
    HomogeneousState,
    NormalizedParams,
    PhysicalParams,
    derive_scales,
    hss_field,
    hss_intensities,
    linear_stability,
    normalize,
)
from .snapshots import Snapshot  # noqa: F401
