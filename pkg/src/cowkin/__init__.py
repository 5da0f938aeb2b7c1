"""Exact wave-vector bookkeeping for Laue-crystal neutron interferometers and
light-pulse atom interferometers under Newtonian gravity."""

from .core import (
    NEUTRON,
    RB87,
    BeamState,
    CrystalSlab,
    ParticleSpecies,
    PhysicalConstants,
    SpeciesKind,
    WaveVector2,
    bragg_angle,
    bragg_incident,
    wavevector_from_wavelength,
)
from .errors import (
    BraggUnreachable,
    ConfigInvalid,
    CowkinError,
    DegenerateInput,
    EvanescentBranch,
    InvalidInput,
    OutOfRegime,
    PhysicsError,
)
from .flight import FlightLeg, propagate_leg, propagate_timed
from .laue import (
    LaueOutcome,
    acceptance_margin,
    delta_kx_exact,
    delta_kx_first_order,
    laue_reflect,
    reflect_angle_deviation,
)
from .loop import (
    AtomConfig,
    ComparisonReport,
    CowConfig,
    LoopMode,
    LoopResult,
    PathTrace,
    compare_modes,
    laser_mirror_reflect,
    run_atom_loop,
    run_cow_loop,
)

__version__ = "0.1.0"
