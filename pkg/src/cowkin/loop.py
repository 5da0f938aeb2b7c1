"""Whole-loop bookkeeping for the three-slab neutron interferometer and its
laser-pulse atom analogue.

Each path keeps its wave-vector components as lists of increments (incident
value, +-H at slabs, gravity kicks, kx changes) and evaluates them with
``math.fsum``. The two paths share most increments exactly, so the exit
comparison at the 1e-13 level is not buried in the rounding of ~1e10 1/m
running sums, and loops that close in exact arithmetic close bit-exactly.

Path labels: ``upper`` is the beam reflected at the splitter, ``lower`` the
transmitted one. Exit port A collects the upper beam reflected by the
analyzer and the lower beam transmitted through it; ``k_final`` and the
closure diagnostics refer to port A.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Union

from .core import (
    NEUTRON,
    RB87,
    TWO_PI,
    CrystalSlab,
    ParticleSpecies,
    PhysicalConstants,
    WaveVector2,
    bragg_angle,
    bragg_incident,
)
from .errors import ConfigInvalid
from .flight import FlightLeg, flight_time, propagate_leg, propagate_timed
from .laue import acceptance_margin, delta_kx_first_order, laue_reflect

SLAB_NAMES = ("splitter", "mirror", "analyzer")


class LoopMode(str, enum.Enum):
    FIRST_ORDER = "first_order"
    EXACT = "exact"


@dataclass(frozen=True)
class CowConfig:
    wavelength: float
    slab: CrystalSlab
    span_x: float
    species: ParticleSpecies = NEUTRON
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    mode: LoopMode = LoopMode.EXACT

    def __post_init__(self):
        if not (self.wavelength > 0 and math.isfinite(self.wavelength)):
            raise ConfigInvalid(f"wavelength must be positive, got {self.wavelength!r}")
        if not (self.span_x > 0 and math.isfinite(self.span_x)):
            raise ConfigInvalid(f"slab spacing must be positive, got {self.span_x!r}")
        try:
            object.__setattr__(self, "mode", LoopMode(self.mode))
        except ValueError:
            raise ConfigInvalid(f"unknown mode {self.mode!r}") from None


@dataclass(frozen=True)
class AtomConfig:
    wavelength: float  # initial de Broglie wavelength, beam horizontal
    k_transfer: float
    span_time: float
    species: ParticleSpecies = RB87
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        for name in ("wavelength", "k_transfer", "span_time"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ConfigInvalid(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class SlabEvent:
    """One crystal or laser-pulse interaction on a path."""

    element: str
    action: str  # "reflect", "transmit" or "kick"
    k_in: WaveVector2
    k_out: WaveVector2
    delta_kx: float = 0.0
    bragg_deviation: float = 0.0
    margin: float | None = None


Event = Union[SlabEvent, FlightLeg]


@dataclass(frozen=True)
class PathTrace:
    name: str
    events: tuple[Event, ...]
    k_final: WaveVector2
    k_other: WaveVector2  # the beam leaving through the other exit port
    total_time: float
    legs: tuple[FlightLeg, FlightLeg]
    kx_terms: tuple[float, ...]
    ky_terms: tuple[float, ...]
    dy_terms: tuple[float, ...]

    @property
    def slab_events(self) -> tuple[SlabEvent, ...]:
        return tuple(e for e in self.events if isinstance(e, SlabEvent))

    @property
    def fall_distance(self) -> float:
        return math.fsum(self.dy_terms)


@dataclass(frozen=True)
class LoopResult:
    kind: str  # "cow" or "atom"
    mode: LoopMode
    path_upper: PathTrace
    path_lower: PathTrace
    ky_ref: float
    theta_B: float
    flight_time: float  # T, the first leg
    dky_per_leg_rel: float
    dkx_rel: float
    defocus_rel: tuple[float, float]  # (upper, lower)
    t3_path: str
    closure_rel: float
    closure_kx_rel: float
    time_mismatch: float  # T3 - T4
    acceptance_margins: tuple[float, ...]

    @property
    def paths(self) -> tuple[PathTrace, PathTrace]:
        return (self.path_upper, self.path_lower)

    @property
    def t4_path(self) -> str:
        return "lower" if self.t3_path == "upper" else "upper"

    @property
    def defocus_t3_rel(self) -> float:
        return self.defocus_rel[0 if self.t3_path == "upper" else 1]

    @property
    def defocus_t4_rel(self) -> float:
        return self.defocus_rel[1 if self.t3_path == "upper" else 0]

    @property
    def acceptance_margin(self) -> float:
        """Margin at the mirror slab (0 for the atom loop)."""
        return self.acceptance_margins[1] if self.acceptance_margins else 0.0

    @property
    def fall_distance(self) -> float:
        return 0.5 * (self.path_upper.fall_distance + self.path_lower.fall_distance)


class _Beam:
    """Mutable accumulator for one path; only used while building a trace."""

    def __init__(self, name: str, k0: WaveVector2):
        self.name = name
        self.kx_terms = [k0.kx]
        self.ky_terms = [k0.ky]
        self.kicks: list[float] = []
        self.dy_terms: list[float] = []
        self.events: list[Event] = []
        self.legs: list[FlightLeg] = []

    @property
    def k(self) -> WaveVector2:
        return WaveVector2(math.fsum(self.kx_terms), math.fsum(self.ky_terms))

    def fly(self, leg: FlightLeg, species: ParticleSpecies, constants: PhysicalConstants):
        # vertical displacement split per ky increment, so opposite recoils
        # on the two halves of a path cancel exactly in the sum
        scale = constants.hbar / species.mass * leg.time
        self.dy_terms.extend(scale * t for t in self.ky_terms)
        self.dy_terms.append(-0.5 * constants.g * leg.time * leg.time)
        self.ky_terms.append(leg.dky_gravity)
        self.kicks.append(leg.dky_gravity)
        self.events.append(leg)
        self.legs.append(leg)

    def finish(self, k_final: WaveVector2, k_other: WaveVector2) -> PathTrace:
        return PathTrace(
            name=self.name,
            events=tuple(self.events),
            k_final=k_final,
            k_other=k_other,
            total_time=math.fsum(leg.time for leg in self.legs),
            legs=(self.legs[0], self.legs[1]),
            kx_terms=tuple(self.kx_terms),
            ky_terms=tuple(self.ky_terms),
            dy_terms=tuple(self.dy_terms),
        )


def _crystal_step(
    beam: _Beam, element: str, reflect: bool, config: CowConfig, kx_ref: float
) -> WaveVector2:
    """Apply one slab to ``beam``. Returns the beam the path does *not* follow."""
    slab = config.slab
    k_in = beam.k
    outcome = laue_reflect(k_in, slab)
    if config.mode is LoopMode.EXACT:
        dkx = outcome.delta_kx
        deviation = outcome.delta_ky_in
    else:
        # Deviation from the Bragg component is exactly the kick sum, since
        # the splitter beam is Bragg-exact and slabs pass deviations through.
        deviation = math.fsum(beam.kicks)
        dkx = delta_kx_first_order(kx_ref, deviation, 2.0 * outcome.bragg_ky)
    margin = acceptance_margin(deviation, outcome.bragg_ky, slab)
    order_h = outcome.order * slab.H

    reflected = WaveVector2(
        math.fsum(beam.kx_terms + [dkx]), math.fsum(beam.ky_terms + [order_h])
    )
    if reflect:
        beam.kx_terms.append(dkx)
        beam.ky_terms.append(order_h)
        k_out, other = reflected, k_in
    else:
        k_out, other = k_in, reflected
    beam.events.append(
        SlabEvent(
            element=element,
            action="reflect" if reflect else "transmit",
            k_in=k_in,
            k_out=k_out,
            delta_kx=dkx if reflect else 0.0,
            bragg_deviation=deviation,
            margin=margin,
        )
    )
    return other


def _cow_leg(beam: _Beam, config: CowConfig, t_ref: float) -> None:
    if config.mode is LoopMode.EXACT:
        leg = propagate_leg(beam.k, config.span_x, config.species, config.constants)
    else:
        leg = propagate_timed(beam.k, t_ref, config.species, config.constants, config.span_x)
    beam.fly(leg, config.species, config.constants)


def _summarise(
    kind: str,
    mode: LoopMode,
    upper: PathTrace,
    lower: PathTrace,
    ky_ref: float,
    kx_ref: float,
    theta_B: float,
    margins: tuple[float, ...],
) -> LoopResult:
    t_ref = upper.legs[0].time
    defocus = tuple((p.legs[1].time - p.legs[0].time) / p.legs[0].time for p in (upper, lower))

    mirror_dkx = []
    for p in (upper, lower):
        mirror = p.slab_events[1]
        mirror_dkx.append(mirror.delta_kx)
    # T3 belongs to the path slowed down at the mirror
    t3_path = "lower" if mirror_dkx[1] < mirror_dkx[0] else "upper"
    t3, t4 = (
        (upper.legs[1].time, lower.legs[1].time)
        if t3_path == "upper"
        else (lower.legs[1].time, upper.legs[1].time)
    )

    ky_split = math.fsum(list(upper.ky_terms) + [-t for t in lower.ky_terms])
    kx_split = math.fsum(list(upper.kx_terms) + [-t for t in lower.kx_terms])

    return LoopResult(
        kind=kind,
        mode=mode,
        path_upper=upper,
        path_lower=lower,
        ky_ref=ky_ref,
        theta_B=theta_B,
        flight_time=t_ref,
        dky_per_leg_rel=upper.legs[0].dky_gravity / ky_ref,
        dkx_rel=0.5 * (abs(mirror_dkx[0]) + abs(mirror_dkx[1])) / kx_ref,
        defocus_rel=defocus,
        t3_path=t3_path,
        closure_rel=ky_split / ky_ref,
        closure_kx_rel=kx_split / kx_ref,
        time_mismatch=t3 - t4,
        acceptance_margins=margins,
    )


def run_cow_loop(config: CowConfig) -> LoopResult:
    """Trace both paths of the splitter-mirror-analyzer neutron loop.

    The incident beam meets the splitter exactly at the Bragg condition.
    Gravity detunes the mirror and analyzer, so their reflections shift
    ``kx``. In exact mode every leg's time comes from that leg's own
    ``kx``; in first-order mode every leg reuses the splitter time and the
    slab ``kx`` shifts are linearised about the splitter ``kx``.
    """
    slab = config.slab
    k0 = bragg_incident(config.wavelength, slab)
    theta_B = bragg_angle(TWO_PI / config.wavelength, slab)
    t_ref = flight_time(k0.kx, config.span_x, config.species, config.constants)

    traces = []
    margins = {name: [] for name in SLAB_NAMES}
    for name, reflect_first in (("upper", True), ("lower", False)):
        beam = _Beam(name, k0)
        _crystal_step(beam, "splitter", reflect_first, config, k0.kx)
        _cow_leg(beam, config, t_ref)
        _crystal_step(beam, "mirror", True, config, k0.kx)
        _cow_leg(beam, config, t_ref)
        # port A: upper reflected, lower transmitted
        other = _crystal_step(beam, "analyzer", reflect_first, config, k0.kx)
        traces.append(beam.finish(beam.k, other))
        for event in beam.events:
            if isinstance(event, SlabEvent):
                margins[event.element].append(event.margin)

    return _summarise(
        "cow",
        config.mode,
        traces[0],
        traces[1],
        ky_ref=k0.ky,
        kx_ref=k0.kx,
        theta_B=theta_B,
        margins=tuple(max(margins[name]) for name in SLAB_NAMES),
    )


def laser_mirror_reflect(k: WaveVector2, k_transfer: float, direction: int) -> WaveVector2:
    """Photon-recoil kick along the (vertical) laser axis.

    Only ``ky`` changes; ``kx`` is untouched and ``|k|`` is generally not
    conserved: ``|k'|^2 - |k|^2 = 2 q ky + q^2`` with ``q = direction * k_transfer``.
    """
    return WaveVector2(k.kx, k.ky + direction * k_transfer)


def _pulse(beam: _Beam, element: str, k_transfer: float, direction: int) -> WaveVector2:
    k_in = beam.k
    kick = direction * k_transfer
    beam.ky_terms.append(kick)
    k_out = WaveVector2(k_in.kx, math.fsum(beam.ky_terms))
    beam.events.append(SlabEvent(element=element, action="kick", k_in=k_in, k_out=k_out))
    return k_out


def run_atom_loop(config: AtomConfig) -> LoopResult:
    """Three-pulse light-pulse loop with the same bookkeeping as the neutron loop.

    Splitter pulses give the paths ``+-k_transfer/2``, the mirror reverses
    them with ``-+k_transfer`` and the recombiner adds ``+-k_transfer/2``
    again. Legs last ``span_time`` each. Vertical quantities are normalised
    by ``-k_transfer/2``, the analogue of the neutron's ``-H/2``.
    """
    species, constants = config.species, config.constants
    k0 = WaveVector2(TWO_PI / config.wavelength, 0.0)
    half = 0.5 * config.k_transfer

    traces = []
    for name, sign in (("upper", 1), ("lower", -1)):
        beam = _Beam(name, k0)
        _pulse(beam, "splitter", half, sign)
        beam.fly(propagate_timed(beam.k, config.span_time, species, constants), species, constants)
        _pulse(beam, "mirror", config.k_transfer, -sign)
        beam.fly(propagate_timed(beam.k, config.span_time, species, constants), species, constants)
        before = beam.k
        k_final = _pulse(beam, "recombiner", half, sign)
        traces.append(beam.finish(k_final, before))

    return _summarise(
        "atom",
        LoopMode.EXACT,
        traces[0],
        traces[1],
        ky_ref=-half,
        kx_ref=k0.kx,
        theta_B=0.0,
        margins=(),
    )


@dataclass(frozen=True)
class ComparisonReport:
    neutron: LoopResult  # exact mode
    neutron_first_order: LoopResult
    atom: LoopResult
    first_order_equivalent: bool

    RESIDUALS = ("dkx_rel", "defocus_t3_rel", "defocus_t4_rel", "closure_rel", "closure_kx_rel")

    @staticmethod
    def residuals_of(result: LoopResult) -> dict[str, float]:
        return {name: getattr(result, name) for name in ComparisonReport.RESIDUALS}

    @property
    def neutron_residuals(self) -> dict[str, float]:
        return self.residuals_of(self.neutron)

    @property
    def atom_residuals(self) -> dict[str, float]:
        return self.residuals_of(self.atom)


def _closes(result: LoopResult) -> bool:
    return result.path_upper.k_final == result.path_lower.k_final


def compare_modes(cow: CowConfig, atom: AtomConfig) -> ComparisonReport:
    """Run both interferometers side by side.

    The neutron loop is run twice: first-order mode decides the lowest-order
    equivalence (both loops close), exact mode supplies the higher-order
    residuals that only the neutron shows. ``cow.mode`` is ignored.
    """
    exact = run_cow_loop(_with_mode(cow, LoopMode.EXACT))
    linear = run_cow_loop(_with_mode(cow, LoopMode.FIRST_ORDER))
    atom_result = run_atom_loop(atom)
    return ComparisonReport(
        neutron=exact,
        neutron_first_order=linear,
        atom=atom_result,
        first_order_equivalent=_closes(linear) and _closes(atom_result),
    )


def _with_mode(config: CowConfig, mode: LoopMode) -> CowConfig:
    return replace(config, mode=mode)
