"""Free flight between slabs under Newtonian gravity.

Gravity acts only between the crystals. The leg is parameterised by its
horizontal span ``l`` and the entry ``kx``: ``T = l m / (hbar kx)``; the
vertical wavenumber then drops by ``m g T / hbar``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ParticleSpecies, PhysicalConstants, WaveVector2
from .errors import InvalidInput


@dataclass(frozen=True)
class FlightLeg:
    k_in: WaveVector2
    k_out: WaveVector2
    span_x: float
    time: float
    dky_gravity: float
    dy: float  # vertical displacement, diagnostic only

    @property
    def dky_rel(self) -> float:
        return self.dky_gravity / self.k_in.ky


def gravity_kick(time: float, species: ParticleSpecies, constants: PhysicalConstants) -> float:
    """Signed change of ``ky`` after falling for ``time`` seconds (<= 0)."""
    return -(species.mass * constants.g / constants.hbar) * time


def fall_distance(
    ky: float, time: float, species: ParticleSpecies, constants: PhysicalConstants
) -> float:
    vy = constants.hbar * ky / species.mass
    return vy * time - 0.5 * constants.g * time * time


def flight_time(kx: float, span_x: float, species: ParticleSpecies, constants: PhysicalConstants) -> float:
    return span_x * species.mass / (constants.hbar * kx)


def propagate_timed(
    k: WaveVector2,
    time: float,
    species: ParticleSpecies,
    constants: PhysicalConstants,
    span_x: float | None = None,
) -> FlightLeg:
    """Fly for a prescribed ``time``; ``kx`` is untouched."""
    if not (time > 0 and math.isfinite(time)):
        raise InvalidInput(f"flight time must be positive, got {time!r}")
    dky = gravity_kick(time, species, constants)
    if span_x is None:
        span_x = constants.hbar * k.kx / species.mass * time
    return FlightLeg(
        k_in=k,
        k_out=WaveVector2(k.kx, k.ky + dky),
        span_x=span_x,
        time=time,
        dky_gravity=dky,
        dy=fall_distance(k.ky, time, species, constants),
    )


def propagate_leg(
    k: WaveVector2,
    span_x: float,
    species: ParticleSpecies,
    constants: PhysicalConstants,
) -> FlightLeg:
    """Carry ``k`` across a horizontal gap of ``span_x`` metres.

    The straight-leg approximation is used: the time comes from the entry
    ``kx`` alone and the sag of the parabola does not lengthen the path.
    """
    if not (span_x > 0 and math.isfinite(span_x)):
        raise InvalidInput(f"span must be positive, got {span_x!r}")
    if not k.kx > 0:
        raise InvalidInput(f"beam must propagate forward (kx > 0), got kx = {k.kx!r}")
    return propagate_timed(k, flight_time(k.kx, span_x, species, constants), species, constants, span_x)
