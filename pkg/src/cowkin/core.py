"""Geometry conventions, constants and value types shared by the engine.

Coordinates: ``x`` is horizontal along the interferometer axis, normal to
the slab surfaces; ``y`` is vertical, normal to the (horizontal) lattice
planes. Gravity points along ``-y``. Everything is SI: metres, seconds,
kilograms and reciprocal metres.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import BraggUnreachable, InvalidInput

TWO_PI = 2.0 * math.pi

HBAR = 1.054571817e-34  # J s
NEUTRON_MASS = 1.67492749804e-27  # kg
RB87_MASS = 1.443160648e-25  # kg
STANDARD_G = 9.81  # m s^-2

ANGSTROM = 1e-10
CENTIMETRE = 1e-2

SI220_D = 1.920e-10  # m, Si (220) plane spacing to the precision usually quoted


@dataclass(frozen=True)
class WaveVector2:
    """A 2D wave vector in reciprocal metres. ``ky < 0`` points downward."""

    kx: float
    ky: float

    def __post_init__(self):
        if not (math.isfinite(self.kx) and math.isfinite(self.ky)):
            raise InvalidInput(f"non-finite wave vector ({self.kx}, {self.ky})")

    def magnitude(self) -> float:
        return math.hypot(self.kx, self.ky)

    def angle_to_planes(self) -> float:
        """Unsigned angle between the beam and the horizontal lattice planes."""
        return math.atan2(abs(self.ky), self.kx)

    def wavelength(self) -> float:
        return TWO_PI / self.magnitude()

    def as_tuple(self) -> tuple[float, float]:
        return (self.kx, self.ky)


@dataclass(frozen=True)
class CrystalSlab:
    """A symmetric-Laue crystal slab with horizontal lattice planes.

    ``H`` is derived from the plane spacing ``d`` and cannot be passed in,
    so ``H == 2*pi/d`` holds for every instance.
    """

    d: float
    sigma_ky_rel: float = 5e-6
    H: float = field(init=False)

    def __post_init__(self):
        if not (self.d > 0 and math.isfinite(self.d)):
            raise InvalidInput(f"lattice spacing must be positive, got {self.d!r}")
        if not (self.sigma_ky_rel > 0 and math.isfinite(self.sigma_ky_rel)):
            raise InvalidInput(
                f"acceptance width must be positive, got {self.sigma_ky_rel!r}"
            )
        object.__setattr__(self, "H", TWO_PI / self.d)


class SpeciesKind(str, enum.Enum):
    NEUTRON = "neutron"
    ATOM = "atom"


@dataclass(frozen=True)
class ParticleSpecies:
    mass: float
    kind: SpeciesKind = SpeciesKind.NEUTRON
    label: str = "neutron"

    def __post_init__(self):
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise InvalidInput(f"mass must be positive, got {self.mass!r}")
        object.__setattr__(self, "kind", SpeciesKind(self.kind))


NEUTRON = ParticleSpecies(NEUTRON_MASS, SpeciesKind.NEUTRON, "neutron")
RB87 = ParticleSpecies(RB87_MASS, SpeciesKind.ATOM, "87Rb")


@dataclass(frozen=True)
class PhysicalConstants:
    """Planck's reduced constant and the magnitude of gravity (along -y)."""

    hbar: float = HBAR
    g: float = STANDARD_G

    def __post_init__(self):
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise InvalidInput(f"hbar must be positive, got {self.hbar!r}")
        if not (self.g >= 0 and math.isfinite(self.g)):
            raise InvalidInput(f"g must be non-negative, got {self.g!r}")


@dataclass(frozen=True)
class BeamState:
    k: WaveVector2
    species: ParticleSpecies = NEUTRON

    @property
    def theta(self) -> float:
        return self.k.angle_to_planes()


def bragg_angle(k_magnitude: float, slab: CrystalSlab) -> float:
    """Bragg angle for a beam of wavenumber ``k_magnitude`` on ``slab``.

    Solves ``k sin(theta_B) = H/2``. Raises :class:`BraggUnreachable` when
    the wavelength exceeds ``2d``.
    """
    if not (k_magnitude > 0 and math.isfinite(k_magnitude)):
        raise InvalidInput(f"wavenumber must be positive, got {k_magnitude!r}")
    half_h = 0.5 * slab.H
    if k_magnitude < half_h:
        raise BraggUnreachable(
            f"k = {k_magnitude:.6g} 1/m is below H/2 = {half_h:.6g} 1/m; "
            f"wavelength {TWO_PI / k_magnitude:.6g} m exceeds 2d = {2 * slab.d:.6g} m"
        )
    return math.asin(min(1.0, half_h / k_magnitude))


def wavevector_from_wavelength(wavelength: float, theta: float) -> WaveVector2:
    """Incident wave vector ``(k cos theta, -k sin theta)`` for ``k = 2 pi / wavelength``.

    The sign makes the beam descend onto the planes; ``theta`` is measured
    from the planes and must lie in ``(0, pi/2)``. ``theta = pi/2`` is
    accepted as the backscattering limit.
    """
    if not (wavelength > 0 and math.isfinite(wavelength)):
        raise InvalidInput(f"wavelength must be positive, got {wavelength!r}")
    if not (0.0 < theta <= 0.5 * math.pi):
        raise InvalidInput(f"theta must lie in (0, pi/2], got {theta!r}")
    k = TWO_PI / wavelength
    return WaveVector2(k * math.cos(theta), -k * math.sin(theta))


def bragg_incident(wavelength: float, slab: CrystalSlab) -> WaveVector2:
    """Downward beam that satisfies the Bragg condition of ``slab`` exactly.

    ``ky`` is set to ``-H/2`` bit-exactly and ``kx`` is completed from the
    wavenumber, so the splitter sees zero deviation even in floating point.
    """
    k = TWO_PI / wavelength
    bragg_angle(k, slab)  # reachability check
    half_h = 0.5 * slab.H
    kx = math.sqrt((k - half_h) * (k + half_h))
    if kx <= 0:
        raise BraggUnreachable("backscattering beam has no forward component")
    return WaveVector2(kx, -half_h)
