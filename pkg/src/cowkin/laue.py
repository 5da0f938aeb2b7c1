"""Symmetric Laue-case kinematics: exact reflection and first-order forms.

Inside the slab only ``ky`` (normal to the planes) can change, and only by
one reciprocal lattice vector; ``ky`` is also tangential to the slab
surfaces and so survives entry and exit. ``kx`` then follows from energy
conservation. Near the Bragg condition the ``kx`` change is ~7 orders of
magnitude smaller than ``kx`` itself, so every difference here is taken in
rationalised form rather than as ``sqrt(...) - kx``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import CrystalSlab, WaveVector2
from .errors import DegenerateInput, EvanescentBranch, InvalidInput, OutOfRegime

SPECULAR_TOL = 1e-9  # in units of H
FIRST_ORDER_LIMIT = 1e-3


@dataclass(frozen=True)
class LaueOutcome:
    reflected: WaveVector2
    transmitted: WaveVector2
    delta_kx: float
    delta_ky_in: float
    specular: bool
    order: int  # s in k_Hy = ky + s*H
    bragg_ky: float  # Bragg-exact ky the deviation is measured from


def laue_reflect(k: WaveVector2, slab: CrystalSlab) -> LaueOutcome:
    """Reflect ``k`` off the lattice planes of ``slab`` (symmetric Laue case).

    The reflection order is ``s = -sign(ky)`` so the vertical propagation
    is always reversed: a descending beam gains ``+H`` and an ascending one
    ``-H``. Any deviation from the Bragg component ``sign(ky) H/2`` passes
    through unchanged; the horizontal component absorbs the energy balance.
    The transmitted (forward-diffracted) beam is the input itself.
    """
    if not k.kx > 0:
        raise InvalidInput(f"beam must propagate forward (kx > 0), got kx = {k.kx!r}")
    if k.ky == 0:
        raise DegenerateInput("ky = 0: beam parallel to the planes, no Bragg order")
    sign = 1.0 if k.ky > 0 else -1.0
    order = -int(sign)
    H = slab.H
    bragg_ky = sign * 0.5 * H
    deviation = k.ky - bragg_ky
    k_hy = k.ky + order * H

    # kHx^2 - kx^2 = ky^2 - kHy^2 = 4 * bragg_ky * deviation
    gain = 2.0 * sign * H * deviation
    radicand = k.kx * k.kx + gain
    if not radicand > 0:
        raise EvanescentBranch(
            f"reflected wave is evanescent: kx^2 + 4 k_By dky = {radicand:.6g} 1/m^2"
        )
    k_hx = math.sqrt(radicand)
    delta_kx = gain / (k_hx + k.kx)

    return LaueOutcome(
        reflected=WaveVector2(k_hx, k_hy),
        transmitted=k,
        delta_kx=delta_kx,
        delta_ky_in=deviation,
        specular=abs(deviation) <= SPECULAR_TOL * H,
        order=order,
        bragg_ky=bragg_ky,
    )


def reflect_angle_deviation(theta_B: float, delta_theta: float) -> float:
    """First-order exit angle for an incident angle ``theta_B + delta_theta`` at fixed |k|.

    Angles are moduli of the angle to the planes, so the deviation flips.
    """
    if not abs(delta_theta) < FIRST_ORDER_LIMIT:
        raise OutOfRegime(
            f"|delta_theta| = {abs(delta_theta):.3g} rad is outside the first-order "
            f"regime (< {FIRST_ORDER_LIMIT:g} rad)"
        )
    return theta_B - delta_theta


def delta_kx_exact(kx: float, delta_ky: float, H: float) -> float:
    """Exact ``kx`` change for a Bragg deviation ``delta_ky`` at fixed ``kx``.

    Equals ``kx * (sqrt(1 + 2 delta_ky H / kx^2) - 1)``. ``H`` is signed:
    pass ``2 * k_By``, i.e. ``+H`` for an ascending Bragg component and
    ``-H`` for a descending one.
    """
    gain = 2.0 * delta_ky * H
    radicand = kx * kx + gain
    if not radicand > 0:
        raise EvanescentBranch(f"radicand 1 + 2 dky H / kx^2 is non-positive ({radicand:.6g})")
    return gain / (math.sqrt(radicand) + kx)


def delta_kx_first_order(kx: float, delta_ky: float, H: float) -> float:
    """Linearised ``kx`` change ``delta_ky * H / kx`` (``H`` signed as above)."""
    u = 2.0 * delta_ky * H / (kx * kx)
    if not abs(u) < FIRST_ORDER_LIMIT:
        raise OutOfRegime(f"|2 dky H / kx^2| = {abs(u):.3g} exceeds {FIRST_ORDER_LIMIT:g}")
    return delta_ky * H / kx


def acceptance_margin(delta_ky: float, ky: float, slab: CrystalSlab) -> float:
    """Bragg deviation in units of the crystal's relative acceptance width.

    Values well below 1 mean the beam is still reflected. No intensity model.
    """
    if ky == 0:
        raise DegenerateInput("ky = 0: relative deviation undefined")
    return abs(delta_ky / ky) / slab.sigma_ky_rel
