"""Run configuration: flat ``key = value`` files, presets and unit conversion.

Files use human units (Å, cm, degrees); :class:`RunConfig` holds SI values
only. Unknown keys are rejected. Omitted keys take the defaults in
:data:`SCHEMA`; the geometry needs ``geometry.lambda_angstrom`` or
``geometry.theta_deg`` (or both, if they agree with Bragg's law).
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass
from pathlib import Path

from .core import (
    ANGSTROM,
    CENTIMETRE,
    HBAR,
    NEUTRON_MASS,
    RB87_MASS,
    STANDARD_G,
    CrystalSlab,
    ParticleSpecies,
    PhysicalConstants,
    SpeciesKind,
)
from .errors import ConfigInvalid
from .loop import AtomConfig, CowConfig, LoopMode

PRESET_DIR_ENV = "COWKIN_PRESET_DIR"
BRAGG_CONSISTENCY = 1e-9

RB87_TWO_PHOTON_K = 4.0 * math.pi / 780.241e-9  # 1/m, counter-propagating D2 beams


@dataclass(frozen=True)
class Key:
    name: str
    kind: type
    default: object
    unit: str
    scale: float = 1.0  # file unit -> SI
    positive: bool = True

    @property
    def numeric(self) -> bool:
        return self.kind is float


SCHEMA: dict[str, Key] = {
    k.name: k
    for k in (
        Key("geometry.lambda_angstrom", float, None, "Å", ANGSTROM),
        Key("geometry.theta_deg", float, None, "deg", math.pi / 180.0),
        Key("crystal.d_angstrom", float, 1.920, "Å", ANGSTROM),
        Key("crystal.sigma_ky_rel", float, 5e-6, "1"),
        Key("setup.span_cm", float, 5.0, "cm", CENTIMETRE),
        Key("physics.g", float, STANDARD_G, "m/s^2", positive=False),
        Key("physics.hbar", float, HBAR, "J s"),
        Key("physics.mass_kg", float, NEUTRON_MASS, "kg"),
        Key("engine.mode", str, "exact", ""),
        Key("atom.k_transfer", float, RB87_TWO_PHOTON_K, "1/m"),
        Key("atom.span_time", float, 0.1, "s"),
        Key("atom.mass_kg", float, RB87_MASS, "kg"),
        Key("atom.lambda_dB_angstrom", float, 50.0, "Å", ANGSTROM),
    )
}

NUMERIC_KEYS = tuple(name for name, key in SCHEMA.items() if key.numeric)
GEOMETRY_KEYS = ("geometry.lambda_angstrom", "geometry.theta_deg")

BUILTIN_PRESETS = {
    # Si 220 at exactly 30 degrees; the wavelength follows (2 d sin 30° = d).
    "paper-2013": """\
geometry.theta_deg = 30
crystal.d_angstrom = 1.920
crystal.sigma_ky_rel = 5e-6
setup.span_cm = 5
physics.g = 9.81
engine.mode = exact
""",
    # Same crystal at a literal 1.9 Å; the Bragg angle comes out at 29.66°.
    "si220-1.9A": """\
geometry.lambda_angstrom = 1.9
crystal.d_angstrom = 1.920
setup.span_cm = 5
physics.g = 9.81
engine.mode = exact
""",
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration, SI throughout."""

    wavelength: float
    theta: float | None
    d: float
    sigma_ky_rel: float
    span_x: float
    g: float
    hbar: float
    mass: float
    mode: str
    atom_k_transfer: float
    atom_span_time: float
    atom_mass: float
    atom_wavelength: float

    def constants(self) -> PhysicalConstants:
        return PhysicalConstants(hbar=self.hbar, g=self.g)

    def cow_config(self) -> CowConfig:
        species = ParticleSpecies(self.mass, SpeciesKind.NEUTRON, "neutron")
        return CowConfig(
            wavelength=self.wavelength,
            slab=CrystalSlab(self.d, self.sigma_ky_rel),
            span_x=self.span_x,
            species=species,
            constants=self.constants(),
            mode=LoopMode(self.mode),
        )

    def atom_config(self) -> AtomConfig:
        return AtomConfig(
            wavelength=self.atom_wavelength,
            k_transfer=self.atom_k_transfer,
            span_time=self.atom_span_time,
            species=ParticleSpecies(self.atom_mass, SpeciesKind.ATOM, "atom"),
            constants=self.constants(),
        )

    def echo(self) -> dict:
        return asdict(self)


def parse_text(text: str, source: str = "<config>") -> dict[str, object]:
    """Parse ``key = value`` lines into typed values in file units."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigInvalid(f"{where}: expected 'key = value', got {raw.strip()!r}")
        name, _, value = (part.strip() for part in line.partition("="))
        key = SCHEMA.get(name)
        if key is None:
            raise ConfigInvalid(f"{where}: unknown key {name!r}")
        if name in values:
            raise ConfigInvalid(f"{where}: duplicate key {name!r}")
        values[name] = _convert(key, value, where)
    return values


def _convert(key: Key, text: str, where: str) -> object:
    if key.kind is str:
        if not text:
            raise ConfigInvalid(f"{where}: {key.name} is empty")
        return text
    try:
        value = float(text)
    except ValueError:
        raise ConfigInvalid(f"{where}: {key.name} = {text!r} is not a number") from None
    check_value(key, value, where)
    return value


def check_value(key: Key, value: float, where: str = "") -> None:
    prefix = f"{where}: " if where else ""
    if not math.isfinite(value):
        raise ConfigInvalid(f"{prefix}{key.name} must be finite")
    if key.positive and not value > 0:
        raise ConfigInvalid(f"{prefix}{key.name} must be positive, got {value!r}")
    if not key.positive and value < 0:
        raise ConfigInvalid(f"{prefix}{key.name} must be non-negative, got {value!r}")


def resolve(values: dict[str, object]) -> RunConfig:
    """Apply defaults, convert to SI and settle the geometry."""
    unknown = set(values) - set(SCHEMA)
    if unknown:
        raise ConfigInvalid(f"unknown key {sorted(unknown)[0]!r}")

    def si(name: str) -> float | None:
        raw = values.get(name, SCHEMA[name].default)
        return None if raw is None else float(raw) * SCHEMA[name].scale

    mode = str(values.get("engine.mode", SCHEMA["engine.mode"].default))
    if mode not in {m.value for m in LoopMode}:
        raise ConfigInvalid(f"engine.mode must be 'first_order' or 'exact', got {mode!r}")

    d = si("crystal.d_angstrom")
    wavelength = si("geometry.lambda_angstrom")
    theta = si("geometry.theta_deg")
    if theta is not None and not theta < 0.5 * math.pi:
        raise ConfigInvalid(f"geometry.theta_deg must be below 90, got {values['geometry.theta_deg']!r}")
    if wavelength is None and theta is None:
        raise ConfigInvalid("one of geometry.lambda_angstrom, geometry.theta_deg is required")
    if wavelength is None:
        wavelength = 2.0 * d * math.sin(theta)
    elif theta is not None:
        bragg = 2.0 * d * math.sin(theta)
        if abs(bragg - wavelength) > BRAGG_CONSISTENCY * wavelength:
            raise ConfigInvalid(
                "geometry.lambda_angstrom and geometry.theta_deg violate Bragg's law "
                f"for crystal.d_angstrom (2 d sin(theta) = {bragg / ANGSTROM:.6g} Å); "
                "give only one of them"
            )

    return RunConfig(
        wavelength=wavelength,
        theta=theta,
        d=d,
        sigma_ky_rel=si("crystal.sigma_ky_rel"),
        span_x=si("setup.span_cm"),
        g=si("physics.g"),
        hbar=si("physics.hbar"),
        mass=si("physics.mass_kg"),
        mode=mode,
        atom_k_transfer=si("atom.k_transfer"),
        atom_span_time=si("atom.span_time"),
        atom_mass=si("atom.mass_kg"),
        atom_wavelength=si("atom.lambda_dB_angstrom"),
    )


def with_override(values: dict[str, object], name: str, value: float) -> dict[str, object]:
    """Copy of ``values`` with one numeric key replaced.

    Setting one geometry key drops the other, so a sweep over wavelength or
    angle keeps the splitter at the Bragg condition.
    """
    key = SCHEMA.get(name)
    if key is None or not key.numeric:
        raise ConfigInvalid(f"{name!r} is not a numeric config key")
    check_value(key, value)
    out = dict(values)
    if name in GEOMETRY_KEYS:
        for other in GEOMETRY_KEYS:
            out.pop(other, None)
    out[name] = value
    return out


def preset_text(name: str) -> tuple[str, str]:
    if name in BUILTIN_PRESETS:
        return BUILTIN_PRESETS[name], f"<preset {name}>"
    extra = os.environ.get(PRESET_DIR_ENV)
    if extra:
        path = Path(extra) / f"{name}.cfg"
        if path.is_file():
            return path.read_text(encoding="utf-8"), str(path)
    raise ConfigInvalid(f"unknown preset {name!r}")


def load_values(path: str | os.PathLike | None = None, preset: str | None = None) -> dict[str, object]:
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc.strerror}") from None
        return parse_text(text, str(path))
    text, source = preset_text(preset or "paper-2013")
    return parse_text(text, source)


def load(path: str | os.PathLike | None = None, preset: str | None = None) -> RunConfig:
    return resolve(load_values(path, preset))
