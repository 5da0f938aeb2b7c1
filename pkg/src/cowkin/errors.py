"""Exception hierarchy.

Physics failures (anything raised while computing a trajectory) derive from
:class:`PhysicsError`; the CLI maps those to exit code 3 and
:class:`ConfigInvalid` to exit code 2.
"""


class CowkinError(Exception):
    """Base class for every error raised by this package."""


class ConfigInvalid(CowkinError):
    """A configuration value or document failed validation."""


class PhysicsError(CowkinError):
    """A kinematic operation has no physical solution for its inputs."""


class InvalidInput(PhysicsError, ValueError):
    pass


class BraggUnreachable(PhysicsError):
    """The wavelength is too long for the requested reflection (k < H/2)."""


class EvanescentBranch(PhysicsError):
    """The reflected wave would not propagate (k^2 <= k_Hy^2)."""


class DegenerateInput(PhysicsError, ValueError):
    """No Bragg order can be selected, e.g. a beam parallel to the planes."""


class OutOfRegime(PhysicsError):
    """A first-order formula was asked to work outside its validity range."""
