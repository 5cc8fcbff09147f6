"""Exception hierarchy shared by every module.

The three intermediate bases map onto the CLI exit-code contract:
configuration problems exit 1, physically unrealizable requests exit 2,
numerical failures exit 3.
"""


class ToolkitError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(ToolkitError):
    """Invalid inputs, units, grids, or configuration (CLI exit 1)."""


class PhysicsError(ToolkitError):
    """Request that no control pulse / grid can realize (CLI exit 2)."""


class NumericsError(ToolkitError):
    """Numerical scheme cannot proceed at the requested resolution (CLI exit 3)."""


class InvalidParams(ConfigurationError):
    """Non-positive or otherwise inconsistent physical parameters."""


class UnitError(ConfigurationError):
    """Signal carries the wrong unit tag for the requested operation."""


class GridError(ConfigurationError):
    """Signals that must share a time grid do not."""


class DegenerateInput(ConfigurationError):
    """Zero signal where a nonzero one is required."""


class TruncationError(PhysicsError):
    """Wavepacket support does not fit the time grid."""


class UnrealizableWavepacket(PhysicsError):
    """Requested emission/absorption would drive |beta_s|^2 negative."""


class StiffnessError(NumericsError):
    """Required substep count exceeds the integrator budget."""


class PhaseSingular(NumericsError):
    """Phase integrand is significant where |beta_s|^2 is below the floor."""


class ConsistencyError(NumericsError):
    """Phase equation produced a non-negligible imaginary residue."""


class InconsistentAmplitudes(NumericsError):
    """beta_s varies while beta_e is identically zero."""


class ModeGridError(NumericsError):
    """Mode-resolved run longer than the discretized bath's recurrence time."""
