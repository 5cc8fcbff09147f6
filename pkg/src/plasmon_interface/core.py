"""Physical parameters, uniform time grids, and unit-tagged complex signals.

Everything downstream (wavepacket shaping, pulse synthesis, forward
simulation, network composition) is built on the three containers defined
here.  All types are immutable after construction and all operations are
pure, so they are safe to share across concurrent runs.

Units are SI throughout: the emitter-plasmon coupling g is in
m^(1/2) s^(-1), the group velocity c in m/s, and rates in s^(-1).  Field
envelopes carry m^(-1/2) so that c * integral |E|^2 dt is a photon number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridError, InvalidParams, UnitError

# Unit tags for ComplexSignal.
FIELD = "field"          # m^(-1/2): photon wavepacket envelopes E(t)
AMPLITUDE = "amplitude"  # dimensionless: state amplitudes beta_e, beta_s
RATE = "rate"            # s^(-1): control pulses Omega(t)

UNITS = frozenset({FIELD, AMPLITUDE, RATE})


@dataclass(frozen=True)
class PhysicalParams:
    """Emitter-plasmon coupling constants of one node.

    Parameters
    ----------
    g : float
        Emitter-plasmon coupling strength, m^(1/2) s^(-1).
    c : float
        Plasmon group velocity, m/s.
    gamma_prime : float
        Loss rate into non-plasmon channels, s^(-1).
    """

    g: float
    c: float
    gamma_prime: float

    def __post_init__(self):
        if not (self.g > 0 and self.c > 0 and self.gamma_prime > 0):
            raise InvalidParams(
                f"g, c, gamma_prime must all be positive, got "
                f"g={self.g}, c={self.c}, gamma_prime={self.gamma_prime}"
            )

    @property
    def gamma_p(self) -> float:
        """Spontaneous emission rate into the plasmon modes, 2*pi*g^2/c."""
        return 2.0 * math.pi * self.g**2 / self.c

    @property
    def purcell(self) -> float:
        """Purcell factor P = gamma_p / gamma_prime."""
        return self.gamma_p / self.gamma_prime

    @classmethod
    def from_purcell(cls, g: float, c: float, purcell: float) -> "PhysicalParams":
        """Build params from a target Purcell factor instead of gamma_prime."""
        if purcell <= 0:
            raise InvalidParams(f"purcell must be positive, got {purcell}")
        gamma_p = 2.0 * math.pi * g**2 / c
        return cls(g=g, c=c, gamma_prime=gamma_p / purcell)


def derive_rates(params: PhysicalParams) -> tuple[float, float]:
    """Return (gamma_p, purcell) for a parameter set."""
    return params.gamma_p, params.purcell


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid: samples t_start + i*dt for i in [0, n)."""

    t_start: float
    dt: float
    n: int

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidParams(f"dt must be positive, got {self.dt}")
        if self.n < 2:
            raise InvalidParams(f"need at least 2 samples, got n={self.n}")

    @property
    def t_end(self) -> float:
        return self.t_start + (self.n - 1) * self.dt

    @property
    def span(self) -> float:
        return (self.n - 1) * self.dt

    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n)

    @classmethod
    def centered(cls, center: float, half_span: float, n: int) -> "TimeGrid":
        """Grid of n samples covering [center - half_span, center + half_span]."""
        if n < 2:
            raise InvalidParams(f"need at least 2 samples, got n={n}")
        dt = 2.0 * half_span / (n - 1)
        return cls(t_start=center - half_span, dt=dt, n=n)


@dataclass(frozen=True)
class ComplexSignal:
    """Complex-valued function of time on a uniform grid, with a unit tag.

    Arithmetic is only defined between signals sharing both grid and unit;
    mixing units is an error rather than a silent conversion, because field
    envelopes (m^(-1/2)) and state amplitudes (dimensionless) differ by
    sqrt(2*pi)*g/c factors that are easy to drop.
    """

    grid: TimeGrid
    samples: np.ndarray
    unit: str

    def __post_init__(self):
        if self.unit not in UNITS:
            raise UnitError(f"unknown unit {self.unit!r}; expected one of {sorted(UNITS)}")
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.shape != (self.grid.n,):
            raise GridError(
                f"samples have shape {samples.shape}, grid expects ({self.grid.n},)"
            )
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @classmethod
    def zeros(cls, grid: TimeGrid, unit: str) -> "ComplexSignal":
        return cls(grid, np.zeros(grid.n, dtype=np.complex128), unit)

    def with_samples(self, samples: np.ndarray) -> "ComplexSignal":
        """New signal on the same grid with the same unit tag."""
        return ComplexSignal(self.grid, samples, self.unit)

    def scaled(self, factor: complex) -> "ComplexSignal":
        return self.with_samples(self.samples * factor)

    def __add__(self, other: "ComplexSignal") -> "ComplexSignal":
        _check_compatible(self, other)
        return self.with_samples(self.samples + other.samples)

    def __sub__(self, other: "ComplexSignal") -> "ComplexSignal":
        _check_compatible(self, other)
        return self.with_samples(self.samples - other.samples)

    def abs_max(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def to_dict(self) -> dict:
        """JSON-ready dict: {unit, t_start, dt, n, re, im}."""
        return {
            "unit": self.unit,
            "t_start": self.grid.t_start,
            "dt": self.grid.dt,
            "n": self.grid.n,
            "re": self.samples.real.tolist(),
            "im": self.samples.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ComplexSignal":
        try:
            grid = TimeGrid(float(data["t_start"]), float(data["dt"]), int(data["n"]))
            samples = np.asarray(data["re"], dtype=float) + 1j * np.asarray(
                data["im"], dtype=float
            )
            unit = data["unit"]
        except KeyError as exc:
            raise GridError(f"signal dict is missing key {exc}") from exc
        return cls(grid, samples, unit)


def _check_compatible(a: ComplexSignal, b: ComplexSignal) -> None:
    if a.grid != b.grid:
        raise GridError(f"grids differ: {a.grid} vs {b.grid}")
    if a.unit != b.unit:
        raise UnitError(f"units differ: {a.unit!r} vs {b.unit!r}")


def l2_photon_norm(sig: ComplexSignal, c: float) -> float:
    """Photon number carried by a field envelope: c * integral |E|^2 dt.

    Trapezoidal quadrature on the signal's own grid; raises UnitError for
    non-field signals.
    """
    if sig.unit != FIELD:
        raise UnitError(f"photon norm needs a field signal, got {sig.unit!r}")
    return float(c * np.trapezoid(np.abs(sig.samples) ** 2, dx=sig.grid.dt))


def overlap(a: ComplexSignal, b: ComplexSignal) -> complex:
    """Inner product integral conj(a)*b dt (trapezoid, shared grid and unit)."""
    _check_compatible(a, b)
    return complex(np.trapezoid(np.conj(a.samples) * b.samples, dx=a.grid.dt))


@dataclass(frozen=True)
class QubitAmplitudes:
    """Stationary-qubit coefficients (alpha_g, alpha_s), unit norm."""

    alpha_g: complex
    alpha_s: complex

    def __post_init__(self):
        norm = abs(self.alpha_g) ** 2 + abs(self.alpha_s) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise InvalidParams(f"|alpha_g|^2 + |alpha_s|^2 = {norm!r}, expected 1")

    @classmethod
    def normalized(cls, alpha_g: complex, alpha_s: complex) -> "QubitAmplitudes":
        """Normalize an arbitrary (alpha_g, alpha_s) pair to unit norm."""
        norm = math.sqrt(abs(alpha_g) ** 2 + abs(alpha_s) ** 2)
        if norm == 0.0:
            raise InvalidParams("qubit amplitudes cannot both be zero")
        return cls(complex(alpha_g) / norm, complex(alpha_s) / norm)
