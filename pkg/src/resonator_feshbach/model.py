"""Parameter space, band structure and energy/wavenumber conversions.

Conventions used everywhere in the package:

- Each array is a uniform tight-binding chain with on-site energy ``omega`` and
  hopping ``-hopping`` between neighbours, so a plane wave ``exp(ikj)`` has
  ``E = omega - 2*hopping*cos(k)``.
- Localized profiles are written ``C * exp(-1j*kappa*|j|)`` with
  ``kappa = real_part - 1j*decay_part``; ``decay_part > 0`` means the amplitude
  falls off as ``exp(-decay_part*|j|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class ArrayParams:
    omega: float
    hopping: float
    coupling: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.omega):
            raise ValueError(f"omega must be finite, got {self.omega!r}")
        if not (math.isfinite(self.hopping) and self.hopping > 0):
            raise ValueError(f"hopping must be > 0, got {self.hopping!r}")
        if not (math.isfinite(self.coupling) and self.coupling >= 0):
            raise ValueError(f"coupling must be >= 0, got {self.coupling!r}")


@dataclass(frozen=True)
class SystemParams:
    """Two arrays (A carries the incident photon, B is the dual arm) joined at
    site 0 through a controller level ``controller_level``."""

    arm_a: ArrayParams
    arm_b: ArrayParams
    controller_level: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.controller_level):
            raise ValueError("controller_level must be finite")

    def arm(self, label: str) -> ArrayParams:
        if label == "A":
            return self.arm_a
        if label == "B":
            return self.arm_b
        raise ValueError(f"arm label must be 'A' or 'B', got {label!r}")

    def swapped(self) -> SystemParams:
        """Same physical system with the roles of the two arrays exchanged."""
        return SystemParams(self.arm_b, self.arm_a, self.controller_level)

    def with_value(self, path: str, value: float) -> SystemParams:
        """Return a copy with one parameter replaced.

        ``path`` is ``"controller_level"`` or ``"arm_a.<field>"`` /
        ``"arm_b.<field>"`` with field one of omega, hopping, coupling.
        """
        if path == "controller_level":
            return replace(self, controller_level=float(value))
        head, _, field = path.partition(".")
        if head not in ("arm_a", "arm_b") or field not in ("omega", "hopping", "coupling"):
            raise ValueError(f"unknown parameter path {path!r}")
        arm = replace(getattr(self, head), **{field: float(value)})
        return replace(self, **{head: arm})

    def value(self, path: str) -> float:
        if path == "controller_level":
            return self.controller_level
        head, _, field = path.partition(".")
        if head not in ("arm_a", "arm_b") or field not in ("omega", "hopping", "coupling"):
            raise ValueError(f"unknown parameter path {path!r}")
        return getattr(getattr(self, head), field)


class NoOpenChannelError(ValueError):
    """Energy outside the injection arm's band: nothing propagates."""


class BandEdgeError(NoOpenChannelError):
    """Energy sits exactly on a band edge (zero group velocity)."""


class PoleError(ZeroDivisionError):
    """Evaluation exactly at the controller level, where the effective barrier diverges."""


PARAMETER_PATHS = (
    "arm_a.omega",
    "arm_a.hopping",
    "arm_a.coupling",
    "arm_b.omega",
    "arm_b.hopping",
    "arm_b.coupling",
    "controller_level",
)


@dataclass(frozen=True)
class Band:
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise ValueError(f"band needs lower < upper, got [{self.lower}, {self.upper}]")

    def contains(self, energy: float) -> bool:
        """Strict interior membership (open channel)."""
        return self.lower < energy < self.upper

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class ComplexWavenumber:
    real_part: float
    decay_part: float = 0.0
    at_edge: bool = False

    @property
    def value(self) -> complex:
        return complex(self.real_part, -self.decay_part)

    def amplitude(self, j: int | np.ndarray) -> complex | np.ndarray:
        """``exp(-1j*kappa*|j|)``."""
        return np.exp(-1j * self.value * np.abs(j))


def band_edges(arm: ArrayParams) -> Band:
    return Band(arm.omega - 2.0 * arm.hopping, arm.omega + 2.0 * arm.hopping)


def dispersion_energy(arm: ArrayParams, k: float) -> float:
    if not 0.0 <= k <= math.pi:
        raise ValueError(f"wavenumber must lie in [0, pi], got {k!r}")
    return arm.omega - 2.0 * arm.hopping * math.cos(k)


def group_velocity(arm: ArrayParams, k: float) -> float:
    """dE/dk in sites per unit time."""
    return 2.0 * arm.hopping * math.sin(k)


def wavenumber_from_energy(arm: ArrayParams, energy: float) -> ComplexWavenumber:
    """Invert ``cos(kappa) = (omega - E) / (2J)``.

    In-band energies give a real wavenumber in (0, pi).  Outside the band the
    decaying root is returned: ``real_part`` is 0 below the band and pi above,
    ``decay_part = arccosh(|omega - E| / 2J) > 0``.  Energies exactly on an edge
    come back with ``decay_part = 0`` and ``at_edge=True``.
    """
    band = band_edges(arm)
    x = (arm.omega - energy) / (2.0 * arm.hopping)
    if energy == band.lower or x == 1.0:
        return ComplexWavenumber(0.0, 0.0, at_edge=True)
    if energy == band.upper or x == -1.0:
        return ComplexWavenumber(math.pi, 0.0, at_edge=True)
    if -1.0 < x < 1.0:
        return ComplexWavenumber(math.acos(x), 0.0)
    return ComplexWavenumber(0.0 if x > 1.0 else math.pi, math.acosh(abs(x)))
