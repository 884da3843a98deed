"""Reflection spectra over energy grids and one-parameter families."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from .analytic import OUTGOING, _transmission_values, find_resonances
from .model import PARAMETER_PATHS, Band, SystemParams, band_edges

REFINE_POINTS = 64
REFINE_HALF_SPAN = 5.0
POLE_TOL = 1e-9
FWHM_TOL = 1e-10


@dataclass(frozen=True)
class EnergyGrid:
    e_min: float
    e_max: float
    count: int

    def __post_init__(self) -> None:
        if self.count < 2:
            raise ValueError(f"energy grid needs count >= 2, got {self.count}")
        if not self.e_min < self.e_max:
            raise ValueError(f"energy grid needs e_min < e_max, got {self.e_min}, {self.e_max}")

    def points(self) -> np.ndarray:
        return np.linspace(self.e_min, self.e_max, self.count)


@dataclass(frozen=True)
class SweepPlan:
    base: SystemParams
    vary: str
    values: tuple[float, ...]
    energy_grid: EnergyGrid
    refine: bool = True

    def __post_init__(self) -> None:
        if self.vary not in PARAMETER_PATHS:
            raise ValueError(f"vary must be one of {PARAMETER_PATHS}, got {self.vary!r}")
        if len(self.values) == 0:
            raise ValueError("values must not be empty")
        diffs = np.diff(np.asarray(self.values, dtype=float))
        if len(diffs) and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("values must be strictly monotone")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def systems(self) -> list[SystemParams]:
        return [self.base.with_value(self.vary, v) for v in self.values]


@dataclass(frozen=True)
class SpectrumRecord:
    parameter_value: float
    energy: float
    s: complex | None
    flags: frozenset[str]

    @property
    def reflect_sq(self) -> float | None:
        return None if self.s is None else abs(1.0 - self.s) ** 2

    @property
    def reflection(self) -> complex | None:
        return None if self.s is None else self.s - 1.0


def energy_flags(sys: SystemParams, energy: float) -> frozenset[str]:
    band_a, band_b = band_edges(sys.arm_a), band_edges(sys.arm_b)
    flags = set()
    if energy in (band_a.lower, band_a.upper):
        flags.add("band-edge")
    elif not band_a.contains(energy):
        flags.add("out-of-band")
    if energy in (band_b.lower, band_b.upper):
        flags.add("dual-edge")
    elif band_b.contains(energy):
        flags.add("dual-channel-open")
    if abs(energy - sys.controller_level) <= POLE_TOL:
        flags.add("near-pole")
    return frozenset(flags)


def reflect_sq(sys: SystemParams, energy: float, branch: int = OUTGOING) -> float:
    s = _transmission_values(sys, energy, branch)[0]
    return float(abs(1.0 - s) ** 2)


def _flank(sys: SystemParams, e0: float, limit: float, branch: int) -> float | None:
    """Energy between e0 and limit where |1 - s|**2 first drops through 0.5."""
    direction = 1.0 if limit > e0 else -1.0
    span = abs(limit - e0)
    step = 1e-8
    inner = e0
    while step < span:
        outer = e0 + direction * step
        if reflect_sq(sys, outer, branch) < 0.5:
            return bisect(lambda e: reflect_sq(sys, e, branch) - 0.5, inner, outer, xtol=FWHM_TOL)
        inner = outer
        step *= 2.0
    return None


def reflection_fwhm(sys: SystemParams, resonance: float, branch: int = OUTGOING) -> float | None:
    """Full width of the |1 - s|**2 peak at half maximum 0.5 around a zero of s.

    Returns None when a flank runs into arm A's band edge before crossing 0.5.
    """
    band_a = band_edges(sys.arm_a)
    pad = 1e-12 * max(1.0, band_a.width)
    lo = _flank(sys, resonance, band_a.lower + pad, branch)
    hi = _flank(sys, resonance, band_a.upper - pad, branch)
    if lo is None or hi is None:
        return None
    return hi - lo


def refined_grid(
    sys: SystemParams, grid: np.ndarray, branch: int = OUTGOING
) -> np.ndarray:
    """Grid plus each in-range resonance and 64 points across +/-5 widths of it."""
    lo, hi = float(grid.min()), float(grid.max())
    band_a = band_edges(sys.arm_a)
    if not max(lo, band_a.lower) < min(hi, band_a.upper):
        return grid
    window = Band(max(lo, band_a.lower), min(hi, band_a.upper))
    extra = []
    spacing = (hi - lo) / max(len(grid) - 1, 1)
    for e0 in find_resonances(sys, window, branch):
        width = reflection_fwhm(sys, e0, branch) or spacing
        local = np.linspace(e0 - REFINE_HALF_SPAN * width, e0 + REFINE_HALF_SPAN * width, REFINE_POINTS)
        local = local[(local > window.lower) & (local < window.upper)]
        extra.append(local)
        extra.append([e0])
    if not extra:
        return grid
    return np.unique(np.concatenate([grid, *map(np.asarray, extra)]))


def spectrum(
    sys: SystemParams,
    energies: Sequence[float],
    parameter_value: float = math.nan,
    refine: bool = True,
    branch: int = OUTGOING,
) -> list[SpectrumRecord]:
    grid = np.asarray(energies, dtype=float)
    if refine:
        grid = refined_grid(sys, grid, branch)
    band_a = band_edges(sys.arm_a)
    inside = (grid > band_a.lower) & (grid < band_a.upper)
    s_vals = np.full(grid.shape, np.nan, dtype=complex)
    if inside.any():
        s_vals[inside] = _transmission_values(sys, grid[inside], branch)[0]
    records = []
    for e, s, ok in zip(grid, s_vals, inside):
        records.append(
            SpectrumRecord(
                parameter_value=parameter_value,
                energy=float(e),
                s=complex(s) if ok else None,
                flags=energy_flags(sys, float(e)),
            )
        )
    return records


def _spectrum_job(args) -> list[SpectrumRecord]:
    sys, grid, value, refine = args
    return spectrum(sys, grid, value, refine)


def _map(fn, jobs: list, workers: int | None) -> list:
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(fn, jobs))


def run_sweep(plan: SweepPlan, workers: int | None = 1) -> list[SpectrumRecord]:
    """Records ordered by parameter value (outer) then energy (inner)."""
    grid = plan.energy_grid.points()
    jobs = [(sys, grid, v, plan.refine) for sys, v in zip(plan.systems(), plan.values)]
    out: list[SpectrumRecord] = []
    for chunk in _map(_spectrum_job, jobs, workers):
        out.extend(chunk)
    return out


@dataclass(frozen=True)
class ResonanceTrack:
    value: float
    resonance_energy: float | None
    fwhm: float | None

    @property
    def absent(self) -> bool:
        return self.resonance_energy is None


def track_resonance(
    base: SystemParams,
    vary: str,
    values: Sequence[float],
    window: Band | None = None,
) -> list[ResonanceTrack]:
    """Follow the s = 0 point and its |1 - s|**2 linewidth across a parameter family.

    With several resonances in the window the one nearest the previously
    tracked energy is followed (the lowest one for the first value).
    """
    out = []
    previous = None
    for v in values:
        sys = base.with_value(vary, v)
        roots = find_resonances(sys, window)
        if not roots:
            out.append(ResonanceTrack(float(v), None, None))
            continue
        e0 = roots[0] if previous is None else min(roots, key=lambda e: abs(e - previous))
        previous = e0
        out.append(ResonanceTrack(float(v), e0, reflection_fwhm(sys, e0)))
    return out
