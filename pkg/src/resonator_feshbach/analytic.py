"""Closed-form single-photon results for the H-shaped two-array system.

The injection arm is always ``sys.arm_a``; use ``SystemParams.swapped`` to
inject into the other array.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .model import (
    ArrayParams,
    Band,
    BandEdgeError,
    ComplexWavenumber,
    NoOpenChannelError,
    PoleError,
    SystemParams,
    band_edges,
    wavenumber_from_energy,
)

# Sign of the imaginary part of the dual-arm root inside its band.  +1 is the
# outgoing-wave (physical) choice; -1 reproduces the incoming-wave solution.
OUTGOING = 1
FLIPPED = -1

RESONANCE_GRID_POINTS = 2001
RESONANCE_TOL = 1e-12
# well inside the 1e-12 requirement; roots close to a band edge need it
BOUND_XTOL = 1e-15


@dataclass(frozen=True)
class BoundState:
    energy: float
    arm: str
    branch: Literal["plus", "minus"]
    wavenumber: ComplexWavenumber
    norm_constant: float
    controller_amplitude: float
    residual: float = 0.0

    @property
    def decay_rate(self) -> float:
        return self.wavenumber.decay_part


@dataclass(frozen=True)
class ScatteringSolution:
    energy: float
    incident_wavenumber: float
    transmission: complex
    reflection: complex
    closed_amplitude: complex
    dual_wavenumber: ComplexWavenumber
    controller_amplitude: complex
    branch: int = OUTGOING

    @property
    def dual_channel_open(self) -> bool:
        return self.dual_wavenumber.decay_part == 0.0 and not self.dual_wavenumber.at_edge

    @property
    def reflect_sq(self) -> float:
        return abs(1.0 - self.transmission) ** 2


def effective_potential_strength(sys: SystemParams, arm: str, energy: float) -> float:
    """Strength ``g**2 / (E - Omega)`` of the on-site barrier the controller puts at site 0."""
    detuning = energy - sys.controller_level
    if detuning == 0.0:
        raise PoleError(f"effective potential has a pole at E = Omega = {energy}")
    return sys.arm(arm).coupling ** 2 / detuning


def _edge_product(arm: ArrayParams, energy):
    d = energy - arm.omega
    two_j = 2.0 * arm.hopping
    return (d - two_j) * (d + two_j)


def band_root(arm: ArrayParams, energy: float) -> complex:
    """``sqrt((E - omega)**2 - 4J**2)``: positive real outside the band,
    ``+1j * sqrt(4J**2 - (E - omega)**2)`` inside, zero on the edges."""
    band = band_edges(arm)
    if energy == band.lower or energy == band.upper:
        return 0j
    p = _edge_product(arm, energy)
    if p > 0:
        return complex(math.sqrt(p))
    return 1j * math.sqrt(-p)


def channel_root(arm: ArrayParams, energy, branch: int = OUTGOING):
    """``2i J sin(q)`` for the physical lattice wave ``exp(iq|j|)`` at energy E.

    Equals ``band_root`` above the band, ``-band_root`` below it and
    ``branch * 1j * sqrt(4J**2 - (E - omega)**2)`` inside.  Accepts arrays.
    """
    e = np.asarray(energy, dtype=float)
    band = band_edges(arm)
    p = _edge_product(arm, e)
    root = np.sqrt(np.abs(p))
    out = np.where(p > 0, np.where(e > arm.omega, root, -root), branch * 1j * root)
    out = np.where((e == band.lower) | (e == band.upper), 0.0, out).astype(complex)
    return out if out.ndim else complex(out)


def _dual_wavenumber(arm: ArrayParams, energy: float, branch: int) -> ComplexWavenumber:
    kappa = wavenumber_from_energy(arm, energy)
    if kappa.decay_part == 0.0 and not kappa.at_edge:
        # open dual channel: exp(-i*kappa*|j|) outgoing needs kappa = -q
        return ComplexWavenumber(-branch * kappa.real_part, 0.0)
    return kappa


def _transmission_values(sys: SystemParams, energy, branch: int = OUTGOING):
    """Vectorized ``s(E)`` plus the dual-arm root; assumes E inside arm A's band."""
    a, b = sys.arm_a, sys.arm_b
    fa = channel_root(a, energy)
    fb = channel_root(b, energy, branch)
    if a.coupling == 0.0:
        return np.ones_like(fa), fb
    # with arm B decoupled the common factor fb cancels (and may vanish on its edges)
    fb_eff = fb if b.coupling > 0 else np.ones_like(fb)
    den = (np.asarray(energy) - sys.controller_level) * fb_eff - b.coupling ** 2
    num = fa * den
    return num / (num - a.coupling ** 2 * fb_eff), fb


def transmission(sys: SystemParams, energy: float, branch: int = OUTGOING) -> ScatteringSolution:
    """Scattering of a photon injected from the left into arm A.

    The amplitude in arm A is ``exp(ikj) + r exp(-ikj)`` for j < 0 and
    ``s exp(ikj)`` for j > 0, with ``r = s - 1``.  Arm B carries
    ``C exp(-i kappa |j|)``, decaying when E lies outside its band and outgoing
    (for ``branch=+1``) inside it.  The expression for s is regular at E = Omega
    and vanishes exactly where ``(E - Omega) * 2iJ_B sin(q) = g_B**2``.
    """
    a, b = sys.arm_a, sys.arm_b
    band_a = band_edges(a)
    if energy == band_a.lower or energy == band_a.upper:
        raise BandEdgeError(f"E = {energy} is on an edge of arm A's band")
    if not band_a.contains(energy):
        raise NoOpenChannelError(
            f"E = {energy} lies outside arm A's band [{band_a.lower}, {band_a.upper}]"
        )
    k = wavenumber_from_energy(a, energy).real_part
    s_arr, fb_arr = _transmission_values(sys, energy, branch)
    s, fb = complex(s_arr), complex(fb_arr)
    fa = channel_root(a, energy)
    ga, gb = a.coupling, b.coupling
    if ga == 0.0:
        u_e = 0j
        c_b = 0j
    else:
        # site-0 matching in arm A: g_A u_e = -2iJ_A sin(k) (1 - s)
        u_e = -fa * (1.0 - s) / ga
        c_b = ((energy - sys.controller_level) * u_e - ga * s) / gb if gb > 0 else 0j
    return ScatteringSolution(
        energy=energy,
        incident_wavenumber=k,
        transmission=s,
        reflection=s - 1.0,
        closed_amplitude=c_b,
        dual_wavenumber=_dual_wavenumber(b, energy, branch),
        controller_amplitude=u_e,
        branch=branch,
    )


def dual_channel_residual(
    sys: SystemParams, sol: ScatteringSolution
) -> tuple[complex, complex, complex]:
    """Pairwise differences of the three equal quantities linking s, C_B and u_e:

    ``(1 - s) sin(k) J_A / g_A``, ``C_B sin(kappa) J_B / g_B`` and
    ``(g_A s + g_B C_B) / (2i (Omega - E))``.
    """
    ga, gb = sys.arm_a.coupling, sys.arm_b.coupling
    if ga == 0.0 or gb == 0.0:
        raise ValueError("dual-channel relation needs both couplings nonzero")
    detuning = sys.controller_level - sol.energy
    if detuning == 0.0:
        raise PoleError("dual-channel relation is singular at E = Omega")
    s, c = sol.transmission, sol.closed_amplitude
    x1 = (1.0 - s) * math.sin(sol.incident_wavenumber) * sys.arm_a.hopping / ga
    x2 = c * cmath.sin(sol.dual_wavenumber.value) * sys.arm_b.hopping / gb
    x3 = (ga * s + gb * c) / (2j * detuning)
    return (x1 - x2, x2 - x3, x1 - x3)


# -- bound states -------------------------------------------------------------


def _bound_residual(arm: ArrayParams, controller_level: float, energy: float, sign: int) -> float:
    f = band_root(arm, energy).real
    if f == 0.0:
        return math.inf
    return abs(energy - controller_level - sign * arm.coupling ** 2 / f)


def _make_bound_state(
    arm: ArrayParams, controller_level: float, energy: float, label: str, branch: str
) -> BoundState:
    kappa = wavenumber_from_energy(arm, energy)
    g = arm.coupling
    if g == 0.0:
        return BoundState(energy, label, branch, kappa, 0.0, 1.0, 0.0)
    detuning = energy - controller_level
    # sum_j exp(-2 kappa_I |j|) = coth(kappa_I)
    norm = 1.0 / math.sqrt(1.0 / math.tanh(kappa.decay_part) + (g / detuning) ** 2)
    sign = 1 if branch == "plus" else -1
    return BoundState(
        energy=energy,
        arm=label,
        branch=branch,
        wavenumber=kappa,
        norm_constant=norm,
        controller_amplitude=g * norm / detuning,
        residual=_bound_residual(arm, controller_level, energy, sign),
    )


def _bracket_span(arm: ArrayParams, controller_level: float) -> float:
    g = arm.coupling
    return abs(controller_level - arm.omega) + 2.0 * arm.hopping + g * g / arm.hopping + 1.0


def bound_state_energies(
    arm: ArrayParams, controller_level: float, label: str = "B"
) -> list[BoundState]:
    """Discrete levels of one array coupled to the controller.

    Solves ``E = Omega +/- g**2 / sqrt((E - omega)**2 - 4J**2)`` with the plus
    branch above the band and the minus branch below it.  For g > 0 both
    branches always have exactly one root; for g = 0 the bare controller level
    is returned when it lies outside the band.
    """
    band = band_edges(arm)
    omega_c = controller_level
    g2 = arm.coupling ** 2
    if g2 == 0.0:
        if omega_c > band.upper:
            return [_make_bound_state(arm, omega_c, omega_c, label, "plus")]
        if omega_c < band.lower:
            return [_make_bound_state(arm, omega_c, omega_c, label, "minus")]
        return []

    def h_plus(e: float) -> float:
        return (e - omega_c) * band_root(arm, e).real - g2

    def h_minus(e: float) -> float:
        return (omega_c - e) * band_root(arm, e).real - g2

    span = _bracket_span(arm, omega_c)
    states = []
    # both functions equal -g**2 < 0 on the band edge itself
    hi = band.upper + span
    while h_plus(hi) <= 0.0:
        hi = band.upper + 2.0 * (hi - band.upper)
    e_plus = brentq(h_plus, band.upper, hi, xtol=BOUND_XTOL, rtol=4 * np.finfo(float).eps)
    lo = band.lower - span
    while h_minus(lo) <= 0.0:
        lo = band.lower - 2.0 * (band.lower - lo)
    e_minus = brentq(h_minus, lo, band.lower, xtol=BOUND_XTOL, rtol=4 * np.finfo(float).eps)
    states.append(_make_bound_state(arm, omega_c, e_minus, label, "minus"))
    states.append(_make_bound_state(arm, omega_c, e_plus, label, "plus"))
    return states


def quartic_candidates(arm: ArrayParams, controller_level: float) -> dict[str, list[float]]:
    """Real roots of ``(E - Omega)**2 ((E - omega)**2 - 4J**2) = g**4`` sorted
    into the branch each one satisfies.  Independent of the bracketed solve."""
    poly = np.polynomial.Polynomial
    detuning = poly([-controller_level, 1.0])
    offset = poly([-arm.omega, 1.0])
    quartic = detuning ** 2 * (offset ** 2 - 4.0 * arm.hopping ** 2) - arm.coupling ** 4
    band = band_edges(arm)
    out: dict[str, list[float]] = {"plus": [], "minus": []}
    for root in quartic.roots():
        if abs(root.imag) > 1e-7 * max(1.0, abs(root.real)):
            continue
        e = float(root.real)
        if e > band.upper and e > controller_level:
            out["plus"].append(e)
        elif e < band.lower and e < controller_level:
            out["minus"].append(e)
    return out


def bound_state_wavefunction(bs: BoundState, j_max: int) -> np.ndarray:
    """Amplitudes ``C exp(-i kappa |j|)`` for j = -j_max..j_max."""
    if j_max < 1:
        raise ValueError(f"j_max must be >= 1, got {j_max}")
    j = np.arange(-j_max, j_max + 1)
    return bs.norm_constant * bs.wavenumber.amplitude(j)


# -- resonances ---------------------------------------------------------------


def _golden_min(f, a: float, b: float, tol: float) -> float:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _polish_resonance(sys: SystemParams, energy: float, lo: float, hi: float) -> float:
    """Snap a golden-section estimate onto the exact zero of the resonance
    denominator when that denominator is real (dual channel closed)."""
    b = sys.arm_b
    omega_c = sys.controller_level
    if b.coupling == 0.0:
        return omega_c if abs(energy - omega_c) < 1e-9 else energy
    if band_edges(b).contains(energy):
        return energy

    def den(e: float) -> float:
        return ((e - omega_c) * channel_root(b, e)).real - b.coupling ** 2

    band_b = band_edges(b)
    # keep the bracket on one side of arm B's band
    if energy > band_b.upper:
        lo = max(lo, band_b.upper)
    else:
        hi = min(hi, band_b.lower)
    step = 1e-9
    a_, b_ = max(lo, energy - step), min(hi, energy + step)
    while den(a_) * den(b_) > 0 and (a_ > lo or b_ < hi):
        step *= 10.0
        a_, b_ = max(lo, energy - step), min(hi, energy + step)
    if den(a_) * den(b_) > 0:
        return energy
    return brentq(den, a_, b_, xtol=RESONANCE_TOL, rtol=4 * np.finfo(float).eps)


def find_resonances(
    sys: SystemParams, window: Band | None = None, branch: int = OUTGOING
) -> list[float]:
    """Energies inside ``window`` (default: arm A's band) where s(E) = 0.

    |s| is scanned on a 2001-point grid; every local minimum below 0.5 is
    refined by golden-section search and kept if |s| < 1e-10 there.
    """
    band_a = band_edges(sys.arm_a)
    if window is None:
        window = band_a
    lo, hi = max(window.lower, band_a.lower), min(window.upper, band_a.upper)
    if sys.arm_a.coupling == 0.0 or not lo < hi:
        return []
    grid = np.linspace(lo, hi, RESONANCE_GRID_POINTS)
    grid = grid[(grid > band_a.lower) & (grid < band_a.upper)]
    mags = np.abs(_transmission_values(sys, grid, branch)[0])

    def abs_s(e: float) -> float:
        return float(abs(_transmission_values(sys, e, branch)[0]))

    found: list[float] = []
    n = len(grid)
    for i in range(n):
        left = mags[i - 1] if i > 0 else np.inf
        right = mags[i + 1] if i < n - 1 else np.inf
        if not (mags[i] <= left and mags[i] <= right and mags[i] < 0.5):
            continue
        a = grid[max(i - 1, 0)]
        b = grid[min(i + 1, n - 1)]
        e = _golden_min(abs_s, a, b, RESONANCE_TOL)
        e = _polish_resonance(sys, e, a, b)
        if abs_s(e) < 1e-10 and not any(abs(e - f) < 1e-9 for f in found):
            found.append(float(e))
    return sorted(found)
