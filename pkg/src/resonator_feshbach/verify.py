"""Cross-oracle checks behind ``resonator-feshbach verify``."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Any

import numpy as np

from .analytic import (
    bound_state_energies,
    dual_channel_residual,
    find_resonances,
    transmission,
)
from .config import OracleBlock
from .model import SystemParams, band_edges, wavenumber_from_energy
from .oracle import (
    BoundaryTouchError,
    WavepacketSpec,
    build_hamiltonian,
    eigen_bound_states,
    greens_transmission,
    wavepacket_scatter,
)
from .sweep import _map, reflection_fwhm

GREENS_TOL = 1e-8
RESIDUAL_TOL = 1e-9
UNITARITY_TOL = 1e-9
PACKET_REL_TOL = 0.02
RESONANCE_REFLECTION = 0.99
NORM_TOL = 1e-6
BOUND_ENERGY_TOL = 1e-6
BOUND_KAPPA_TOL = 1e-4
CONVERGENCE_TOL = 1e-8
RESONANCE_EXCLUSION = 1e-6


@dataclass
class Check:
    name: str
    passed: bool
    measured: float | None
    tolerance: float
    detail: str = ""


def concordance_grid(sys: SystemParams, points: int = 201) -> np.ndarray:
    """Interior grid of arm A's band, inset by 1.25% of the bandwidth on each side."""
    band = band_edges(sys.arm_a)
    inset = 0.0125 * band.width
    return np.linspace(band.lower + inset, band.upper - inset, points)


def stationary_points(sys: SystemParams, points: int = 201) -> list[float]:
    """Concordance grid minus edge-flagged points and points within 1e-6 of a resonance."""
    band_a, band_b = band_edges(sys.arm_a), band_edges(sys.arm_b)
    roots = find_resonances(sys)
    out = []
    for e in concordance_grid(sys, points):
        e = float(e)
        if e in (band_a.lower, band_a.upper, band_b.lower, band_b.upper):
            continue
        if any(abs(e - r) < RESONANCE_EXCLUSION for r in roots):
            continue
        out.append(e)
    return out


def greens_check(sys: SystemParams, points: int = 201, branch: int = 1) -> Check:
    worst = 0.0
    for e in stationary_points(sys, points):
        worst = max(worst, abs(greens_transmission(sys, e) - transmission(sys, e, branch).transmission))
    return Check("greens-concordance", worst < GREENS_TOL, worst, GREENS_TOL)


def residual_check(sys: SystemParams, points: int = 201, branch: int = 1) -> Check:
    if sys.arm_a.coupling == 0.0 or sys.arm_b.coupling == 0.0:
        return Check("dual-channel-residual", True, None, RESIDUAL_TOL, "skipped: a coupling is zero")
    worst = 0.0
    for e in stationary_points(sys, points):
        if e == sys.controller_level:
            continue
        sol = transmission(sys, e, branch)
        worst = max(worst, max(abs(r) for r in dual_channel_residual(sys, sol)))
    return Check("dual-channel-residual", worst < RESIDUAL_TOL, worst, RESIDUAL_TOL)


def unitarity_check(sys: SystemParams, points: int = 201, branch: int = 1) -> Check:
    band_b = band_edges(sys.arm_b)
    worst = 0.0
    for e in stationary_points(sys, points):
        if band_b.lower <= e <= band_b.upper:
            continue
        s = transmission(sys, e, branch).transmission
        worst = max(worst, abs(abs(s) ** 2 + abs(s - 1) ** 2 - 1.0))
    return Check("single-channel-unitarity", worst < UNITARITY_TOL, worst, UNITARITY_TOL)


def default_carriers(sys: SystemParams, count: int = 3) -> list[float]:
    """Off-resonance carrier energies spread over arm A's band.

    Candidates sit at 5% steps of the band; those within two linewidths of a
    resonance, within 5% of the band width of an arm-B edge, or with |s|**2 < 0.1
    are dropped.  The first, middle and last survivors are used.
    """
    band_a, band_b = band_edges(sys.arm_a), band_edges(sys.arm_b)
    roots = [(r, reflection_fwhm(sys, r) or 0.05 * band_a.width) for r in find_resonances(sys)]
    keep = []
    for frac in np.arange(0.1, 0.91, 0.05):
        e = float(band_a.lower + frac * band_a.width)
        if any(abs(e - r) < 2.0 * w for r, w in roots):
            continue
        if min(abs(e - band_b.lower), abs(e - band_b.upper)) < 0.05 * band_a.width:
            continue
        if abs(transmission(sys, e).transmission) ** 2 < 0.1:
            continue
        keep.append(e)
    if len(keep) <= count:
        return keep
    picks = np.linspace(0, len(keep) - 1, count).round().astype(int)
    return [keep[i] for i in picks]


def _packet_job(args) -> dict[str, Any]:
    sys, N, energy, width = args
    k = wavenumber_from_energy(sys.arm_a, energy).real_part
    try:
        result = wavepacket_scatter(sys, N, WavepacketSpec(k, width_sites=width))
    except (BoundaryTouchError, ValueError) as exc:
        return {"energy": energy, "error": str(exc)}
    return {"energy": energy, **asdict(result)}


def wavepacket_checks(
    sys: SystemParams, settings: OracleBlock, workers: int | None = 1
) -> tuple[list[Check], list[dict]]:
    branch = settings.branch
    carriers = list(settings.carriers) if settings.carriers else default_carriers(sys)
    roots = find_resonances(sys)
    jobs = [(sys, settings.wavepacket_N, e, settings.width_sites) for e in carriers]
    if roots:
        jobs.append((sys, settings.wavepacket_N, roots[0], settings.resonance_width_sites))
    runs = _map(_packet_job, jobs, workers)

    checks = []
    worst_t = worst_leak = worst_norm = 0.0
    failed = [r for r in runs if "error" in r]
    for run in runs[: len(carriers)]:
        if "error" in run:
            continue
        s = transmission(sys, run["energy"], branch).transmission
        t_expected = abs(s) ** 2
        worst_t = max(worst_t, abs(run["transmitted"] - t_expected) / t_expected)
        deficit = 1.0 - abs(s) ** 2 - abs(1.0 - s) ** 2
        if band_edges(sys.arm_b).contains(run["energy"]) and deficit > 1e-3:
            worst_leak = max(worst_leak, abs(run["leaked_b"] - deficit) / deficit)
    for run in runs:
        if "error" not in run:
            worst_norm = max(worst_norm, run["norm_residual"])
    detail = "; ".join(f"E={r['energy']:.6g}: {r['error']}" for r in failed)
    checks.append(
        Check("wavepacket-concordance", worst_t < PACKET_REL_TOL and not failed, worst_t, PACKET_REL_TOL, detail)
    )
    checks.append(Check("wavepacket-leakage", worst_leak < PACKET_REL_TOL and not failed, worst_leak, PACKET_REL_TOL))
    checks.append(Check("wavepacket-norm", worst_norm < NORM_TOL and not failed, worst_norm, NORM_TOL))
    if roots:
        res = runs[-1]
        reflected = res.get("reflected", math.nan)
        checks.append(
            Check(
                "wavepacket-resonance-reflection",
                reflected > RESONANCE_REFLECTION,
                reflected,
                RESONANCE_REFLECTION,
                res.get("error", f"E={res['energy']:.12g}, width={settings.resonance_width_sites}"),
            )
        )
    return checks, runs


def single_arm(sys: SystemParams, label: str) -> SystemParams:
    """Copy of ``sys`` with the other arm's coupling switched off."""
    other = "arm_b.coupling" if label == "A" else "arm_a.coupling"
    return sys.with_value(other, 0.0)


def lattice_levels(sys: SystemParams, label: str, N: int):
    isolated = single_arm(sys, label)
    return eigen_bound_states(build_hamiltonian(isolated, N), isolated)


def bound_checks(sys: SystemParams, N: int) -> list[Check]:
    worst_e = worst_k = worst_conv = 0.0
    missing = []
    for label in ("A", "B"):
        arm = sys.arm(label)
        if arm.coupling == 0.0:
            continue
        analytic = bound_state_energies(arm, sys.controller_level, label)
        small = lattice_levels(sys, label, N)
        large = lattice_levels(sys, label, 2 * N)
        for bs in analytic:
            near = [s for s in small if abs(s.energy - bs.energy) < 0.5 * arm.hopping]
            far = [s for s in large if abs(s.energy - bs.energy) < 0.5 * arm.hopping]
            if not near or not far:
                missing.append(f"{label}/{bs.branch}")
                continue
            lat = min(near, key=lambda s: abs(s.energy - bs.energy))
            lat2 = min(far, key=lambda s: abs(s.energy - bs.energy))
            worst_e = max(worst_e, abs(lat.energy - bs.energy))
            inv = 1.0 / lat.localization_length if lat.localization_length else math.inf
            worst_k = max(worst_k, abs(inv - bs.decay_rate))
            if bs.decay_rate > 0.02:
                worst_conv = max(worst_conv, abs(lat2.energy - lat.energy))
    detail = f"missing lattice levels: {', '.join(missing)}" if missing else ""
    ok = not missing
    if math.isnan(worst_k):
        worst_k = math.inf
    return [
        Check("bound-state-energy", ok and worst_e < BOUND_ENERGY_TOL, worst_e, BOUND_ENERGY_TOL, detail),
        Check("bound-state-decay", ok and worst_k < BOUND_KAPPA_TOL, worst_k, BOUND_KAPPA_TOL, detail),
        Check("bound-state-convergence", ok and worst_conv < CONVERGENCE_TOL, worst_conv, CONVERGENCE_TOL, detail),
    ]


def run_verification(
    sys: SystemParams, settings: OracleBlock, workers: int | None = 1
) -> dict[str, Any]:
    branch = settings.branch
    checks = [
        greens_check(sys, settings.grid_points, branch),
        residual_check(sys, settings.grid_points, branch),
        unitarity_check(sys, settings.grid_points, branch),
    ]
    packet_checks, runs = wavepacket_checks(sys, settings, workers)
    checks.extend(packet_checks)
    checks.extend(bound_checks(sys, settings.N))
    failed = [c.name for c in checks if not c.passed]
    return {
        "passed": not failed,
        "failed": failed,
        "f_branch": settings.f_branch,
        "checks": [_check_dict(c) for c in checks],
        "wavepacket_runs": runs,
    }


def _check_dict(c: Check) -> dict[str, Any]:
    d = asdict(c)
    if d["measured"] is not None and not math.isfinite(d["measured"]):
        d["measured"] = None
    return d
