import numpy as np
import pytest

from resonator_feshbach import figure_system
from resonator_feshbach.analytic import find_resonances, transmission
from resonator_feshbach.model import Band
from resonator_feshbach.sweep import (
    EnergyGrid,
    SweepPlan,
    energy_flags,
    reflection_fwhm,
    refined_grid,
    run_sweep,
    spectrum,
    track_resonance,
)

GRID = EnergyGrid(0.0, 4.0, 401)


def test_uncoupled_array_reflects_nothing():
    records = spectrum(figure_system(2.5, 0.0), GRID.points())
    vals = [r.reflect_sq for r in records if r.s is not None]
    assert max(vals) < 1e-24


def test_edges_are_flagged_not_evaluated(fig_sys):
    recs = {r.energy: r for r in spectrum(fig_sys, GRID.points(), refine=False)}
    assert recs[0.0].s is None and "band-edge" in recs[0.0].flags
    assert recs[4.0].s is None and "band-edge" in recs[4.0].flags
    assert "dual-edge" in recs[2.0].flags
    assert "dual-channel-open" in recs[1.0].flags
    assert "near-pole" in recs[2.5].flags and recs[2.5].s is not None
    assert energy_flags(fig_sys, 4.5) == frozenset({"out-of-band"})


@pytest.mark.parametrize("omega_c", [2.2, 2.5, 3.0])
def test_controller_family_shape(omega_c):
    sys = figure_system(omega_c)
    recs = spectrum(sys, GRID.points())
    e = np.array([r.energy for r in recs if r.s is not None])
    r2 = np.array([r.reflect_sq for r in recs if r.s is not None])
    above = e > 2.0
    peak = e[above][np.argmax(r2[above])]
    (root,) = find_resonances(sys, Band(2.0, 4.0))
    assert peak == pytest.approx(root, abs=1e-12)
    assert r2[above].max() == pytest.approx(1.0, abs=1e-12)
    # a single local maximum above arm B's band
    inner = r2[above]
    maxima = np.sum((inner[1:-1] > inner[:-2]) & (inner[1:-1] > inner[2:]))
    assert maxima == 1
    # reflection vanishes where arm B's band ends
    assert r2[e == 2.0][0] < 1e-24


def test_refined_grid_includes_resonance(fig_sys):
    grid = refined_grid(fig_sys, GRID.points())
    (root,) = find_resonances(fig_sys, Band(2.0, 4.0))
    assert root in grid
    assert abs(transmission(fig_sys, root).transmission) < 1e-8
    assert np.all(np.diff(grid) > 0)


def test_fwhm_against_dense_grid(fig_sys):
    (root,) = find_resonances(fig_sys, Band(2.0, 4.0))
    width = reflection_fwhm(fig_sys, root)
    e = np.linspace(root - 2 * width, min(root + 2 * width, 3.9999), 8001)
    r2 = np.array([abs(1 - transmission(fig_sys, x).transmission) ** 2 for x in e])
    inside = e[r2 >= 0.5]
    assert width == pytest.approx(inside.max() - inside.min(), abs=2 * (e[1] - e[0]))


def test_fwhm_grows_with_drive_coupling():
    widths = [reflection_fwhm(s, find_resonances(s, Band(2, 4))[0]) for s in (figure_system(2.5, g) for g in (0.2, 0.4, 0.6))]
    assert widths[0] < widths[1] < widths[2]


def test_sweep_order_and_worker_determinism(fig_sys):
    plan = SweepPlan(fig_sys, "controller_level", (2.2, 2.5, 3.0), EnergyGrid(0.0, 4.0, 41))
    serial = run_sweep(plan, workers=1)
    parallel = run_sweep(plan, workers=2)
    assert serial == parallel
    params = [r.parameter_value for r in serial]
    assert params == sorted(params)


def test_tracking_without_dual_coupling_sits_on_controller():
    base = figure_system(2.5).with_value("arm_b.coupling", 0.0)
    tracks = track_resonance(base, "controller_level", [0.5, 1.5, 2.5, 3.5])
    assert [t.resonance_energy for t in tracks] == [0.5, 1.5, 2.5, 3.5]


def test_tracking_absent_resonance_is_reported():
    (track,) = track_resonance(figure_system(2.5, 0.0), "controller_level", [2.5])
    assert track.absent and track.fwhm is None


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(vary="arm_c.omega", values=(1.0,)),
        dict(vary="controller_level", values=()),
        dict(vary="controller_level", values=(1.0, 3.0, 2.0)),
    ],
)
def test_plan_validation(fig_sys, kwargs):
    with pytest.raises(ValueError):
        SweepPlan(fig_sys, energy_grid=GRID, **kwargs)


def test_grid_validation():
    with pytest.raises(ValueError):
        EnergyGrid(1.0, 1.0, 10)
    with pytest.raises(ValueError):
        EnergyGrid(0.0, 1.0, 1)
