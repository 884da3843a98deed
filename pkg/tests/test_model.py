import cmath
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from resonator_feshbach.model import (
    ArrayParams,
    SystemParams,
    band_edges,
    dispersion_energy,
    wavenumber_from_energy,
)

omegas = st.floats(-5, 5)
hoppings = st.floats(0.05, 3)


def complex_cos(kappa):
    return cmath.cos(kappa)


@pytest.mark.parametrize(
    "omega, hopping, expected",
    [(1.0, 0.5, (0.0, 2.0)), (2.0, 1.0, (0.0, 4.0)), (5.0, 0.001, (4.998, 5.002))],
)
def test_band_edges(omega, hopping, expected):
    band = band_edges(ArrayParams(omega, hopping))
    assert band.lower == pytest.approx(expected[0], abs=1e-15)
    assert band.upper == pytest.approx(expected[1], abs=1e-15)
    assert band.upper - band.lower == pytest.approx(4 * hopping)


def test_rejects_flat_band_and_negative_coupling():
    with pytest.raises(ValueError):
        ArrayParams(1.0, 0.0)
    with pytest.raises(ValueError):
        ArrayParams(1.0, 1.0, -0.1)


def test_dispersion_examples():
    arm = ArrayParams(2.0, 1.0)
    assert dispersion_energy(arm, math.pi / 2) == pytest.approx(2.0, abs=1e-15)
    assert dispersion_energy(arm, 0.0) == 0.0
    assert dispersion_energy(arm, math.pi) == 4.0
    with pytest.raises(ValueError):
        dispersion_energy(arm, -0.1)
    with pytest.raises(ValueError):
        dispersion_energy(arm, 3.2)


def test_wavenumber_band_centre():
    kappa = wavenumber_from_energy(ArrayParams(2.0, 1.0), 2.0)
    assert kappa.real_part == pytest.approx(math.pi / 2, abs=1e-15)
    assert kappa.decay_part == 0.0


@pytest.mark.parametrize(
    "omega, hopping, energy, cos_target, real_part",
    [(2.0, 1.0, 5.0, -1.5, math.pi), (1.0, 0.5, -0.5, 1.5, 0.0)],
)
def test_wavenumber_outside_band_satisfies_complex_cosine(omega, hopping, energy, cos_target, real_part):
    kappa = wavenumber_from_energy(ArrayParams(omega, hopping), energy)
    assert kappa.real_part == real_part
    assert kappa.decay_part > 0
    assert abs(complex_cos(kappa.value) - cos_target) < 1e-12
    assert math.cosh(kappa.decay_part) == pytest.approx(1.5, abs=1e-12)


def test_band_edge_is_flagged_not_raised():
    arm = ArrayParams(1.0, 0.5)
    lo, hi = wavenumber_from_energy(arm, 0.0), wavenumber_from_energy(arm, 2.0)
    assert lo.at_edge and lo.real_part == 0.0 and lo.decay_part == 0.0
    assert hi.at_edge and hi.real_part == math.pi and hi.decay_part == 0.0


@given(omegas, hoppings, st.floats(1e-6, math.pi - 1e-6))
def test_round_trip(omega, hopping, k):
    arm = ArrayParams(omega, hopping)
    e = dispersion_energy(arm, k)
    back = wavenumber_from_energy(arm, e).real_part
    # arccos conditioning degrades as 1/sin(k) near the ends
    assert back == pytest.approx(k, abs=1e-12 / max(math.sin(k), 1e-3) * max(1.0, abs(omega) / hopping))


@given(omegas, hoppings, st.floats(-20, 20))
def test_band_membership_matches_decay(omega, hopping, energy):
    arm = ArrayParams(omega, hopping)
    band = band_edges(arm)
    kappa = wavenumber_from_energy(arm, energy)
    outside = not band.lower < energy < band.upper
    if kappa.at_edge:
        return
    assert (kappa.decay_part > 0) == outside


@given(omegas, hoppings, st.floats(0.01, 10), st.booleans(), st.integers(1, 200))
def test_outside_band_amplitude_decays(omega, hopping, gap, above, j):
    arm = ArrayParams(omega, hopping)
    band = band_edges(arm)
    energy = band.upper + gap if above else band.lower - gap
    kappa = wavenumber_from_energy(arm, energy)
    assert abs(kappa.amplitude(j)) < 1.0


def test_with_value_paths():
    sys = SystemParams(ArrayParams(2, 1, 0.5), ArrayParams(1, 0.5, 0.7), 2.5)
    assert sys.with_value("arm_a.coupling", 0.2).arm_a.coupling == 0.2
    assert sys.with_value("controller_level", 3.0).controller_level == 3.0
    assert sys.with_value("arm_b.omega", 1.5).value("arm_b.omega") == 1.5
    with pytest.raises(ValueError):
        sys.with_value("arm_c.omega", 1.0)
