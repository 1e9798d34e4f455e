import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import hll_blend, physical_flux
from swgreen.errors import NumericalError
from swgreen.riemann import hll_flux, physical_flux_normal, wave_speeds

C1 = math.sqrt(9.81)

depth = st.floats(1e-3, 10.0)
vel = st.floats(-8.0, 8.0)
angle = st.floats(0, 2 * math.pi)
bed = st.floats(-5.0, 5.0)


def _U(h, u, v, B=0.0):
    return np.array([B + h, h * u, h * v])


def test_still_water_flux():
    np.testing.assert_allclose(physical_flux_normal(_U(1, 0, 0), 0.0, (1, 0)), [0, 4.905, 0], rtol=1e-15)


def test_moving_water_flux():
    np.testing.assert_allclose(physical_flux_normal(_U(1, 2, 0), 0.0, (1, 0)), [2, 8.905, 0], rtol=1e-15)


def test_y_normal_is_second_column():
    h, u, v = 0.7, 0.3, -1.1
    np.testing.assert_allclose(physical_flux_normal(_U(h, u, v, 2.0), 2.0, (0, 1)),
                               [h * v, h * u * v, h * v * v + 0.5 * 9.81 * h * h], rtol=1e-15)


def test_thin_film_keeps_pressure_only():
    F = physical_flux_normal([1e-7, 1e-3, 0.0], 0.0, (1, 0))
    np.testing.assert_allclose(F, [0, 0.5 * 9.81 * 1e-14, 0], rtol=1e-15, atol=0)


def test_negative_depth_is_an_error():
    with pytest.raises(NumericalError):
        physical_flux_normal([0.0, 0, 0], 1.0, (1, 0))


def test_speed_examples():
    np.testing.assert_allclose(wave_speeds(_U(1, 0, 0), _U(1, 0, 0), 0.0, (1, 0)), (-C1, C1), rtol=1e-15)
    np.testing.assert_allclose(wave_speeds(_U(1, 0, 0), _U(0, 0, 0), 0.0, (1, 0)), (-C1, C1), rtol=1e-15)
    SL, SR = wave_speeds(_U(1, 5, 0), _U(1, 5, 0), 0.0, (1, 0))
    assert SL == pytest.approx(5 - 3.1321, abs=1e-4) and SL > 0
    assert wave_speeds(_U(0, 0, 0), _U(0, 0, 0), 0.0, (1, 0)) == (0.0, 0.0)


def test_supercritical_takes_left_flux():
    UL = _U(1, 5, 0.3)
    np.testing.assert_array_equal(hll_flux(UL, _U(0.9, 5.5, 0), 0.0, (1, 0)), physical_flux_normal(UL, 0.0, (1, 0)))


def test_dam_break_middle_branch():
    F = hll_flux(_U(1, 0, 0), _U(0.1, 0, 0), 0.0, (1, 0))
    np.testing.assert_allclose(F, hll_blend(1, 0, 0, 0.1, 0, 0, 1, 0), rtol=1e-14, atol=1e-15)
    # frozen from the blend formula evaluated by hand
    SL, SR = -C1, C1  # the deeper side bounds both waves
    expected_mass = (SL * SR * (0.1 - 1.0)) / (SR - SL)
    assert F[0] == pytest.approx(expected_mass, rel=1e-14)
    assert F[0] == pytest.approx(1.4094413787029243, rel=1e-14)


def test_both_dry_zero_flux():
    np.testing.assert_array_equal(hll_flux([0.5, 0, 0], [0.5, 0, 0], 0.5, (0.6, 0.8)), [0, 0, 0])


def test_sub_threshold_films_keep_pressure_only():
    # h below h_eps on both sides: no mass flux, mean hydrostatic pressure
    hL, hR, n = 4e-7, 9e-7, np.array([0.6, 0.8])
    F = hll_flux([hL, 1e-9, 0], [hR, 0, 2e-9], 0.0, n)
    cp = 0.25 * 9.81 * (hL * hL + hR * hR)
    np.testing.assert_array_equal(F[0], 0.0)
    np.testing.assert_allclose(F[1:], cp * n, rtol=1e-15, atol=0)
    U = [1e-6 - 1e-12, 0, 0]
    np.testing.assert_allclose(hll_flux(U, U, 0.0, n), physical_flux_normal(U, 0.0, n), rtol=1e-15, atol=0)


def test_batched_matches_single():
    rng = np.random.default_rng(0)
    n = rng.normal(size=(20, 2))
    n /= np.linalg.norm(n, axis=1)[:, None]
    UL = np.column_stack([rng.uniform(0.01, 1, 20), rng.normal(size=20), rng.normal(size=20)])
    UR = np.column_stack([rng.uniform(0.01, 1, 20), rng.normal(size=20), rng.normal(size=20)])
    F = hll_flux(UL, UR, np.zeros(20), n)
    for i in range(20):
        np.testing.assert_array_equal(F[i], hll_flux(UL[i], UR[i], 0.0, n[i]))


@settings(max_examples=500, deadline=None)
@given(depth, vel, vel, angle, bed)
def test_consistency(h, u, v, th, B):
    n = (math.cos(th), math.sin(th))
    U = _U(h, u, v, B)
    F = physical_flux_normal(U, B, n)
    assert np.abs(hll_flux(U, U, B, n) - F).max() <= 1e-13 * max(1.0, np.abs(F).max())


@settings(max_examples=500, deadline=None)
@given(depth, vel, vel, depth, vel, vel, angle)
def test_matches_independent_formula(hL, uL, vL, hR, uR, vR, th):
    n = (math.cos(th), math.sin(th))
    F = hll_flux(_U(hL, uL, vL), _U(hR, uR, vR), 0.0, n)
    ref = hll_blend(hL, uL, vL, hR, uR, vR, *n)
    assert np.abs(F - ref).max() <= 1e-12 * max(1.0, np.abs(ref).max())


@settings(max_examples=500, deadline=None)
@given(depth, vel, vel, depth, vel, vel, angle, bed)
def test_antisymmetry(hL, uL, vL, hR, uR, vR, th, B):
    n = np.array([math.cos(th), math.sin(th)])
    UL, UR = _U(hL, uL, vL, B), _U(hR, uR, vR, B)
    F = hll_flux(UL, UR, B, n)
    Fb = hll_flux(UR, UL, B, -n)
    assert np.abs(F + Fb).max() <= 1e-13 * max(1.0, np.abs(F).max())
    np.testing.assert_array_equal(F, -Fb)  # exact by construction


@settings(max_examples=300, deadline=None)
@given(depth, vel, vel, depth, vel, vel, angle, angle)
def test_rotation_invariance(hL, uL, vL, hR, uR, vR, th, rot):
    def R(a):
        return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    n = np.array([math.cos(th), math.sin(th)])
    F = hll_flux(_U(hL, uL, vL), _U(hR, uR, vR), 0.0, n)
    Q = R(rot)
    uL2, vL2 = Q @ [uL, vL]
    uR2, vR2 = Q @ [uR, vR]
    F2 = hll_flux(_U(hL, uL2, vL2), _U(hR, uR2, vR2), 0.0, Q @ n)
    scale = max(1.0, np.abs(F).max())
    assert abs(F2[0] - F[0]) <= 1e-12 * scale
    np.testing.assert_allclose(F2[1:], Q @ F[1:], rtol=0, atol=1e-12 * scale)


@settings(max_examples=200, deadline=None)
@given(depth, angle, bed)
def test_still_water_has_no_mass_flux(h, th, B):
    n = (math.cos(th), math.sin(th))
    assert hll_flux(_U(h, 0, 0, B), _U(h, 0, 0, B), B, n)[0] == 0.0


def test_oracle_flux_agrees_with_package():
    np.testing.assert_allclose(physical_flux_normal(_U(0.4, -1.2, 0.7), 0.0, (0.6, 0.8)),
                               physical_flux(0.4, -1.2, 0.7, 0.6, 0.8), rtol=1e-14)
