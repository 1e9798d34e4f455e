import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swgreen.config import basin_bottom
from swgreen.constants import MM_PER_H
from swgreen.mesh import build_mesh, generate_rect_mesh
from swgreen.reconstruction import CellGradient, edge_states, limit_and_correct
from swgreen.solver import rhs
from swgreen.sources import bed_slope_source, friction_apply, rain_infiltration_source

G = 9.81


def test_flat_lake_source_vanishes():
    m = generate_rect_mesh(2, 1, 6, 3)
    U = np.column_stack([np.full(m.n_cells, 0.7), np.zeros(m.n_cells), np.zeros(m.n_cells)])
    cg = limit_and_correct(m, U)
    S = bed_slope_source(m, edge_states(m, U, cg), cg, U[:, 0])
    assert np.abs(S).max() <= 1e-13


def test_lake_at_rest_on_basin_balances_fluxes():
    m = generate_rect_mesh(10, 8, 20, 16, basin_bottom)
    U = np.column_stack([np.full(m.n_cells, 1.2), np.zeros(m.n_cells), np.zeros(m.n_cells)])
    dU = rhs(m, U)
    hmax = (1.2 - m.cell_bottom).max()
    assert np.abs(dU[:, 1:]).max() <= 1e-12 * G * hmax
    assert np.abs(dU[:, 0]).max() <= 1e-12


def test_single_cell_matches_direct_sum():
    P = np.array([[0.0, 0.0], [1.3, 0.1], [0.4, 0.9]])
    b = np.array([0.2, 0.05, 0.3])
    m = build_mesh(P, b, [[0, 1, 2]])
    w_bar = 0.6
    states = np.array([[[0.55, 0.0, 0.0], [0.62, 0.0, 0.0], [0.58, 0.0, 0.0]]])
    w_grad = np.array([[0.07, -0.04]])
    cg = CellGradient(np.zeros((1, 3, 2)), np.ones(1), w_grad)
    S = bed_slope_source(m, states, cg, [w_bar])

    area = 0.5 * abs((P[1, 0] - P[0, 0]) * (P[2, 1] - P[0, 1]) - (P[2, 0] - P[0, 0]) * (P[1, 1] - P[0, 1]))
    Bc = b.mean()  # midpoint mean equals vertex mean
    ref = np.zeros(2)
    for k in range(3):
        a, c = P[k], P[(k + 1) % 3]
        t = c - a
        l = np.hypot(*t)
        n_out = np.array([t[1], -t[0]]) / l
        Bk = 0.5 * (b[k] + b[(k + 1) % 3])
        ref += G / (2 * area) * l * (states[0, k, 0] - Bk) ** 2 * n_out
    ref -= G * w_grad[0] * (w_bar - Bc)
    np.testing.assert_allclose(S[0], ref, rtol=1e-13, atol=1e-15)


def test_rain_source_examples():
    assert rain_infiltration_source(2e-5, 2e-5) == 0.0
    assert float(rain_infiltration_source(500 * MM_PER_H, 0.0)) == pytest.approx(1.3889e-4, rel=1e-4)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1e-3), st.floats(0, 1e-3), st.floats(0, 1e-3), st.floats(0, 1e-3), st.floats(-3, 3))
def test_rain_source_linear(R1, I1, R2, I2, a):
    lhs = rain_infiltration_source(R1 + a * R2, I1 + a * I2)
    rhs_ = rain_infiltration_source(R1, I1) + a * rain_infiltration_source(R2, I2)
    assert abs(lhs - rhs_) <= 1e-15


def test_capacity_limited_drain_empties_cell():
    h, dt = 0.003, 0.2
    I = h / dt
    assert h + dt * rain_infiltration_source(0.0, I) == pytest.approx(0.0, abs=1e-18)


def test_friction_trivial_cases():
    U = np.array([0.5, 0.2, -0.1])
    np.testing.assert_array_equal(friction_apply(U, 0.0, 0.0, 1.0), U)
    U0 = np.array([0.5, 0.0, 0.0])
    np.testing.assert_array_equal(friction_apply(U0, 0.0, 0.05, 1.0), U0)
    np.testing.assert_array_equal(friction_apply([1e-7, 1e-8, 1e-8], 0.0, 0.05, 1.0), [1e-7, 0, 0])


def test_friction_hand_value():
    # backward Euler in |m|: m + b m^2 = m*, b = dt g n^2 / h^(7/3)
    h, u, n, dt = 0.01, 1.0, 0.013, 0.1
    b = dt * 9.81 * n ** 2 / h ** (7 / 3)
    m = (-1 + np.sqrt(1 + 4 * b * h * u)) / (2 * b)
    out = friction_apply([h, h * u, 0.0], 0.0, n, dt)
    assert out[1] == pytest.approx(m, rel=1e-14)
    assert out[1] == pytest.approx(0.009330120234693047, rel=1e-14)
    # the divisor carries the speed after friction
    assert out[1] * (1 + dt * 9.81 * n ** 2 * (out[1] / h) / h ** (4 / 3)) == pytest.approx(h * u, rel=1e-14)


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-4, 1.0), st.floats(0.0, 0.2), st.floats(0.01, 0.8), st.floats(1e-4, 10.0))
def test_friction_balance_independent_of_dt(h, S, n, dt):
    # uniform flow: the gravity push g h S over dt is exactly removed again
    u = np.sqrt(S) * h ** (2 / 3) / n
    out = friction_apply([h, h * u + dt * 9.81 * h * S, 0.0], 0.0, n, dt)
    assert out[1] == pytest.approx(h * u, rel=1e-9, abs=1e-300)


def test_friction_vectorised():
    rng = np.random.default_rng(1)
    U = np.column_stack([rng.uniform(0, 0.3, 50), rng.normal(0, 0.1, 50), rng.normal(0, 0.1, 50)])
    B = rng.uniform(-0.1, 0.1, 50)
    U[:, 0] += B
    out = friction_apply(U, B, 0.03, 0.5)
    for j in range(50):
        np.testing.assert_array_equal(out[j], friction_apply(U[j], B[j], 0.03, 0.5))


def test_friction_converges_to_identity():
    U = np.array([0.05, 0.02, -0.01])
    errs = [np.abs(friction_apply(U, 0.0, 0.05, dt) - U).max() for dt in (1e-2, 5e-3, 2.5e-3)]
    assert errs[0] > errs[1] > errs[2] > 0
    assert errs[1] / errs[0] == pytest.approx(0.5, rel=0.02)


@settings(max_examples=10_000, deadline=None)
@given(st.floats(0, 5), st.floats(-50, 50), st.floats(-50, 50), st.floats(0, 1), st.floats(1e-6, 100),
       st.floats(-2, 2))
def test_friction_never_reverses(h, p, q, n, dt, B):
    out = friction_apply([B + h, p, q], B, n, dt)
    assert out[1] * p >= 0 and out[2] * q >= 0
    assert abs(out[1]) <= abs(p) and abs(out[2]) <= abs(q)
    assert np.hypot(out[1], out[2]) <= np.hypot(p, q)
