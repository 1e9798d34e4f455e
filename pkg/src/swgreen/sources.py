"""Source terms: well-balanced bed slope, rain minus infiltration, Manning friction.

The bed-slope term is discretised so that, for a surface at rest, it cancels
the hydrostatic part of the edge fluxes exactly:

    S_x = (g / 2|E|) sum_k l_k (w_k - B_k)^2 nout_x,k  -  g (w_x) (w_bar - B_c)

where ``w_k`` are the reconstructed surface values at the edge midpoints,
``nout`` the outward edge normals, ``w_x`` the surface gradient used in the
reconstruction and ``B_c`` the cell-centre bed value.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .constants import GRAVITY, H_EPS
from .mesh import Mesh
from .reconstruction import CellGradient

__all__ = ["bed_slope_source", "rain_infiltration_source", "friction_apply"]


@njit(cache=True, error_model="numpy")
def _bed_slope(states, w, w_grad, cell_bottom, cell_edges, edge_length, edge_bottom,
               cell_normals, area, g, out):
    for j in range(w.shape[0]):
        sx = 0.0
        sy = 0.0
        for k in range(3):
            e = cell_edges[j, k]
            h = states[j, k, 0] - edge_bottom[e]
            c = 0.5 * g * h * h
            sx -= edge_length[e] * c * cell_normals[j, k, 0]
            sy -= edge_length[e] * c * cell_normals[j, k, 1]
        hc = w[j] - cell_bottom[j]
        if hc < 0.0:
            hc = 0.0
        out[j, 0] = sx / area[j] - g * w_grad[j, 0] * hc
        out[j, 1] = sy / area[j] - g * w_grad[j, 1] * hc


def bed_slope_source(mesh: Mesh, states: np.ndarray, cg: CellGradient, w, g: float = GRAVITY) -> np.ndarray:
    """Momentum source ``(S_x, S_y)`` per cell from reconstructed edge states."""
    out = np.empty((mesh.n_cells, 2))
    _bed_slope(np.ascontiguousarray(states), np.ascontiguousarray(w, dtype=float), cg.w_grad,
               mesh.cell_bottom, mesh.cell_edges, mesh.edge_length, mesh.edge_bottom,
               mesh.cell_normals, mesh.cell_area, g, out)
    return out


def rain_infiltration_source(R, I):
    """Mass source ``R - I`` [m/s] added to ``dw/dt``."""
    return np.asarray(R, dtype=float) - np.asarray(I, dtype=float)


@njit(cache=True, error_model="numpy")
def _friction(U, B, n_manning, dt, g, h_eps):
    gn2 = g * n_manning * n_manning
    for j in range(U.shape[0]):
        h = U[j, 0] - B[j]
        if h < h_eps:
            U[j, 1] = 0.0
            U[j, 2] = 0.0
            continue
        if gn2 == 0.0:
            continue
        p = U[j, 1]
        q = U[j, 2]
        # divisor 1 + dt g n^2 |u| / h^(4/3) with |u| taken at the new level:
        # |m| + b |m|^2 = |m*| solved in closed form
        b = dt * gn2 / h ** (7.0 / 3.0)
        d = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * b * np.sqrt(p * p + q * q)))
        U[j, 1] = p / d
        U[j, 2] = q / d


def friction_apply(U, B, n_manning: float, dt: float, g: float = GRAVITY, h_eps: float = H_EPS):
    """Point-implicit Manning friction over ``dt``; returns a new state array.

    ``U`` is ``(w, p, q)`` for one cell or ``(nc, 3)``; ``B`` the matching
    cell-centre bed. Discharges are divided by
    ``1 + dt g n^2 |u| / h^(4/3)`` with ``|u|`` the speed after friction (the
    backward-Euler step, solved exactly as a quadratic in ``|(p, q)|``).
    Friction therefore never reverses or amplifies the flow, and a
    gravity-friction balance reached by the stepper does not depend on
    ``dt``. Below ``h_eps`` discharges are zeroed.
    """
    U = np.array(U, dtype=float)
    single = U.ndim == 1
    U2 = np.atleast_2d(U)
    B2 = np.broadcast_to(np.asarray(B, dtype=float), (len(U2),)).copy()
    _friction(U2, B2, float(n_manning), float(dt), g, h_eps)
    return U2[0] if single else U2
