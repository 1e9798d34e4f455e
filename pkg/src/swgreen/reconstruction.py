"""Piecewise-linear reconstruction of ``(w, p, q)`` on triangles.

Pipeline per stage: vertex values (least-squares fit of neighbouring cell
averages) -> Green-Gauss gradients with edge values taken as the mean of the
two endpoint vertex values -> Barth-Jespersen limiting against the min/max
of all cells sharing a vertex (boundary midpoints excepted) -> the
positivity factor ``alpha`` applied to the surface gradient -> values at the edge midpoints.

Cells whose mean surface lies below one of their midpoint bed values cannot
be made non-negative by scaling the surface gradient alone; those cells are
reconstructed with constant depth (surface parallel to the bed) and report
``alpha = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .constants import H_EPS
from .mesh import Mesh

__all__ = [
    "CellGradient",
    "vertex_values",
    "green_gauss_gradients",
    "limit_and_correct",
    "positivity_factor",
    "edge_states",
]


@dataclass
class CellGradient:
    """Per-cell gradients of (w, p, q) plus the surface-positivity factor.

    ``grad[j, v]`` is the (x, y) gradient of variable ``v``; ``w_grad`` is the
    surface gradient actually used to reconstruct ``w`` (``alpha * grad[:, 0]``,
    or the bed gradient for constant-depth cells).
    """

    grad: np.ndarray  # (nc, 3, 2)
    alpha: np.ndarray  # (nc,)
    w_grad: np.ndarray  # (nc, 2)


# The kernels below work on exactly three variables (w, p, q); the public
# helpers pad single fields to three columns.

@njit(cache=True, error_model="numpy")
def _vertex_values(U, ptr, idx, wts, out):
    for v in range(ptr.shape[0] - 1):
        s0 = s1 = s2 = 0.0
        for s in range(ptr[v], ptr[v + 1]):
            c = idx[s]
            a = wts[s]
            s0 += a * U[c, 0]
            s1 += a * U[c, 1]
            s2 += a * U[c, 2]
        out[v, 0] = s0
        out[v, 1] = s1
        out[v, 2] = s2


@njit(cache=True, error_model="numpy")
def _vertex_bounds(U, ptr, idx, vmin, vmax):
    for v in range(ptr.shape[0] - 1):
        c = idx[ptr[v]]
        lo0 = hi0 = U[c, 0]
        lo1 = hi1 = U[c, 1]
        lo2 = hi2 = U[c, 2]
        for s in range(ptr[v] + 1, ptr[v + 1]):
            c = idx[s]
            x0 = U[c, 0]
            x1 = U[c, 1]
            x2 = U[c, 2]
            lo0 = min(lo0, x0)
            hi0 = max(hi0, x0)
            lo1 = min(lo1, x1)
            hi1 = max(hi1, x1)
            lo2 = min(lo2, x2)
            hi2 = max(hi2, x2)
        vmin[v, 0] = lo0
        vmin[v, 1] = lo1
        vmin[v, 2] = lo2
        vmax[v, 0] = hi0
        vmax[v, 1] = hi1
        vmax[v, 2] = hi2


@njit(cache=True, error_model="numpy")
def _green_gauss(V, tri, cell_edges, edge_length, cell_normals, area, out):
    for j in range(tri.shape[0]):
        g0x = g0y = g1x = g1y = g2x = g2y = 0.0
        for k in range(3):
            a = tri[j, k]
            b = tri[j, (k + 1) % 3]
            l = edge_length[cell_edges[j, k]]
            # outward normal times length
            nx = -l * cell_normals[j, k, 0]
            ny = -l * cell_normals[j, k, 1]
            u0 = 0.5 * (V[a, 0] + V[b, 0])
            u1 = 0.5 * (V[a, 1] + V[b, 1])
            u2 = 0.5 * (V[a, 2] + V[b, 2])
            g0x += u0 * nx
            g0y += u0 * ny
            g1x += u1 * nx
            g1y += u1 * ny
            g2x += u2 * nx
            g2y += u2 * ny
        r = 1.0 / area[j]
        out[j, 0, 0] = g0x * r
        out[j, 0, 1] = g0y * r
        out[j, 1, 0] = g1x * r
        out[j, 1, 1] = g1y * r
        out[j, 2, 0] = g2x * r
        out[j, 2, 1] = g2y * r


@njit(cache=True, error_model="numpy", inline="always")
def _bj_clip(phi, d, up, dn):
    if d > up:
        return min(phi, up / d)
    if d < dn:
        return min(phi, dn / d)
    return phi


@njit(cache=True, error_model="numpy", inline="always")
def _bj_factor(u, lo, hi, gx, gy, dx0, dy0, dx1, dy1, dx2, dy2, c0, c1, c2):
    phi = 1.0
    up = hi - u
    dn = lo - u
    if c0:
        phi = _bj_clip(phi, gx * dx0 + gy * dy0, up, dn)
    if c1:
        phi = _bj_clip(phi, gx * dx1 + gy * dy1, up, dn)
    if c2:
        phi = _bj_clip(phi, gx * dx2 + gy * dy2, up, dn)
    return phi


@njit(cache=True, error_model="numpy")
def _barth_jespersen(U, grad, tri, vmin, vmax, centroid, cell_edges, edge_midpoint, edge_tags, out):
    # boundary midpoints are not constrained: there is no data beyond them, and
    # bounding them by the interior neighbours flattens every boundary cell
    for j in range(U.shape[0]):
        xj = centroid[j, 0]
        yj = centroid[j, 1]
        e0 = cell_edges[j, 0]
        e1 = cell_edges[j, 1]
        e2 = cell_edges[j, 2]
        dx0 = edge_midpoint[e0, 0] - xj
        dy0 = edge_midpoint[e0, 1] - yj
        dx1 = edge_midpoint[e1, 0] - xj
        dy1 = edge_midpoint[e1, 1] - yj
        dx2 = edge_midpoint[e2, 0] - xj
        dy2 = edge_midpoint[e2, 1] - yj
        c0 = edge_tags[e0] < 0
        c1 = edge_tags[e1] < 0
        c2 = edge_tags[e2] < 0
        a = tri[j, 0]
        b = tri[j, 1]
        c = tri[j, 2]
        for m in range(3):
            u = U[j, m]
            hi = max(u, max(vmax[a, m], max(vmax[b, m], vmax[c, m])))
            lo = min(u, min(vmin[a, m], min(vmin[b, m], vmin[c, m])))
            gx = grad[j, m, 0]
            gy = grad[j, m, 1]
            phi = _bj_factor(u, lo, hi, gx, gy, dx0, dy0, dx1, dy1, dx2, dy2, c0, c1, c2)
            out[j, m, 0] = phi * gx
            out[j, m, 1] = phi * gy


@njit(cache=True, error_model="numpy")
def _positivity(w, grad, centroid, cell_bottom_grad, cell_edges, edge_midpoint, edge_bottom,
                alpha, w_grad):
    for j in range(w.shape[0]):
        gx = grad[j, 0, 0]
        gy = grad[j, 0, 1]
        xj = centroid[j, 0]
        yj = centroid[j, 1]
        feasible = True
        a = 1.0
        for k in range(3):
            e = cell_edges[j, k]
            base = w[j] - edge_bottom[e]
            if base < 0.0:
                feasible = False
                break
            d = gx * (edge_midpoint[e, 0] - xj) + gy * (edge_midpoint[e, 1] - yj)
            if base + d < 0.0:
                a = min(a, -base / d)
        if feasible:
            if a < 0.0:
                a = 0.0
            alpha[j] = a
            w_grad[j, 0] = a * gx
            w_grad[j, 1] = a * gy
        else:
            alpha[j] = 0.0
            w_grad[j, 0] = cell_bottom_grad[j, 0]
            w_grad[j, 1] = cell_bottom_grad[j, 1]


@njit(cache=True, error_model="numpy")
def _edge_states(U, grad, w_grad, alpha, centroid, cell_bottom, cell_edges, edge_midpoint,
                 edge_bottom, h_eps, out):
    for j in range(U.shape[0]):
        xj = centroid[j, 0]
        yj = centroid[j, 1]
        # where the positivity factor is active, carry the cell velocity to the
        # edges instead of extrapolating discharges into a thin film
        hc = U[j, 0] - cell_bottom[j]
        const_u = alpha[j] < 1.0
        uc = U[j, 1] / hc if const_u and hc >= h_eps else 0.0
        vc = U[j, 2] / hc if const_u and hc >= h_eps else 0.0
        for k in range(3):
            e = cell_edges[j, k]
            dx = edge_midpoint[e, 0] - xj
            dy = edge_midpoint[e, 1] - yj
            wk = U[j, 0] + w_grad[j, 0] * dx + w_grad[j, 1] * dy
            b = edge_bottom[e]
            if wk < b:
                wk = b
            hk = wk - b
            if hk < h_eps:
                pk = 0.0
                qk = 0.0
            elif const_u:
                pk = hk * uc
                qk = hk * vc
            else:
                pk = U[j, 1] + grad[j, 1, 0] * dx + grad[j, 1, 1] * dy
                qk = U[j, 2] + grad[j, 2, 0] * dx + grad[j, 2, 1] * dy
            out[j, k, 0] = wk
            out[j, k, 1] = pk
            out[j, k, 2] = qk


def _as_3col(field):
    """``field`` as a contiguous (n, 3) array; single fields go in column 0."""
    U = np.asarray(field, dtype=float)
    if U.ndim == 1:
        out = np.zeros((U.shape[0], 3))
        out[:, 0] = U
        return out, True
    if U.shape[1] != 3:
        raise ValueError(f"expected a single field or (w, p, q) columns, got shape {U.shape}")
    return np.ascontiguousarray(U), False


def vertex_values(mesh: Mesh, field) -> np.ndarray:
    """Interpolate cell averages to vertices (exact for linear fields)."""
    U, flat = _as_3col(field)
    out = np.empty((mesh.n_vertices, 3))
    _vertex_values(U, mesh.vinterp_ptr, mesh.vinterp_idx, mesh.vinterp_wts, out)
    return out[:, 0] if flat else out


def green_gauss_gradients(mesh: Mesh, field) -> np.ndarray:
    """Unlimited Green-Gauss gradients; shape (nc, 2) or (nc, nvar, 2)."""
    U, flat = _as_3col(field)
    V = vertex_values(mesh, U)
    out = np.empty((mesh.n_cells, 3, 2))
    _green_gauss(V, mesh.triangles, mesh.cell_edges, mesh.edge_length, mesh.cell_normals,
                 mesh.cell_area, out)
    return out[:, 0] if flat else out


def limit_and_correct(mesh: Mesh, U, grad=None) -> CellGradient:
    """Limit the gradients of ``U = (w, p, q)`` and compute ``alpha``.

    ``grad`` defaults to the unlimited Green-Gauss gradients of ``U``. Passing
    the ``grad`` of a previous result leaves it unchanged (up to rounding).
    """
    U = np.ascontiguousarray(U, dtype=float)
    if grad is None:
        grad = green_gauss_gradients(mesh, U)
    grad = np.ascontiguousarray(grad, dtype=float)
    vmin = np.empty((mesh.n_vertices, U.shape[1]))
    vmax = np.empty_like(vmin)
    _vertex_bounds(U, mesh.vcell_ptr, mesh.vcell_idx, vmin, vmax)
    limited = np.empty_like(grad)
    _barth_jespersen(U, grad, mesh.triangles, vmin, vmax, mesh.cell_centroid, mesh.cell_edges,
                     mesh.edge_midpoint, mesh.edge_tags, limited)
    alpha = np.empty(mesh.n_cells)
    w_grad = np.empty((mesh.n_cells, 2))
    _positivity(U[:, 0], limited, mesh.cell_centroid, mesh.cell_bottom_grad, mesh.cell_edges,
                mesh.edge_midpoint, mesh.edge_bottom, alpha, w_grad)
    return CellGradient(limited, alpha, w_grad)


def positivity_factor(mesh: Mesh, w, grad_w) -> tuple[np.ndarray, np.ndarray]:
    """``alpha`` and the surface gradient actually used, for given ``w`` gradients.

    ``alpha`` is the largest factor in [0, 1] keeping ``w - B`` non-negative at
    all three edge midpoints. A cell whose mean surface lies below a midpoint
    bed value cannot satisfy this with any plane through its mean; it gets a
    constant-depth reconstruction (surface parallel to the bed, ``alpha = 0``).
    """
    w = np.ascontiguousarray(w, dtype=float)
    grad = np.zeros((mesh.n_cells, 1, 2))
    grad[:, 0] = np.asarray(grad_w, dtype=float)
    alpha = np.empty(mesh.n_cells)
    w_grad = np.empty((mesh.n_cells, 2))
    _positivity(w, grad, mesh.cell_centroid, mesh.cell_bottom_grad, mesh.cell_edges,
                mesh.edge_midpoint, mesh.edge_bottom, alpha, w_grad)
    return alpha, w_grad


def edge_states(mesh: Mesh, U, cg: CellGradient, h_eps: float = H_EPS) -> np.ndarray:
    """Reconstructed ``(w, p, q)`` at each cell's three edge midpoints, (nc, 3, 3).

    Depths are clamped to be non-negative; discharges vanish where the
    reconstructed depth is below ``h_eps``. In cells with ``alpha < 1`` the
    discharges are ``h_k * (p, q) / h`` (constant velocity) rather than
    linearly extrapolated.
    """
    U = np.ascontiguousarray(U, dtype=float)
    out = np.empty((mesh.n_cells, 3, 3))
    _edge_states(U, cg.grad, cg.w_grad, cg.alpha, mesh.cell_centroid, mesh.cell_bottom,
                 mesh.cell_edges, mesh.edge_midpoint, mesh.edge_bottom, h_eps, out)
    return out
