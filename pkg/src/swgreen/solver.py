"""Explicit time integration of the coupled surface/subsurface model.

One step of length ``dt``:

1. infiltration rates and the new cumulative infiltration are computed from
   the step-start depth and frozen for the step;
2. two-stage SSP Runge-Kutta (Heun) on the finite-volume right-hand side,
   with point-implicit Manning friction applied after each Euler update;
3. negative depths are clamped (the added water is booked in the ledger)
   and discharges are zeroed in cells thinner than ``h_eps``;
4. the mass ledger is updated.

The right-hand side of cell ``j`` is

    dU_j/dt = (1/|E_j|) sum_k l_jk F_jk . n_jk  +  S_bed,j  +  (R_j - I_j, 0, 0)

with inward normals ``n_jk``; each edge flux is computed once and shared by
its two cells, and the hydrostatic part of the bed-slope source is added
edge by edge so that still water produces exactly zero tendency.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit

from .constants import CFL, DT_MAX, GRAVITY, H_EPS, OUTFLOW, U_MAX, WALL
from .errors import ConfigError, NumericalError, SimulationAborted
from .infiltration import SoilModel, _step_cells
from .mesh import Mesh
from .reconstruction import (
    _barth_jespersen,
    _edge_states,
    _green_gauss,
    _positivity,
    _vertex_bounds,
    _vertex_values,
)
from .riemann import _hll
from .sources import _friction

__all__ = [
    "FlowField",
    "MassLedger",
    "RainSchedule",
    "Simulation",
    "compute_dt",
    "apply_boundary",
    "rhs",
    "outlet_discharge",
]

log = logging.getLogger(__name__)


@dataclass
class FlowField:
    """Cell averages of surface elevation and discharges at time ``t``."""

    w: np.ndarray
    p: np.ndarray
    q: np.ndarray
    t: float = 0.0

    @classmethod
    def from_U(cls, U, t=0.0):
        U = np.asarray(U, dtype=float)
        return cls(U[:, 0].copy(), U[:, 1].copy(), U[:, 2].copy(), t)

    @classmethod
    def at_rest(cls, mesh: Mesh, level: float) -> "FlowField":
        """Still water at elevation ``level``; cells whose bed is higher stay dry."""
        w = np.maximum(np.full(mesh.n_cells, float(level)), mesh.cell_bottom)
        return cls(w, np.zeros(mesh.n_cells), np.zeros(mesh.n_cells))

    @classmethod
    def from_depth(cls, mesh: Mesh, h) -> "FlowField":
        h = np.broadcast_to(np.asarray(h, dtype=float), (mesh.n_cells,))
        if np.any(h < 0):
            raise ConfigError("initial depth must be non-negative")
        return cls(mesh.cell_bottom + h, np.zeros(mesh.n_cells), np.zeros(mesh.n_cells))

    @property
    def U(self) -> np.ndarray:
        return np.column_stack([self.w, self.p, self.q])

    def depth(self, mesh: Mesh) -> np.ndarray:
        return self.w - mesh.cell_bottom

    def velocity(self, mesh: Mesh, h_eps: float = H_EPS):
        h = self.depth(mesh)
        wet = h >= h_eps
        u = np.zeros_like(h)
        v = np.zeros_like(h)
        u[wet] = self.p[wet] / h[wet]
        v[wet] = self.q[wet] / h[wet]
        return u, v


@dataclass
class MassLedger:
    """Water volumes [m^3]; ``residual`` should stay at rounding level."""

    initial_volume: float
    surface_volume: float
    infiltrated_volume: float
    rain_in: float = 0.0
    outflow_out: float = 0.0
    clamp_correction: float = 0.0

    @property
    def residual(self) -> float:
        return (self.surface_volume + self.infiltrated_volume + self.outflow_out
                - self.initial_volume - self.rain_in - self.clamp_correction)

    @property
    def relative_residual(self) -> float:
        scale = max(self.initial_volume + self.rain_in, 1e-300)
        return abs(self.residual) / scale

    def row(self, t: float) -> tuple:
        return (t, self.surface_volume, self.infiltrated_volume, self.rain_in,
                self.outflow_out, self.clamp_correction, self.residual)


class RainSchedule:
    """Piecewise-constant uniform rainfall from ``(t_start, t_end, rate)`` intervals."""

    def __init__(self, intervals: Sequence[tuple[float, float, float]] = ()):
        ivs = sorted((float(a), float(b), float(r)) for a, b, r in intervals)
        for a, b, r in ivs:
            if not (0 <= a < b) or r < 0:
                raise ConfigError(f"bad rain interval ({a}, {b}, {r})")
        for (a0, b0, _), (a1, _, _) in zip(ivs, ivs[1:]):
            if a1 < b0:
                raise ConfigError(f"rain intervals overlap at t = {a1}")
        self.intervals = ivs

    def __call__(self, t: float) -> float:
        for a, b, r in self.intervals:
            if a <= t < b:
                return r
        return 0.0

    @property
    def breakpoints(self) -> list[float]:
        return sorted({x for a, b, _ in self.intervals for x in (a, b)})

    def volume_depth(self, t0: float, t1: float) -> float:
        """Rain depth [m] falling in ``[t0, t1]``."""
        return sum(r * max(0.0, min(b, t1) - max(a, t0)) for a, b, r in self.intervals)


# --- kernels ------------------------------------------------------------------

@njit(cache=True, error_model="numpy")
def _ghost(wL, pL, qL, nx, ny, tag):
    """Ghost state across a boundary edge with outward normal ``(nx, ny)``.

    WALL reflects the normal discharge. OUTFLOW copies the interior state
    while water leaves, and reflects like a wall if the interior discharge
    points into the domain: a transmissive ghost would keep feeding inflow
    momentum back into the cell.
    """
    m = pL * nx + qL * ny
    if tag == 0 or m < 0.0:
        return wL, pL - 2.0 * m * nx, qL - 2.0 * m * ny
    return wL, pL, qL


@njit(cache=True, error_model="numpy")
def _edge_fluxes(states, edge_cells, edge_local, edge_tags, edge_normal, edge_bottom, edge_length,
                 g, h_eps, flux):
    """HLL flux along each edge normal (out of the left cell); returns outflow rate [m^3/s]."""
    out_rate = 0.0
    for e in range(edge_cells.shape[0]):
        L = edge_cells[e, 0]
        kL = edge_local[e, 0]
        wL = states[L, kL, 0]
        pL = states[L, kL, 1]
        qL = states[L, kL, 2]
        nx = edge_normal[e, 0]
        ny = edge_normal[e, 1]
        R = edge_cells[e, 1]
        tag = edge_tags[e]
        if R >= 0:
            kR = edge_local[e, 1]
            wR = states[R, kR, 0]
            pR = states[R, kR, 1]
            qR = states[R, kR, 2]
        else:
            wR, pR, qR = _ghost(wL, pL, qL, nx, ny, tag)
        f0, f1, f2 = _hll(wL, pL, qL, wR, pR, qR, edge_bottom[e], nx, ny, g, h_eps)
        if tag == 0:
            # a reflected state carries no mass; pin it so the ledger closes exactly
            f0 = 0.0
        elif tag == 1:
            out_rate += f0 * edge_length[e]
        flux[e, 0] = f0
        flux[e, 1] = f1
        flux[e, 2] = f2
    return out_rate


@njit(cache=True, error_model="numpy")
def _accumulate(U, states, flux, w_grad, cell_edges, cell_side, cell_normals, cell_bottom,
                edge_length, edge_bottom, area, mass_src, g, dU):
    for j in range(U.shape[0]):
        a0 = 0.0
        a1 = 0.0
        a2 = 0.0
        for k in range(3):
            e = cell_edges[j, k]
            l = edge_length[e]
            s = 1.0 if cell_side[j, k] == 1 else -1.0
            nx = cell_normals[j, k, 0]
            ny = cell_normals[j, k, 1]
            h = states[j, k, 0] - edge_bottom[e]
            c = 0.5 * g * h * h
            a0 += l * (s * flux[e, 0])
            a1 += l * (s * flux[e, 1] - c * nx)
            a2 += l * (s * flux[e, 2] - c * ny)
        hc = U[j, 0] - cell_bottom[j]
        if hc < 0.0:
            hc = 0.0
        dU[j, 0] = a0 / area[j] + mass_src[j]
        dU[j, 1] = a1 / area[j] - g * w_grad[j, 0] * hc
        dU[j, 2] = a2 / area[j] - g * w_grad[j, 1] * hc


@njit(cache=True, error_model="numpy")
def _min_dt(U, cell_bottom, inradius, g, h_eps):
    best = np.inf
    for j in range(U.shape[0]):
        h = U[j, 0] - cell_bottom[j]
        if h >= h_eps:
            u = U[j, 1] / h
            v = U[j, 2] / h
            c = np.sqrt(u * u + v * v) + np.sqrt(g * h)
            dt = inradius[j] / c
            if dt < best:
                best = dt
    return best


@njit(cache=True, error_model="numpy")
def _clamp(U, cell_bottom, area, h_eps):
    added = 0.0
    for j in range(U.shape[0]):
        h = U[j, 0] - cell_bottom[j]
        if h < 0.0:
            added -= h * area[j]
            U[j, 0] = cell_bottom[j]
            h = 0.0
        if h < h_eps:
            U[j, 1] = 0.0
            U[j, 2] = 0.0
    return added


@njit(cache=True, error_model="numpy")
def _health(U, cell_bottom, h_eps, u_max):
    """Index of the first cell with a non-finite value or speed above ``u_max``."""
    for j in range(U.shape[0]):
        if not (np.isfinite(U[j, 0]) and np.isfinite(U[j, 1]) and np.isfinite(U[j, 2])):
            return j, 0
        h = U[j, 0] - cell_bottom[j]
        if h >= h_eps:
            sp = np.sqrt(U[j, 1] * U[j, 1] + U[j, 2] * U[j, 2]) / h
            if sp > u_max:
                return j, 1
    return -1, 0


def _mesh_arrays(mesh: Mesh) -> tuple:
    return (mesh.vinterp_ptr, mesh.vinterp_idx, mesh.vinterp_wts, mesh.vcell_ptr, mesh.vcell_idx,
            mesh.triangles, mesh.cell_edges, mesh.cell_side, mesh.cell_normals, mesh.cell_area,
            mesh.cell_centroid, mesh.cell_bottom, mesh.cell_bottom_grad, mesh.cell_inradius,
            mesh.edge_cells, mesh.edge_local, mesh.edge_tags, mesh.edge_normal, mesh.edge_bottom,
            mesh.edge_length, mesh.edge_midpoint)


def _workspace(mesh: Mesh) -> tuple:
    nc, nv, ne = mesh.n_cells, mesh.n_vertices, mesh.n_edges
    return (np.empty((nv, 3)), np.empty((nv, 3)), np.empty((nv, 3)), np.empty((nc, 3, 2)),
            np.empty((nc, 3, 2)), np.empty(nc), np.empty((nc, 2)), np.empty((nc, 3, 3)),
            np.empty((ne, 3)))


def _scratch(nc: int) -> tuple:
    return (np.empty((nc, 3)), np.empty((nc, 3)), np.empty((nc, 3)), np.empty(nc), np.empty(nc),
            np.empty(nc), np.empty(nc), np.empty(nc))


@njit(cache=True, error_model="numpy")
def _reconstruct(M, W, U, h_eps):
    (vptr, vidx, vwts, cptr, cidx, tri, cell_edges, cell_side, cell_normals, area, centroid,
     cell_bottom, cell_bottom_grad, inradius, edge_cells, edge_local, edge_tags, edge_normal,
     edge_bottom, edge_length, edge_midpoint) = M
    V, vmin, vmax, grad, lim, alpha, w_grad, states, flux = W
    _vertex_values(U, vptr, vidx, vwts, V)
    _vertex_bounds(U, cptr, cidx, vmin, vmax)
    _green_gauss(V, tri, cell_edges, edge_length, cell_normals, area, grad)
    _barth_jespersen(U, grad, tri, vmin, vmax, centroid, cell_edges, edge_midpoint, edge_tags, lim)
    _positivity(U[:, 0], lim, centroid, cell_bottom_grad, cell_edges, edge_midpoint, edge_bottom,
                alpha, w_grad)
    _edge_states(U, lim, w_grad, alpha, centroid, cell_bottom, cell_edges, edge_midpoint,
                 edge_bottom, h_eps, states)


@njit(cache=True, error_model="numpy")
def _rhs(M, W, U, mass_src, g, h_eps, dU):
    """Tendencies into ``dU``; returns the outflow rate [m^3/s]."""
    (vptr, vidx, vwts, cptr, cidx, tri, cell_edges, cell_side, cell_normals, area, centroid,
     cell_bottom, cell_bottom_grad, inradius, edge_cells, edge_local, edge_tags, edge_normal,
     edge_bottom, edge_length, edge_midpoint) = M
    V, vmin, vmax, grad, lim, alpha, w_grad, states, flux = W
    _reconstruct(M, W, U, h_eps)
    out_rate = _edge_fluxes(states, edge_cells, edge_local, edge_tags, edge_normal, edge_bottom,
                            edge_length, g, h_eps, flux)
    _accumulate(U, states, flux, w_grad, cell_edges, cell_side, cell_normals, cell_bottom,
                edge_length, edge_bottom, area, mass_src, g, dU)
    return out_rate


@njit(cache=True, error_model="numpy")
def _run(M, W, S, U, Ic, R, soil, has_soil, manning, cfl, h_eps, u_max, dt_max, g,
         t, t_stop, max_steps, dt_fixed):
    """Take up to ``max_steps`` steps at constant rain ``R`` without passing ``t_stop``.

    Returns ``(t, steps, rain_volume, outflow_volume, clamp_volume, status, cell)``;
    ``status`` is 0 (ok), 1 (non-finite), 2 (speed above u_max) or 3 (infiltration
    solve failed), in which case ``U``/``Ic`` hold the last good state.
    """
    K1, psi1, th1, K2, psi2, th2, d1, two = soil
    cell_bottom = M[11]
    area = M[9]
    inradius = M[13]
    k, U1, Ue, Rv, h, I, Icn, src = S
    nc = U.shape[0]
    total_area = 0.0
    for j in range(nc):
        total_area += area[j]
    rain_v = 0.0
    out_v = 0.0
    clamp_v = 0.0
    n = 0
    while n < max_steps and t < t_stop:
        if dt_fixed > 0.0:
            dt = dt_fixed
        else:
            dt = min(cfl * _min_dt(U, cell_bottom, inradius, g, h_eps), dt_max)
        last = False
        if dt >= t_stop - t:
            dt = t_stop - t
            last = True

        if has_soil:
            for j in range(nc):
                Rv[j] = R
                h[j] = U[j, 0] - cell_bottom[j]
            bad = _step_cells(Rv, h, Ic, dt, K1, psi1, th1, K2, psi2, th2, d1, two, I, Icn)
            if bad >= 0:
                return t, n, rain_v, out_v, clamp_v, 3, bad
            for j in range(nc):
                src[j] = R - I[j]
        else:
            for j in range(nc):
                src[j] = R
                Icn[j] = Ic[j]

        out1 = _rhs(M, W, U, src, g, h_eps, k)
        for j in range(nc):
            for m in range(3):
                U1[j, m] = U[j, m] + dt * k[j, m]
        _friction(U1, cell_bottom, manning, dt, g, h_eps)
        out2 = _rhs(M, W, U1, src, g, h_eps, k)
        for j in range(nc):
            for m in range(3):
                U1[j, m] = U1[j, m] + dt * k[j, m]
        _friction(U1, cell_bottom, manning, dt, g, h_eps)
        for j in range(nc):
            for m in range(3):
                Ue[j, m] = 0.5 * (U[j, m] + U1[j, m])
        added = _clamp(Ue, cell_bottom, area, h_eps)
        bad, why = _health(Ue, cell_bottom, h_eps, u_max)
        if bad >= 0:
            return t, n, rain_v, out_v, clamp_v, 1 + why, bad

        for j in range(nc):
            U[j, 0] = Ue[j, 0]
            U[j, 1] = Ue[j, 1]
            U[j, 2] = Ue[j, 2]
            Ic[j] = Icn[j]
        rain_v += dt * R * total_area
        out_v += 0.5 * dt * (out1 + out2)
        clamp_v += added
        t = t_stop if last else t + dt
        n += 1
    return t, n, rain_v, out_v, clamp_v, 0, -1


# --- public functions ---------------------------------------------------------

def _as_U(field_or_U):
    if isinstance(field_or_U, FlowField):
        return np.ascontiguousarray(field_or_U.U)
    return np.ascontiguousarray(field_or_U, dtype=float)


def compute_dt(mesh: Mesh, field, cfl: float = CFL, dt_max: float = DT_MAX,
               g: float = GRAVITY, h_eps: float = H_EPS) -> float:
    """``cfl * min(inradius / (|u| + sqrt(g h)))`` over wet cells, capped at ``dt_max``."""
    U = _as_U(field)
    best = _min_dt(U, mesh.cell_bottom, mesh.cell_inradius, g, h_eps)
    return float(min(cfl * best, dt_max))


def rhs(mesh: Mesh, field, rain_rate=0.0, infiltration_rates=0.0,
        g: float = GRAVITY, h_eps: float = H_EPS) -> np.ndarray:
    """Semi-discrete tendencies ``dU/dt`` of shape (nc, 3); friction excluded."""
    U = _as_U(field)
    src = np.ascontiguousarray(np.broadcast_to(
        np.asarray(rain_rate, dtype=float) - np.asarray(infiltration_rates, dtype=float), (mesh.n_cells,)))
    dU = np.empty_like(U)
    _rhs(_mesh_arrays(mesh), _workspace(mesh), U, src, g, h_eps, dU)
    bad = np.flatnonzero(~np.isfinite(dU).all(axis=1))
    if len(bad):
        j = int(bad[0])
        raise SimulationAborted(f"non-finite tendency in cell {j} (edges {mesh.cell_edges[j].tolist()})", cell=j)
    return dU


def apply_boundary(mesh: Mesh, state, edge: int) -> np.ndarray:
    """Ghost state across boundary ``edge`` for the interior state ``(w, p, q)``."""
    tag = int(mesh.edge_tags[edge])
    if mesh.edge_cells[edge, 1] >= 0:
        raise ConfigError(f"edge {edge} is not a boundary edge")
    if tag not in (WALL, OUTFLOW):
        raise ConfigError(f"edge {edge} has unknown boundary tag {tag}")
    w, p, q = (float(x) for x in state)
    nx, ny = mesh.edge_normal[edge]
    return np.array(_ghost(w, p, q, float(nx), float(ny), tag))


def outlet_discharge(mesh: Mesh, field, h_eps: float = H_EPS) -> float:
    """Discharge [m^3/s] leaving through OUTFLOW edges, from reconstructed edge states.

    Edges whose interior discharge points inward count as zero.
    """
    edges = mesh.edges_with_tag(OUTFLOW)
    if len(edges) == 0:
        raise ConfigError("mesh has no OUTFLOW edges")
    U = _as_U(field)
    ws = _workspace(mesh)
    _reconstruct(_mesh_arrays(mesh), ws, U, h_eps)
    cells = mesh.edge_cells[edges, 0]
    st = ws[7][cells, mesh.edge_local[edges, 0]]
    n = mesh.edge_normal[edges]
    # an outlet admits no inflow (see _ghost), so inward edges contribute nothing
    qn = np.maximum(st[:, 1] * n[:, 0] + st[:, 2] * n[:, 1], 0.0)
    return float(np.sum(qn * mesh.edge_length[edges]))


class Simulation:
    """Owns the evolving state of one run.

    Parameters
    ----------
    mesh : Mesh
    field : FlowField
        Initial condition (copied).
    soil : SoilModel, optional
        ``None`` disables infiltration.
    rain : RainSchedule or callable ``t -> rate`` [m/s], optional
    manning : float
        Manning coefficient [s m^-1/3].
    """

    def __init__(self, mesh: Mesh, field: FlowField, *, soil: SoilModel | None = None,
                 rain: RainSchedule | Callable[[float], float] | None = None, manning: float = 0.0,
                 cfl: float = CFL, h_eps: float = H_EPS, u_max: float = U_MAX, dt_max: float = DT_MAX,
                 g: float = GRAVITY, Ic=None):
        if manning < 0:
            raise ConfigError(f"manning must be non-negative, got {manning}")
        if not cfl > 0:
            raise ConfigError(f"cfl must be positive, got {cfl}")
        self.mesh = mesh
        self.U = np.ascontiguousarray(field.U, dtype=float)
        self.t = float(field.t)
        self.soil = soil
        self.rain = rain if rain is not None else RainSchedule()
        self.manning = float(manning)
        self.cfl, self.h_eps, self.u_max, self.dt_max, self.g = cfl, h_eps, u_max, dt_max, g
        self.Ic = np.zeros(mesh.n_cells) if Ic is None else np.array(Ic, dtype=float)
        self.n_steps = 0
        self._M = _mesh_arrays(mesh)
        self._W = _workspace(mesh)
        self._S = _scratch(mesh.n_cells)
        if soil is None:
            self._soil, self._has_soil = (1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, False), False
        else:
            K1, psi1, th1, K2, psi2, th2, d1, two = soil.kernel_args()
            self._soil = (float(K1), float(psi1), float(th1), float(K2), float(psi2), float(th2),
                          float(d1), bool(two))
            self._has_soil = True
        h = self.depth
        if np.any(h < -1e-12):
            raise ConfigError("initial surface lies below the bed")
        self.U[:, 0] = np.maximum(self.U[:, 0], mesh.cell_bottom)
        v0 = self.surface_volume() + self.infiltrated_volume()
        self.ledger = MassLedger(v0, self.surface_volume(), self.infiltrated_volume())

    # --- diagnostics
    @property
    def depth(self) -> np.ndarray:
        return self.U[:, 0] - self.mesh.cell_bottom

    @property
    def field(self) -> FlowField:
        return FlowField.from_U(self.U, self.t)

    def surface_volume(self) -> float:
        return float(np.dot(self.depth, self.mesh.cell_area))

    def infiltrated_volume(self) -> float:
        return float(np.dot(self.Ic, self.mesh.cell_area))

    def rain_rate(self, t: float) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.rain(t), dtype=float), (self.mesh.n_cells,))

    def outlet_discharge(self) -> float:
        return outlet_discharge(self.mesh, self.U, self.h_eps)

    @property
    def breakpoints(self) -> list[float]:
        return list(getattr(self.rain, "breakpoints", []))

    def compute_dt(self) -> float:
        return compute_dt(self.mesh, self.U, self.cfl, self.dt_max, self.g, self.h_eps)

    # --- stepping
    def _run(self, t_stop: float, max_steps: int, dt_fixed: float = 0.0) -> int:
        R = float(self.rain(self.t))
        t, n, rain_v, out_v, clamp_v, status, cell = _run(
            self._M, self._W, self._S, self.U, self.Ic, R, self._soil, self._has_soil,
            self.manning, self.cfl, self.h_eps, self.u_max, self.dt_max, self.g,
            self.t, float(t_stop), int(max_steps), float(dt_fixed))
        self.t = t
        self.n_steps += n
        led = self.ledger
        led.rain_in += rain_v
        led.outflow_out += out_v
        led.clamp_correction += clamp_v
        led.surface_volume = self.surface_volume()
        led.infiltrated_volume = self.infiltrated_volume()
        if status == 3:
            raise NumericalError(
                f"Green-Ampt solve failed in cell {cell} at t = {t:.6g} s "
                f"(h = {self.depth[cell]:.6g}, Ic = {self.Ic[cell]:.6g})")
        if status:
            reason = "non-finite state" if status == 1 else f"speed above u_max = {self.u_max} m/s"
            raise SimulationAborted(
                f"{reason} in cell {cell} during the step from t = {t:.6g} s "
                f"(last good w, p, q = {self.U[cell].tolist()}, bed = {self.mesh.cell_bottom[cell]:.6g})",
                t=t, cell=int(cell))
        return n

    def step(self, dt: float | None = None) -> float:
        """Advance one step of ``dt`` (default: the CFL step). Returns the step taken."""
        if dt is not None and not dt > 0:
            raise ValueError(f"time step must be positive, got {dt}")
        t0 = self.t
        if dt is None:
            self._run(np.inf, 1)
        else:
            self._run(t0 + dt, 1, dt)
        return self.t - t0

    def advance_to(self, t_target: float, callback=None) -> None:
        """Step until ``t == t_target`` exactly, landing on rain breakpoints.

        ``callback(sim)`` runs after every step; without one the steps between
        breakpoints run in a single compiled loop.
        """
        marks = [b for b in self.breakpoints if self.t < b < t_target]
        for stop in marks + [t_target]:
            while self.t < stop:
                if callback is None and isinstance(self.rain, RainSchedule):
                    self._run(stop, 2**62)
                else:
                    self._run(stop, 1)
                    if callback is not None:
                        callback(self)
