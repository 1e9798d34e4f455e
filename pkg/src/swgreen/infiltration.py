"""Green-Ampt infiltration for one- and two-layer soils.

All quantities are SI (m, s). ``Ic`` is always the *total* infiltrated depth,
so surface water lost equals ``Ic`` gained one for one.

In the upper layer (or a single layer) the capacity is
``Ks * ((psi + h_p) * dtheta / Ic + 1)`` and the ponded update over ``dt``
is the implicit Green-Ampt relation

    Ic1 = Ic0 + Ks dt + M ln((M + Ic1) / (M + Ic0)),   M = dtheta (psi + h_p).

Once the wetting front passes the upper-layer thickness ``d1`` the same
relation holds in ``J = dtheta2 * d_f`` with conductivity ``K2``,
``M = dtheta2 (psi2 + h_p)`` inside the logarithm and coefficient
``A = dtheta2 (psi2 + h_p - d1 (K2/K1 - 1))`` in front of it; this is the exact
integral of the two-layer capacity ODE. ``Ic = J + d1 (dtheta1 - dtheta2)``.
A step that crosses ``d1`` is split at the crossing time, which the
upper-layer relation gives in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .constants import CM_PER_H, MM_PER_H
from .errors import ConfigError, NumericalError

__all__ = [
    "SoilLayer",
    "SoilModel",
    "InfiltrationState",
    "SOIL_PRESETS",
    "soil_preset",
    "capacity_one_layer",
    "advance_one_layer",
    "effective_conductivity",
    "capacity_two_layer",
    "advance_two_layer",
    "capacity",
    "step_infiltration_cell",
    "step_infiltration",
]

TOL = 1e-12  # absolute tolerance on Ic [m]
MAX_ITER = 100


@dataclass(frozen=True)
class SoilLayer:
    """Green-Ampt parameters: ``Ks`` [m/s], suction ``psi`` [m], ``dtheta`` [-]."""

    Ks: float
    psi: float
    dtheta: float

    def __post_init__(self):
        if not self.Ks > 0:
            raise ConfigError(f"Ks must be positive, got {self.Ks}")
        if not self.psi >= 0:
            raise ConfigError(f"psi must be non-negative, got {self.psi}")
        if not 0 < self.dtheta < 1:
            raise ConfigError(f"dtheta must lie in (0, 1), got {self.dtheta}")


@dataclass(frozen=True)
class SoilModel:
    """One layer (``lower is None``) or an upper layer of thickness ``d1`` over ``lower``."""

    upper: SoilLayer
    lower: SoilLayer | None = None
    d1: float | None = None

    def __post_init__(self):
        if self.lower is not None and not (self.d1 is not None and self.d1 > 0):
            raise ConfigError(f"two-layer soil needs d1 > 0, got {self.d1}")

    @classmethod
    def one_layer(cls, layer: SoilLayer) -> "SoilModel":
        return cls(layer)

    @classmethod
    def two_layer(cls, upper: SoilLayer, lower: SoilLayer, d1: float) -> "SoilModel":
        return cls(upper, lower, d1)

    @property
    def is_two_layer(self) -> bool:
        return self.lower is not None

    def front_depth(self, Ic):
        Ic = np.asarray(Ic, dtype=float)
        if not self.is_two_layer:
            return Ic / self.upper.dtheta
        cap1 = self.d1 * self.upper.dtheta
        return np.where(Ic <= cap1, Ic / self.upper.dtheta, self.d1 + (Ic - cap1) / self.lower.dtheta)

    def kernel_args(self):
        up = self.upper
        lo = self.lower if self.lower is not None else up
        d1 = self.d1 if self.d1 is not None else np.inf
        return up.Ks, up.psi, up.dtheta, lo.Ks, lo.psi, lo.dtheta, float(d1), self.is_two_layer


@dataclass
class InfiltrationState:
    """Per-cell cumulative infiltration ``Ic`` [m] (non-decreasing)."""

    Ic: np.ndarray
    model: SoilModel | None = field(default=None)

    @classmethod
    def zeros(cls, n, model=None):
        return cls(np.zeros(n), model)

    @property
    def d_f(self) -> np.ndarray:
        if self.model is None:
            return np.zeros_like(self.Ic)
        return self.model.front_depth(self.Ic)


SOIL_PRESETS = {
    "silt_loam": SoilLayer(Ks=0.65 * CM_PER_H, psi=0.167, dtheta=0.340),
    "sandy_loam": SoilLayer(Ks=1.09 * CM_PER_H, psi=0.1101, dtheta=0.247),
    # complex-basin soil: Ks = 7 mm/h, psi = 50 mm
    "basin": SoilLayer(Ks=7.0 * MM_PER_H, psi=0.050, dtheta=0.125),
}


def soil_preset(name: str) -> SoilModel:
    """Named soils; ``two_layer`` is sandy loam (1 mm) over silt loam."""
    if name == "two_layer":
        return SoilModel.two_layer(SOIL_PRESETS["sandy_loam"], SOIL_PRESETS["silt_loam"], 0.001)
    try:
        return SoilModel.one_layer(SOIL_PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown soil preset {name!r}; known: {sorted(SOIL_PRESETS) + ['two_layer']}") from None


# --- scalar kernels -----------------------------------------------------------

@njit(cache=True, error_model="numpy")
def _solve_increment(K, dt, A, D):
    """Root ``y >= 0`` of ``y - K dt - A log1p(y / D)``.

    Safeguarded Newton started from the step-start rate: the function is
    negative at 0 and increasing, convex for ``A > 0`` and concave for
    ``A < 0``; steps leaving the bracket fall back to bisection.
    """
    if dt <= 0.0:
        return 0.0
    Kdt = K * dt
    if A == 0.0 or D <= 0.0:
        return Kdt
    lo = 0.0
    hi = Kdt if A < 0.0 else np.inf
    # the rate at the start of the step, K / f'(0), is within O(dt^2) of the root
    fp0 = 1.0 - A / D
    y = min(Kdt / fp0, hi) if fp0 > 0.0 else Kdt + math.sqrt(2.0 * A * Kdt)
    for _ in range(MAX_ITER):
        f = y - Kdt - A * math.log1p(y / D)
        if f > 0.0:
            hi = y
        else:
            lo = y
        fp = 1.0 - A / (D + y)
        y_new = y - f / fp if fp > 0.0 else -1.0
        if lo < y_new < hi:
            # error left after a Newton step is about |f''| / (2 f') * step^2
            step = y_new - y
            curv = abs(A) / ((D + y) * (D + y))
            if 0.5 * curv / fp * step * step <= 1e-16 * y_new:
                return y_new
        else:
            y_new = 0.5 * (lo + hi) if hi < np.inf else 2.0 * max(y, Kdt)
        if abs(y_new - y) <= 1e-3 * TOL + 1e-14 * y or hi - lo <= 1e-3 * TOL:
            return y_new
        y = y_new
    return -1.0


@njit(cache=True, error_model="numpy")
def _capacity(h, Ic, K1, psi1, th1, K2, psi2, th2, d1, two):
    if Ic <= 0.0:
        return np.inf
    if not two or Ic <= d1 * th1:
        return K1 * ((psi1 + h) * th1 / Ic + 1.0)
    df = d1 + (Ic - d1 * th1) / th2
    Ke = df / (d1 / K1 + (df - d1) / K2)
    return Ke * ((psi2 + h) / df + 1.0)


@njit(cache=True, error_model="numpy")
def _advance(h, Ic, dt, K1, psi1, th1, K2, psi2, th2, d1, two):
    """Ponded cumulative infiltration after ``dt`` (negative on solver failure)."""
    if dt <= 0.0:
        return Ic
    cap1 = d1 * th1
    if not two or Ic < cap1:
        M = th1 * (psi1 + h)
        if two:
            rem = cap1 - Ic
            t_cross = (rem - M * math.log1p(rem / (M + Ic))) / K1 if M + Ic > 0.0 else rem / K1
            if t_cross < dt:
                dt -= t_cross
                Ic = cap1
            else:
                y = _solve_increment(K1, dt, M, M + Ic)
                return Ic + y if y >= 0.0 else -1.0
        else:
            y = _solve_increment(K1, dt, M, M + Ic)
            return Ic + y if y >= 0.0 else -1.0
    shift = d1 * (th1 - th2)
    J = Ic - shift
    C = th2 * (psi2 + h)
    A = th2 * (psi2 + h - d1 * (K2 / K1 - 1.0))
    y = _solve_increment(K2, dt, A, C + J)
    if y < 0.0:
        return -1.0
    return Ic + y


@njit(cache=True, error_model="numpy")
def _step_cell(R, h, Ic, dt, K1, psi1, th1, K2, psi2, th2, d1, two):
    if h < 0.0:
        h = 0.0
    Ir = _capacity(h, Ic, K1, psi1, th1, K2, psi2, th2, d1, two)
    if R > Ir or h > 0.0:
        # ponded: capacity limited, and never more than the standing water
        Ic_adv = _advance(h, Ic, dt, K1, psi1, th1, K2, psi2, th2, d1, two)
        if Ic_adv < 0.0:
            return -1.0, Ic
        I = min(h / dt, (Ic_adv - Ic) / dt)
    else:
        I = R
    return I, Ic + I * dt


@njit(cache=True, error_model="numpy")
def _step_cells(R, h, Ic, dt, K1, psi1, th1, K2, psi2, th2, d1, two, I_out, Ic_out):
    for j in range(h.shape[0]):
        I, Icn = _step_cell(R[j], h[j], Ic[j], dt, K1, psi1, th1, K2, psi2, th2, d1, two)
        if I < 0.0:
            return j
        I_out[j] = I
        Ic_out[j] = Icn
    return -1


# --- public API ---------------------------------------------------------------

def _one(layer: SoilLayer):
    return layer.Ks, layer.psi, layer.dtheta, layer.Ks, layer.psi, layer.dtheta, np.inf, False


def capacity_one_layer(layer: SoilLayer, h_p: float, Ic: float) -> float:
    """Infiltration capacity [m/s]; ``inf`` at ``Ic == 0``."""
    return _capacity(float(h_p), float(Ic), *_one(layer))


def advance_one_layer(layer: SoilLayer, h_p: float, Ic: float, dt: float) -> float:
    """Cumulative infiltration after ``dt`` seconds of ponding at depth ``h_p``."""
    out = _advance(float(h_p), float(Ic), float(dt), *_one(layer))
    if out < 0:
        raise NumericalError(f"Green-Ampt solve failed (h_p={h_p}, Ic={Ic}, dt={dt})")
    return out


def effective_conductivity(model: SoilModel, d_f: float) -> float:
    """Thickness-weighted harmonic conductivity above the wetting front."""
    K1 = model.upper.Ks
    if not model.is_two_layer or d_f <= model.d1:
        return K1
    K2 = model.lower.Ks
    return d_f / (model.d1 / K1 + (d_f - model.d1) / K2)


def capacity_two_layer(model: SoilModel, h_p: float, Ic: float) -> float:
    """Two-layer capacity ``Ke ((psi + h_p) / d_f + 1)`` with ``psi`` of the front's layer."""
    return _capacity(float(h_p), float(Ic), *model.kernel_args())


capacity = capacity_two_layer


def advance_two_layer(model: SoilModel, h_p: float, Ic: float, dt: float) -> float:
    out = _advance(float(h_p), float(Ic), float(dt), *model.kernel_args())
    if out < 0:
        raise NumericalError(f"Green-Ampt solve failed (h_p={h_p}, Ic={Ic}, dt={dt})")
    return out


def step_infiltration_cell(R: float, h: float, model: SoilModel, Ic: float, dt: float) -> tuple[float, float]:
    """Infiltration rate over the step and the updated ``Ic`` for one cell.

    With standing water or rain above capacity the rate is the ponded
    capacity, capped at ``h / dt``; otherwise all rain infiltrates. ``Ic``
    always grows by exactly ``rate * dt``.
    """
    I, Icn = _step_cell(float(R), float(h), float(Ic), float(dt), *model.kernel_args())
    if I < 0:
        raise NumericalError(f"Green-Ampt solve failed (h={h}, Ic={Ic}, dt={dt})")
    return I, Icn


def step_infiltration(R, h, model: SoilModel | None, Ic, dt):
    """Vectorised :func:`step_infiltration_cell`; returns ``(I, Ic_new)`` arrays."""
    R = np.ascontiguousarray(np.broadcast_to(np.asarray(R, dtype=float), np.shape(h)))
    h = np.ascontiguousarray(h, dtype=float)
    Ic = np.ascontiguousarray(Ic, dtype=float)
    if model is None:
        return np.zeros_like(h), Ic.copy()
    I = np.empty_like(h)
    Icn = np.empty_like(h)
    bad = _step_cells(R, h, Ic, float(dt), *model.kernel_args(), I, Icn)
    if bad >= 0:
        raise NumericalError(f"Green-Ampt solve failed in cell {bad} (h={h[bad]}, Ic={Ic[bad]}, dt={dt})")
    return I, Icn
