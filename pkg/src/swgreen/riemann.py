"""Rotated shallow-water fluxes and the HLL numerical flux.

States are conserved triples ``(w, p, q)``: surface elevation and the two
unit-width discharges. Both sides of an edge share one bed value, so the
depth on either side is ``w - b_edge``.

The scalar kernels (``_flux``, ``_speeds``, ``_hll``) are jitted and reused
by the edge loop in :mod:`swgreen.solver`; the public functions wrap them
for single states or ``(N, 3)`` batches.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from .constants import GRAVITY, H_EPS
from .errors import NumericalError

__all__ = ["physical_flux_normal", "wave_speeds", "hll_flux"]


@njit(cache=True, error_model="numpy", inline="always")
def _flux(w, p, q, b, nx, ny, g, h_eps):
    h = w - b
    if h < 0.0:
        h = 0.0
    c = 0.5 * g * h * h
    if h < h_eps:
        # velocities (and hence discharges) vanish; hydrostatic pressure stays
        return 0.0, c * nx, c * ny
    m = p * nx + q * ny
    un = m / h
    return m, p * un + c * nx, q * un + c * ny


@njit(cache=True, error_model="numpy", inline="always")
def _speeds(wL, pL, qL, wR, pR, qR, b, nx, ny, g, h_eps):
    hL = wL - b
    hR = wR - b
    wetL = hL >= h_eps
    wetR = hR >= h_eps
    if not wetL and not wetR:
        return 0.0, 0.0
    unL = cL = unR = cR = 0.0
    if wetL:
        unL = (pL * nx + qL * ny) / hL
        cL = math.sqrt(g * hL)
    if wetR:
        unR = (pR * nx + qR * ny) / hR
        cR = math.sqrt(g * hR)
    if not wetR:
        return unL - cL, unL + cL
    if not wetL:
        return unR - cR, unR + cR
    return min(unL - cL, unR - cR), max(unL + cL, unR + cR)


@njit(cache=True, error_model="numpy")
def _hll(wL, pL, qL, wR, pR, qR, b, nx, ny, g, h_eps):
    # evaluate with the normal in a fixed half-plane so that swapping the
    # sides and flipping n negates the flux bit for bit
    if nx < 0.0 or (nx == 0.0 and ny < 0.0):
        f0, f1, f2 = _hll_oriented(wR, pR, qR, wL, pL, qL, b, -nx, -ny, g, h_eps)
        return -f0, -f1, -f2
    return _hll_oriented(wL, pL, qL, wR, pR, qR, b, nx, ny, g, h_eps)


@njit(cache=True, error_model="numpy")
def _hll_oriented(wL, pL, qL, wR, pR, qR, b, nx, ny, g, h_eps):
    # _speeds and _flux written out so each side's velocity is formed once
    hL = max(wL - b, 0.0)
    hR = max(wR - b, 0.0)
    wetL = hL >= h_eps
    wetR = hR >= h_eps
    cpL = 0.5 * g * hL * hL
    cpR = 0.5 * g * hR * hR
    if not wetL and not wetR:
        # no waves and no mass exchange; the mean film pressure keeps
        # F(U, U) equal to the physical flux
        cp = 0.5 * (cpL + cpR)
        return 0.0, cp * nx, cp * ny
    if wetL:
        mL = pL * nx + qL * ny
        unL = mL / hL
        cL = math.sqrt(g * hL)
        fL0, fL1, fL2 = mL, pL * unL + cpL * nx, qL * unL + cpL * ny
    else:
        pL = qL = unL = cL = 0.0
        fL0, fL1, fL2 = 0.0, cpL * nx, cpL * ny
    if wetR:
        mR = pR * nx + qR * ny
        unR = mR / hR
        cR = math.sqrt(g * hR)
        fR0, fR1, fR2 = mR, pR * unR + cpR * nx, qR * unR + cpR * ny
    else:
        pR = qR = unR = cR = 0.0
        fR0, fR1, fR2 = 0.0, cpR * nx, cpR * ny
    if wetL and wetR:
        sL = min(unL - cL, unR - cR)
        sR = max(unL + cL, unR + cR)
    elif wetL:
        sL = unL - cL
        sR = unL + cL
    else:
        sL = unR - cR
        sR = unR + cR
    if sL >= 0.0:
        return fL0, fL1, fL2
    if sR <= 0.0:
        return fR0, fR1, fR2
    # (sR fL - sL fR + sL sR (UR - UL)) / (sR - sL), written as a correction
    # to fL so that identical states return fL bit for bit
    k = sL / (sR - sL)
    return (
        fL0 + k * (fL0 - fR0 + sR * (wR - wL)),
        fL1 + k * (fL1 - fR1 + sR * (pR - pL)),
        fL2 + k * (fL2 - fR2 + sR * (qR - qL)),
    )


@njit(cache=True, error_model="numpy")
def _hll_many(UL, UR, B, N, g, h_eps, out):
    for i in range(UL.shape[0]):
        f0, f1, f2 = _hll(UL[i, 0], UL[i, 1], UL[i, 2], UR[i, 0], UR[i, 1], UR[i, 2],
                          B[i], N[i, 0], N[i, 1], g, h_eps)
        out[i, 0] = f0
        out[i, 1] = f1
        out[i, 2] = f2


def _check_depth(U, B):
    h = np.asarray(U, dtype=float)[..., 0] - np.asarray(B, dtype=float)
    if np.any(h < -1e-12):
        raise NumericalError(f"negative depth {float(np.min(h)):.3e} passed to a flux routine")


def physical_flux_normal(U, B, n, g=GRAVITY, h_eps=H_EPS) -> np.ndarray:
    """Physical flux ``F(U) . n`` of a single state against unit normal ``n``."""
    _check_depth(U, B)
    w, p, q = (float(x) for x in U)
    return np.array(_flux(w, p, q, float(B), float(n[0]), float(n[1]), g, h_eps))


def wave_speeds(U_L, U_R, B, n, g=GRAVITY, h_eps=H_EPS) -> tuple[float, float]:
    """Davis-type extreme wave-speed estimates ``(S_L, S_R)`` along ``n``.

    A dry side (depth below ``h_eps``) is ignored; two dry sides give (0, 0).
    """
    _check_depth(U_L, B)
    _check_depth(U_R, B)
    wL, pL, qL = (float(x) for x in U_L)
    wR, pR, qR = (float(x) for x in U_R)
    return _speeds(wL, pL, qL, wR, pR, qR, float(B), float(n[0]), float(n[1]), g, h_eps)


def hll_flux(U_L, U_R, B, n, g=GRAVITY, h_eps=H_EPS) -> np.ndarray:
    """HLL flux through an edge with unit normal ``n`` pointing from L to R.

    Accepts single states of shape (3,) or batches of shape (N, 3) with
    matching ``B`` (N,) and ``n`` (N, 2). With both depths below ``h_eps``
    there is no mass flux and the momentum flux is the mean hydrostatic
    pressure of the two sides.
    """
    UL = np.asarray(U_L, dtype=float)
    UR = np.asarray(U_R, dtype=float)
    _check_depth(UL, B)
    _check_depth(UR, B)
    single = UL.ndim == 1
    UL2 = np.atleast_2d(UL)
    UR2 = np.atleast_2d(UR)
    B2 = np.broadcast_to(np.asarray(B, dtype=float), (len(UL2),)).copy()
    N2 = np.broadcast_to(np.asarray(n, dtype=float), (len(UL2), 2)).copy()
    out = np.empty((len(UL2), 3))
    _hll_many(UL2, UR2, B2, N2, g, h_eps, out)
    return out[0] if single else out
