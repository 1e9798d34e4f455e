"""Hydrograph misfit and a grid search for the Manning coefficient."""
from __future__ import annotations

import logging
from dataclasses import replace
from typing import Callable, Sequence

import numpy as np

from .config import RunConfig, run
from .errors import ConfigError, SimulationAborted
from .output import HydrographSeries

__all__ = ["rmse", "calibrate_manning"]

log = logging.getLogger(__name__)


def _as_arrays(series) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(series, HydrographSeries):
        return series.t, series.Q
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ConfigError(f"expected (t, Q) rows, got an array of shape {arr.shape}")
    return arr[:, 0], arr[:, 1]


def rmse(simulated, observed) -> float:
    """Root mean square discharge misfit at the observation times.

    The simulated series is interpolated linearly to each observed time.
    ``observed`` may be a :class:`HydrographSeries` or any (t, Q) rows, in any
    order; every observed time must lie within the simulated time range.
    """
    ts, qs = _as_arrays(simulated)
    to, qo = _as_arrays(observed)
    if to.size == 0:
        raise ConfigError("observed hydrograph is empty")
    if ts.size == 0:
        raise ConfigError("simulated hydrograph is empty")
    if np.any(np.diff(ts) <= 0):
        raise ConfigError("simulated hydrograph times must be strictly increasing")
    lo, hi = ts[0], ts[-1]
    outside = (to < lo) | (to > hi)
    if np.any(outside):
        t_bad = float(to[outside][0])
        raise ConfigError(f"observation at t = {t_bad} s lies outside the simulated range [{lo}, {hi}]")
    diff = np.interp(to, ts, qs) - qo
    return float(np.sqrt(np.mean(diff * diff)))


def calibrate_manning(config: RunConfig, observed, n_grid: Sequence[float],
                      runner: Callable[[RunConfig], HydrographSeries] | None = None):
    """Run ``config`` for each Manning coefficient in ``n_grid``; pick the best fit.

    Returns ``(n_best, table)`` where ``table`` lists ``(n, rmse)`` in grid
    order. Ties go to the smaller ``n``. ``runner`` maps a config to its
    simulated hydrograph (default: :func:`swgreen.config.run` without file
    output).
    """
    grid = [float(n) for n in n_grid]
    if not grid:
        raise ConfigError("n_grid is empty")
    if any(not n > 0 for n in grid):
        raise ConfigError(f"Manning coefficients must be positive, got {grid}")
    if runner is None:
        def runner(cfg):
            res = run(cfg)
            if res.hydrograph is None:
                raise ConfigError("calibration needs a mesh with an outflow boundary")
            return res.hydrograph
    table = []
    for n in grid:
        cfg = replace(config, friction_n=n, outdir=None)
        try:
            sim = runner(cfg)
        except SimulationAborted as exc:
            raise SimulationAborted(f"run with n = {n} aborted: {exc}", t=exc.t, cell=exc.cell) from exc
        err = rmse(sim, observed)
        log.info("n = %g: rmse = %.6e m^3/s", n, err)
        table.append((n, err))
    best = min(table, key=lambda row: (row[1], row[0]))
    return best[0], table
