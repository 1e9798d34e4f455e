"""Writers (and matching readers) for run outputs.

* field snapshots: legacy ASCII VTK unstructured grid, triangles as cell
  type 5, per-cell scalars ``w h p q u v B Ic`` written with 17 significant
  digits so they read back exactly;
* hydrograph: CSV ``t_s,Q_m3s``;
* mass ledger trace: CSV ``t_s,surface_m3,infiltrated_m3,rain_in_m3,outflow_m3,clamp_m3,residual_m3``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .constants import H_EPS
from .errors import ConfigError
from .infiltration import InfiltrationState
from .mesh import Mesh
from .solver import FlowField

__all__ = [
    "HydrographSeries",
    "VTK_SCALARS",
    "write_field_vtk",
    "write_hydrograph_csv",
    "read_hydrograph_csv",
    "write_ledger_csv",
    "read_ledger_csv",
    "HYDROGRAPH_HEADER",
    "LEDGER_HEADER",
]

VTK_SCALARS = ("w", "h", "p", "q", "u", "v", "B", "Ic")
HYDROGRAPH_HEADER = ("t_s", "Q_m3s")
LEDGER_HEADER = ("t_s", "surface_m3", "infiltrated_m3", "rain_in_m3", "outflow_m3", "clamp_m3",
                 "residual_m3")


@dataclass(frozen=True)
class HydrographSeries:
    """Outlet discharge samples; times strictly increasing."""

    t: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1)
        Q = np.asarray(self.Q, dtype=float).reshape(-1)
        if t.shape != Q.shape:
            raise ConfigError(f"hydrograph has {t.size} times but {Q.size} discharges")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ConfigError("hydrograph times must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "Q", Q)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[float]]) -> "HydrographSeries":
        arr = np.asarray(list(rows), dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    def __len__(self) -> int:
        return self.t.size

    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.Q.tolist()))


def _cell_scalars(mesh: Mesh, field: FlowField, Ic, h_eps: float) -> dict[str, np.ndarray]:
    h = field.depth(mesh)
    u, v = field.velocity(mesh, h_eps)
    return {"w": field.w, "h": h, "p": field.p, "q": field.q, "u": u, "v": v,
            "B": mesh.cell_bottom, "Ic": Ic}


def write_field_vtk(mesh: Mesh, field: FlowField, infiltration=None, path="field.vtk",
                    h_eps: float = H_EPS) -> Path:
    """Write one snapshot as a legacy ASCII VTK file.

    ``infiltration`` is an :class:`InfiltrationState`, a per-cell ``Ic``
    array, or ``None`` (zeros). Vertex z coordinates are the bed elevations.
    """
    nc = mesh.n_cells
    if isinstance(infiltration, InfiltrationState):
        Ic = np.asarray(infiltration.Ic, dtype=float)
    elif infiltration is None:
        Ic = np.zeros(nc)
    else:
        Ic = np.asarray(infiltration, dtype=float)
    for name, arr in (("w", field.w), ("p", field.p), ("q", field.q), ("Ic", Ic)):
        if np.shape(arr) != (nc,):
            raise ConfigError(f"{name} has shape {np.shape(arr)}, mesh has {nc} cells")
    scalars = _cell_scalars(mesh, field, Ic, h_eps)

    lines = ["# vtk DataFile Version 3.0", f"swgreen field t={field.t!r}", "ASCII",
             "DATASET UNSTRUCTURED_GRID", f"POINTS {mesh.n_vertices} double"]
    lines += [f"{x:.17g} {y:.17g} {b:.17g}" for (x, y), b in zip(mesh.points, mesh.bottom)]
    lines.append(f"CELLS {nc} {4 * nc}")
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.triangles]
    lines.append(f"CELL_TYPES {nc}")
    lines += ["5"] * nc
    lines.append(f"CELL_DATA {nc}")
    for name in VTK_SCALARS:
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [f"{x:.17g}" for x in scalars[name]]
    path = Path(path)
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write VTK file {path}: {exc.strerror}", str(path)) from exc
    return path


def write_hydrograph_csv(series: HydrographSeries, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as f:
        f.write(",".join(HYDROGRAPH_HEADER) + "\n")
        for t, Q in zip(series.t, series.Q):
            f.write(f"{t:.10e},{Q:.10e}\n")
    return path


def _read_csv(path, header):
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            head = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        if tuple(h.strip() for h in head) != header:
            raise ConfigError(f"{path}: expected header {','.join(header)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ConfigError(f"{path}:{lineno}: expected {len(header)} columns")
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: non-numeric value") from None
    return rows


def read_hydrograph_csv(path, ordered: bool = True):
    """Read a ``t_s,Q_m3s`` file.

    With ``ordered=False`` the rows are returned as an (N, 2) array in file
    order (observations need not be sorted).
    """
    rows = _read_csv(path, HYDROGRAPH_HEADER)
    if not ordered:
        return np.asarray(rows, dtype=float).reshape(-1, 2)
    return HydrographSeries.from_rows(rows)


def write_ledger_csv(rows: Iterable[Sequence[float]], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as f:
        f.write(",".join(LEDGER_HEADER) + "\n")
        for row in rows:
            f.write(",".join(f"{float(x):.17g}" for x in row) + "\n")
    return path


def read_ledger_csv(path) -> np.ndarray:
    return np.asarray(_read_csv(path, LEDGER_HEADER), dtype=float).reshape(-1, len(LEDGER_HEADER))
