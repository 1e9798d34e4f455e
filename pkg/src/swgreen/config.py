"""Run configuration: the ``key = value`` text format, built-in scenarios, and the driver.

A config file holds one ``key = value`` line per setting; ``#`` starts a
comment. Numbers may carry a unit suffix that is converted to SI at parse
time (``500mm/h``, ``5cm``, ``5min``). Keys:

=============  ==============================================================
mesh           ``rect`` or ``file <nodes> <elements> [<tags>]``
domain         ``<Lx> <Ly>`` (rect meshes)
nx, ny         rectangles along x and y (rect meshes)
bottom         ``flat [b0]``, ``slope <S>`` (B = S (Lx - x)), ``plane <b0> <sx> <sy>``,
               ``basin`` or ``file <path>`` (one value per vertex)
init_depth     ``<h>``, ``dry``, ``level <w>`` or ``file <path>`` (one depth per cell)
rain           ``<t0> <t1> <rate>``; repeat the key for more intervals
soil           ``none``, a preset name, ``one_layer`` or ``two_layer``
layer1         ``<Ks> <psi> <dtheta> [<d1>]`` (d1 only for two layers)
layer2         ``<Ks> <psi> <dtheta>``
manning        Manning coefficient [s m^-1/3]
boundary       ``<side> <tag>`` with side in west/east/south/north, tag wall/outflow
cfl, h_eps, u_max, dt_max
t_end          simulated time
output_every   output interval (default: only the start and ``t_end``)
outdir         directory for VTK snapshots and CSV traces (default: none)
vtk            ``on``/``off``: write VTK snapshots into ``outdir``
=============  ==============================================================
"""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .constants import CFL, CM_PER_H, DT_MAX, H_EPS, MM_PER_H, OUTFLOW, U_MAX
from .errors import ConfigError
from .infiltration import SoilLayer, SoilModel, soil_preset
from .mesh import Mesh, generate_rect_mesh, grid_for_area, read_mesh
from .mesh import build_mesh as _mesh_from_arrays
from .output import HydrographSeries, write_field_vtk, write_hydrograph_csv, write_ledger_csv
from .solver import FlowField, RainSchedule, Simulation

__all__ = [
    "RunConfig",
    "RunResult",
    "parse_config",
    "load_config",
    "format_config",
    "apply_overrides",
    "scenario_preset",
    "PRESET_NAMES",
    "basin_bottom",
    "build_mesh",
    "check_required",
    "initial_field",
    "make_simulation",
    "run",
]

log = logging.getLogger(__name__)

SIDES = ("west", "east", "south", "north")
BOTTOMS = ("flat", "slope", "plane", "basin", "file")

# conversions to SI; rates use the same factors as the soil presets
_LENGTH = {"": lambda v: v, "m": lambda v: v, "cm": lambda v: v / 100, "mm": lambda v: v / 1000}
_TIME = {"": lambda v: v, "s": lambda v: v, "min": lambda v: v * 60, "h": lambda v: v * 3600}
_RATE = {"": lambda v: v, "m/s": lambda v: v, "mm/h": lambda v: v * MM_PER_H,
         "cm/h": lambda v: v * CM_PER_H}
_NONE = {"": lambda v: v}
_NUMBER = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)([A-Za-z/]*)$")


def basin_bottom(x, y):
    """Complex-basin topography on [0, 10] x [0, 8]; rises on average toward +y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (0.01 * y + 0.01 * np.abs(x - 0.5) - 0.01 * np.sin(np.pi * x / 2)
            - 0.01 * np.sin(np.pi * y / 2) + 1.0)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to set up and run one simulation (SI units)."""

    t_end: float
    mesh: str = "rect"
    mesh_files: tuple[str, ...] = ()
    domain_length: float = 1.0
    domain_width: float = 1.0
    nx: int = 1
    ny: int = 1
    bottom: str = "flat"
    bottom_params: tuple[float, ...] = ()
    bottom_file: str | None = None
    initial_depth: float = 0.0
    initial_level: float | None = None
    initial_file: str | None = None
    rain: tuple[tuple[float, float, float], ...] = ()
    soil: SoilModel | None = None
    friction_n: float = 0.0
    boundary: tuple[tuple[str, str], ...] = ()
    cfl: float = CFL
    h_eps: float = H_EPS
    u_max: float = U_MAX
    dt_max: float = DT_MAX
    output_every: float | None = None
    outdir: str | None = None
    vtk: bool = True
    base_dir: str = field(default=".", compare=False)

    def __post_init__(self):
        for name in ("t_end", "initial_depth", "friction_n"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)}")
        for name in ("domain_length", "domain_width", "cfl", "h_eps", "u_max", "dt_max"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.output_every is not None and not self.output_every > 0:
            raise ConfigError(f"output_every must be positive, got {self.output_every}")
        if self.mesh not in ("rect", "file"):
            raise ConfigError(f"mesh must be 'rect' or 'file', got {self.mesh!r}")
        if self.mesh == "file" and len(self.mesh_files) not in (2, 3):
            raise ConfigError("mesh = file needs a node file, an element file and optionally a tag file")
        if self.mesh == "rect" and not (self.nx >= 1 and self.ny >= 1):
            raise ConfigError(f"nx and ny must be at least 1, got {self.nx}, {self.ny}")
        if self.bottom not in BOTTOMS:
            raise ConfigError(f"unknown bottom {self.bottom!r}")
        allowed = {"flat": (0, 1), "slope": (1,), "plane": (3,), "basin": (0,), "file": (0,)}[self.bottom]
        if len(self.bottom_params) not in allowed:
            raise ConfigError(f"bottom {self.bottom!r} takes {' or '.join(map(str, allowed))} parameter(s), "
                              f"got {len(self.bottom_params)}")
        if (self.bottom == "file") != (self.bottom_file is not None):
            raise ConfigError("bottom_file is used exactly when bottom = 'file'")
        for side, tag in self.boundary:
            if side not in SIDES or tag not in ("wall", "outflow"):
                raise ConfigError(f"bad boundary entry {side} {tag}")
        # reuses the schedule checks (non-negative, non-overlapping)
        RainSchedule(self.rain)

    @property
    def output_times(self) -> list[float]:
        if self.output_every is None or self.t_end == 0:
            return [0.0] if self.t_end == 0 else [0.0, self.t_end]
        n = int(math.floor(self.t_end / self.output_every + 1e-9))
        times = [k * self.output_every for k in range(n + 1)]
        if self.t_end - times[-1] > 1e-9 * max(1.0, self.t_end):
            times.append(self.t_end)
        else:
            times[-1] = self.t_end
        return times

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p


# --- parsing ------------------------------------------------------------------

class _Line:
    def __init__(self, lineno: int, key: str, tokens: list[str]):
        self.lineno, self.key, self.tokens = lineno, key, tokens

    def fail(self, msg: str):
        raise ConfigError(f"line {self.lineno}: {self.key}: {msg}")

    def number(self, tok: str, units=_NONE, kind: str = "number") -> float:
        m = _NUMBER.match(tok)
        if not m:
            self.fail(f"cannot read {tok!r} as a {kind}")
        value, unit = float(m.group(1)), m.group(2)
        if unit not in units:
            allowed = ", ".join(u for u in units if u) or "none"
            self.fail(f"unit {unit!r} not allowed for a {kind} (allowed: {allowed})")
        return units[unit](value)

    def count(self, n: int | tuple[int, ...]):
        ns = (n,) if isinstance(n, int) else n
        if len(self.tokens) not in ns:
            self.fail(f"expected {' or '.join(map(str, ns))} value(s), got {len(self.tokens)}")


def _layer(line: _Line, with_d1: bool):
    line.count(4 if with_d1 else 3)
    t = line.tokens
    try:
        layer = SoilLayer(Ks=line.number(t[0], _RATE, "conductivity"),
                          psi=line.number(t[1], _LENGTH, "length"),
                          dtheta=line.number(t[2], _NONE, "number"))
    except ConfigError as exc:
        if str(exc).startswith("line "):
            raise
        line.fail(str(exc))
    d1 = line.number(t[3], _LENGTH, "length") if with_d1 else None
    return layer, d1


_SINGLE = {"mesh", "domain", "nx", "ny", "bottom", "init_depth", "soil", "layer1", "layer2",
           "manning", "cfl", "h_eps", "u_max", "dt_max", "t_end", "output_every", "outdir", "vtk"}
_REPEAT = {"rain", "boundary"}
KEYS = _SINGLE | _REPEAT


def parse_config(text: str, base_dir: str | Path = ".") -> RunConfig:
    """Parse the ``key = value`` format into a validated :class:`RunConfig`."""
    lines: dict[str, list[_Line]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in _SINGLE and key in lines:
            raise ConfigError(f"line {lineno}: {key}: repeated (first set on line {lines[key][0].lineno})")
        if not value:
            raise ConfigError(f"line {lineno}: {key}: missing value")
        lines.setdefault(key, []).append(_Line(lineno, key, value.split()))

    for key in ("mesh", "t_end"):
        if key not in lines:
            raise ConfigError(f"missing required key {key!r}")
    kw: dict = {"base_dir": str(base_dir)}

    ln = lines["t_end"][0]
    ln.count(1)
    kw["t_end"] = ln.number(ln.tokens[0], _TIME, "time")

    ln = lines["mesh"][0]
    kind = ln.tokens[0]
    if kind == "rect":
        ln.count(1)
        for key in ("domain", "nx", "ny"):
            if key not in lines:
                raise ConfigError(f"line {ln.lineno}: mesh = rect needs the key {key!r}")
        d = lines["domain"][0]
        d.count(2)
        kw["domain_length"] = d.number(d.tokens[0], _LENGTH, "length")
        kw["domain_width"] = d.number(d.tokens[1], _LENGTH, "length")
        for key in ("nx", "ny"):
            n = lines[key][0]
            n.count(1)
            try:
                kw[key] = int(n.tokens[0])
            except ValueError:
                n.fail(f"expected an integer, got {n.tokens[0]!r}")
            if kw[key] < 1:
                n.fail("must be at least 1")
    elif kind == "file":
        ln.count((3, 4))
        kw["mesh"] = "file"
        kw["mesh_files"] = tuple(ln.tokens[1:])
        for key in ("domain", "nx", "ny", "boundary"):
            if key in lines:
                raise ConfigError(f"line {lines[key][0].lineno}: {key}: not used with mesh = file")
    else:
        ln.fail(f"expected 'rect' or 'file', got {kind!r}")

    if "bottom" in lines:
        b = lines["bottom"][0]
        name = b.tokens[0]
        if name not in BOTTOMS:
            b.fail(f"unknown bottom {name!r} (choose from {', '.join(BOTTOMS)})")
        nparams = {"flat": (1, 2), "slope": 2, "plane": 4, "basin": 1, "file": 2}[name]
        b.count(nparams)
        kw["bottom"] = name
        args = b.tokens[1:]
        if name == "file":
            kw["bottom_file"] = args[0]
        elif name == "slope":
            kw["bottom_params"] = (b.number(args[0], _NONE, "slope"),)
        elif name == "flat":
            kw["bottom_params"] = tuple(b.number(t, _LENGTH, "elevation") for t in args)
        elif name == "plane":
            kw["bottom_params"] = (b.number(args[0], _LENGTH, "elevation"),
                                   b.number(args[1], _NONE, "slope"), b.number(args[2], _NONE, "slope"))

    if "init_depth" in lines:
        i = lines["init_depth"][0]
        head = i.tokens[0]
        if head == "dry":
            i.count(1)
        elif head == "level":
            i.count(2)
            kw["initial_level"] = i.number(i.tokens[1], _LENGTH, "elevation")
        elif head == "file":
            i.count(2)
            kw["initial_file"] = i.tokens[1]
        else:
            i.count(1)
            kw["initial_depth"] = i.number(head, _LENGTH, "depth")
            if kw["initial_depth"] < 0:
                i.fail("depth must be non-negative")

    rain = []
    for r in lines.get("rain", []):
        r.count(3)
        t0 = r.number(r.tokens[0], _TIME, "time")
        t1 = r.number(r.tokens[1], _TIME, "time")
        rate = r.number(r.tokens[2], _RATE, "rain rate")
        if not (0 <= t0 < t1) or rate < 0:
            r.fail("needs 0 <= t0 < t1 and a non-negative rate")
        for a, b_, _ in rain:
            if t0 < b_ and a < t1:
                r.fail(f"interval [{t0}, {t1}] overlaps [{a}, {b_}]")
        rain.append((t0, t1, rate))
    kw["rain"] = tuple(sorted(rain))

    kw["soil"] = _parse_soil(lines)

    sides = {}
    for bl in lines.get("boundary", []):
        bl.count(2)
        side, tag = bl.tokens[0].lower(), bl.tokens[1].lower()
        if side not in SIDES:
            bl.fail(f"unknown side {side!r} (choose from {', '.join(SIDES)})")
        if tag not in ("wall", "outflow"):
            bl.fail(f"unknown tag {tag!r} (wall or outflow)")
        if side in sides:
            bl.fail(f"side {side} given twice")
        sides[side] = tag
    kw["boundary"] = tuple(sorted(sides.items()))

    for key, units, kind, name in (("manning", _NONE, "number", "friction_n"), ("cfl", _NONE, "number", "cfl"),
                                   ("h_eps", _LENGTH, "depth", "h_eps"), ("u_max", _RATE, "speed", "u_max"),
                                   ("dt_max", _TIME, "time", "dt_max"),
                                   ("output_every", _TIME, "time", "output_every")):
        if key in lines:
            x = lines[key][0]
            x.count(1)
            kw[name] = x.number(x.tokens[0], units, kind)
            ok = kw[name] >= 0 if key == "manning" else kw[name] > 0
            if not ok:
                x.fail(f"out of range: {x.tokens[0]}")
    if "outdir" in lines:
        o = lines["outdir"][0]
        o.count(1)
        kw["outdir"] = o.tokens[0]
    if "vtk" in lines:
        v = lines["vtk"][0]
        v.count(1)
        if v.tokens[0] not in ("on", "off"):
            v.fail("expected 'on' or 'off'")
        kw["vtk"] = v.tokens[0] == "on"
    return RunConfig(**kw)


def _parse_soil(lines) -> SoilModel | None:
    s = lines.get("soil", [None])[0]
    name = "none" if s is None else s.tokens[0]
    if s is not None:
        s.count(1)
    layer_lines = [lines[k][0] for k in ("layer1", "layer2") if k in lines]
    if name == "none":
        if layer_lines:
            layer_lines[0].fail("soil layers given but soil is 'none'")
        return None
    if name == "one_layer":
        if "layer1" not in lines or "layer2" in lines:
            s.fail("one_layer needs layer1 (and no layer2)")
        return SoilModel.one_layer(_layer(lines["layer1"][0], False)[0])
    if name == "two_layer" and layer_lines:
        if "layer1" not in lines or "layer2" not in lines:
            s.fail("two_layer with explicit layers needs both layer1 (with d1) and layer2")
        upper, d1 = _layer(lines["layer1"][0], True)
        lower, _ = _layer(lines["layer2"][0], False)
        try:
            return SoilModel.two_layer(upper, lower, d1)
        except ConfigError as exc:
            lines["layer1"][0].fail(str(exc))
    if layer_lines:
        layer_lines[0].fail(f"layers cannot be combined with the preset soil {name!r}")
    try:
        return soil_preset(name)
    except ConfigError as exc:
        s.fail(str(exc))


def load_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)


def _f(x: float) -> str:
    return repr(float(x))


def format_config(cfg: RunConfig) -> str:
    """Canonical text for ``cfg`` (SI units, no suffixes); parses back to an equal config."""
    out = [f"t_end = {_f(cfg.t_end)}"]
    if cfg.mesh == "rect":
        out += ["mesh = rect", f"domain = {_f(cfg.domain_length)} {_f(cfg.domain_width)}",
                f"nx = {cfg.nx}", f"ny = {cfg.ny}"]
    else:
        out.append("mesh = file " + " ".join(cfg.mesh_files))
    if cfg.bottom == "file":
        out.append(f"bottom = file {cfg.bottom_file}")
    else:
        out.append(" ".join([f"bottom = {cfg.bottom}"] + [_f(x) for x in cfg.bottom_params]))
    if cfg.initial_file is not None:
        out.append(f"init_depth = file {cfg.initial_file}")
    elif cfg.initial_level is not None:
        out.append(f"init_depth = level {_f(cfg.initial_level)}")
    else:
        out.append(f"init_depth = {_f(cfg.initial_depth)}")
    out += [f"rain = {_f(a)} {_f(b)} {_f(r)}" for a, b, r in cfg.rain]
    soil = cfg.soil
    if soil is None:
        out.append("soil = none")
    else:
        u = soil.upper
        if soil.is_two_layer:
            lo = soil.lower
            out += ["soil = two_layer",
                    f"layer1 = {_f(u.Ks)} {_f(u.psi)} {_f(u.dtheta)} {_f(soil.d1)}",
                    f"layer2 = {_f(lo.Ks)} {_f(lo.psi)} {_f(lo.dtheta)}"]
        else:
            out += ["soil = one_layer", f"layer1 = {_f(u.Ks)} {_f(u.psi)} {_f(u.dtheta)}"]
    out.append(f"manning = {_f(cfg.friction_n)}")
    out += [f"boundary = {side} {tag}" for side, tag in cfg.boundary]
    out += [f"cfl = {_f(cfg.cfl)}", f"h_eps = {_f(cfg.h_eps)}", f"u_max = {_f(cfg.u_max)}",
            f"dt_max = {_f(cfg.dt_max)}"]
    if cfg.output_every is not None:
        out.append(f"output_every = {_f(cfg.output_every)}")
    if cfg.outdir is not None:
        out.append(f"outdir = {cfg.outdir}")
    out.append(f"vtk = {'on' if cfg.vtk else 'off'}")
    return "\n".join(out) + "\n"


# keys whose override replaces a group of canonical lines
_OVERRIDE_GROUPS = {"soil": ("soil", "layer1", "layer2"), "layer1": ("layer1",), "layer2": ("layer2",)}


def apply_overrides(cfg: RunConfig, overrides: Sequence[str]) -> RunConfig:
    """Apply ``key=value`` strings; a repeatable key replaces all its previous lines."""
    text_lines = format_config(cfg).splitlines()
    new = []
    dropped = set()
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = (s.strip() for s in item.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"override: unknown key {key!r}")
        for k in _OVERRIDE_GROUPS.get(key, (key,)):
            dropped.add(k)
        if key == "soil" and value.split()[:1] in (["one_layer"], ["two_layer"]):
            dropped.discard("layer1")
            dropped.discard("layer2")
        new.append(f"{key} = {value}")
    kept = [ln for ln in text_lines if ln.split("=", 1)[0].strip() not in dropped]
    return parse_config("\n".join(kept + new) + "\n", base_dir=cfg.base_dir)


# --- scenarios ----------------------------------------------------------------

PRESET_NAMES = ("slope_runoff", "conservation_one_layer", "conservation_two_layer", "complex_basin",
                "lake_at_rest")
# inputs a preset leaves open and a run must supply
PRESET_REQUIRED = {"slope_runoff": ("rain",)}


def scenario_preset(name: str) -> RunConfig:
    """Built-in scenarios.

    ``slope_runoff``
        21.945 m x 1 m plane, bed slope 0.04 falling toward the outlet at
        x = 21.945, mean cell area about 3.9e-3 m^2, n = 0.48, dry start, no
        infiltration. The rain schedule must be supplied.
    ``conservation_one_layer`` / ``conservation_two_layer``
        [0, 2] x [0, 1] closed flat box, still water 0.1 m deep, mean cell
        area about 6.37e-4 m^2, sandy loam or sandy loam (1 mm) over silt
        loam, run for 2 h.
    ``complex_basin``
        [0, 10] x [0, 8] over :func:`basin_bottom`, about 10 000 cells,
        n = 0.013, 500 mm/h of rain for 5 min, Ks = 7 mm/h, psi = 50 mm,
        dtheta = 0.125, outflow along y = 0, walls elsewhere, run for 8 min.
    ``lake_at_rest``
        Basin topography with still water at w = 1.2 (fully wet), about 3000
        cells, no forcing.
    """
    if name == "slope_runoff":
        L, W = 21.945, 1.0
        nx, ny = grid_for_area(L, W, 3.9e-3)
        return RunConfig(t_end=3600.0, domain_length=L, domain_width=W, nx=nx, ny=ny, bottom="slope",
                         bottom_params=(0.04,), friction_n=0.48, boundary=(("east", "outflow"),),
                         output_every=10.0)
    if name in ("conservation_one_layer", "conservation_two_layer"):
        nx, ny = grid_for_area(2.0, 1.0, 6.3735e-4)
        soil = soil_preset("sandy_loam" if name.endswith("one_layer") else "two_layer")
        return RunConfig(t_end=7200.0, domain_length=2.0, domain_width=1.0, nx=nx, ny=ny,
                         initial_depth=0.1, soil=soil, output_every=60.0)
    if name == "complex_basin":
        nx, ny = grid_for_area(10.0, 8.0, 80.0 / 10000)
        return RunConfig(t_end=480.0, domain_length=10.0, domain_width=8.0, nx=nx, ny=ny, bottom="basin",
                         rain=((0.0, 300.0, 500.0 * MM_PER_H),), soil=soil_preset("basin"),
                         friction_n=0.013, boundary=(("south", "outflow"),), output_every=60.0)
    if name == "lake_at_rest":
        nx, ny = grid_for_area(10.0, 8.0, 80.0 / 3000)
        return RunConfig(t_end=10.0, domain_length=10.0, domain_width=8.0, nx=nx, ny=ny, bottom="basin",
                         initial_level=1.2, output_every=1.0)
    raise ConfigError(f"unknown scenario {name!r} (choose from {', '.join(PRESET_NAMES)})")


def check_required(name: str, cfg: RunConfig) -> None:
    for key in PRESET_REQUIRED.get(name, ()):
        if not getattr(cfg, key):
            raise ConfigError(f"scenario {name} needs {key!r}; pass it with --override {key}=...")


# --- driver -------------------------------------------------------------------

def _read_column(path: Path, n: int, what: str) -> np.ndarray:
    try:
        vals = np.loadtxt(path, dtype=float, ndmin=1, comments="#")
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read {what} file {path}: {exc}") from exc
    if vals.shape != (n,):
        raise ConfigError(f"{what} file {path} has {vals.size} values, expected {n}")
    return vals


def _bottom_function(cfg: RunConfig) -> Callable | float:
    p = cfg.bottom_params
    if cfg.bottom == "flat":
        return p[0] if p else 0.0
    if cfg.bottom == "slope":
        S, L = p[0], cfg.domain_length
        return lambda x, y: S * (L - x)
    if cfg.bottom == "plane":
        b0, sx, sy = p
        return lambda x, y: b0 + sx * x + sy * y
    if cfg.bottom == "basin":
        return basin_bottom
    raise ConfigError(f"bottom {cfg.bottom!r} has no analytic form")


def build_mesh(cfg: RunConfig) -> Mesh:
    """The mesh described by ``cfg`` (generated, or read from files).

    For file meshes the default bottom keeps the node-file elevations; any
    other bottom setting replaces them.
    """
    if cfg.mesh == "rect":
        sides = {side: tag.upper() for side, tag in cfg.boundary}
        bottom = 0.0 if cfg.bottom == "file" else _bottom_function(cfg)
        mesh = generate_rect_mesh(cfg.domain_length, cfg.domain_width, cfg.nx, cfg.ny, bottom, sides)
    else:
        mesh = read_mesh(*[cfg.resolve(p) for p in cfg.mesh_files])
        if cfg.bottom == "flat" and not cfg.bottom_params:
            return mesh
    if cfg.bottom == "file":
        b = _read_column(cfg.resolve(cfg.bottom_file), mesh.n_vertices, "bottom")
    elif cfg.mesh == "file":
        f = _bottom_function(cfg)
        x, y = mesh.points[:, 0], mesh.points[:, 1]
        b = f(x, y) if callable(f) else np.full(mesh.n_vertices, float(f))
    else:
        return mesh
    tags = {tuple(mesh.edge_vertices[e]): ("OUTFLOW" if t == OUTFLOW else "WALL")
            for e, t in zip(mesh.boundary_edges, mesh.edge_tags[mesh.boundary_edges])}
    return _mesh_from_arrays(mesh.points, np.asarray(b, dtype=float), mesh.triangles, tags=tags)


def initial_field(cfg: RunConfig, mesh: Mesh) -> FlowField:
    if cfg.initial_file is not None:
        h = _read_column(cfg.resolve(cfg.initial_file), mesh.n_cells, "initial depth")
        return FlowField.from_depth(mesh, h)
    if cfg.initial_level is not None:
        return FlowField.at_rest(mesh, cfg.initial_level)
    return FlowField.from_depth(mesh, cfg.initial_depth)


@dataclass
class RunResult:
    """Outputs of :func:`run`; ``hydrograph`` is ``None`` for meshes without an outlet."""

    config: RunConfig
    mesh: Mesh
    simulation: Simulation
    output_times: list[float]
    hydrograph: HydrographSeries | None
    ledger_rows: list[tuple]
    files: list[Path]

    @property
    def field(self) -> FlowField:
        return self.simulation.field

    @property
    def Ic(self) -> np.ndarray:
        return self.simulation.Ic


def make_simulation(cfg: RunConfig, mesh: Mesh | None = None) -> Simulation:
    """A simulation at t = 0 with the configured mesh, initial state and forcing."""
    mesh = build_mesh(cfg) if mesh is None else mesh
    return Simulation(mesh, initial_field(cfg, mesh), soil=cfg.soil, rain=RainSchedule(cfg.rain),
                      manning=cfg.friction_n, cfl=cfg.cfl, h_eps=cfg.h_eps, u_max=cfg.u_max,
                      dt_max=cfg.dt_max)


def run(cfg: RunConfig, on_output: Callable[[Simulation], None] | None = None,
        mesh: Mesh | None = None, on_step: Callable[[Simulation], None] | None = None) -> RunResult:
    """Advance from t = 0 to ``t_end``, landing exactly on every output time.

    At each output time a hydrograph sample and a ledger row are recorded,
    ``on_output(sim)`` is called, and (if ``outdir`` is set) a VTK snapshot is
    written. CSV traces are written at the end. ``on_step(sim)``, if given,
    runs after every time step (slower: steps are then taken one at a time).
    """
    mesh = build_mesh(cfg) if mesh is None else mesh
    sim = make_simulation(cfg, mesh)
    has_outlet = len(mesh.edges_with_tag(OUTFLOW)) > 0
    outdir = None
    if cfg.outdir is not None:
        outdir = cfg.resolve(cfg.outdir)
        outdir.mkdir(parents=True, exist_ok=True)
    times = cfg.output_times
    hyd, rows, files = [], [], []
    for k, t in enumerate(times):
        if t > sim.t:
            sim.advance_to(t, on_step)
        if has_outlet:
            hyd.append((sim.t, sim.outlet_discharge()))
        rows.append(sim.ledger.row(sim.t))
        if on_output is not None:
            on_output(sim)
        if outdir is not None and cfg.vtk:
            files.append(write_field_vtk(mesh, sim.field, sim.Ic, outdir / f"field_{k:05d}.vtk", cfg.h_eps))
        log.info("t = %.6g s, %d steps, ledger residual %.3e m^3", sim.t, sim.n_steps, sim.ledger.residual)
    hydrograph = HydrographSeries.from_rows(hyd) if has_outlet else None
    if outdir is not None:
        if hydrograph is not None:
            files.append(write_hydrograph_csv(hydrograph, outdir / "hydrograph.csv"))
        files.append(write_ledger_csv(rows, outdir / "ledger.csv"))
    return RunResult(cfg, mesh, sim, times, hydrograph, rows, files)
