"""Command-line entry point (``python -m swgreen``)."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .calibration import calibrate_manning, rmse
from .config import (
    PRESET_NAMES,
    RunConfig,
    apply_overrides,
    build_mesh,
    check_required,
    format_config,
    load_config,
    run,
    scenario_preset,
)
from .constants import OUTFLOW, WALL
from .errors import ConfigError, MeshError, NumericalError, SimulationAborted
from .output import read_hydrograph_csv

EXIT_CONFIG = 2
EXIT_ABORTED = 3


def _summary(res) -> str:
    sim = res.simulation
    led = sim.ledger
    lines = [f"t = {sim.t:.6g} s after {sim.n_steps} steps on {res.mesh.n_cells} cells",
             f"surface volume     {led.surface_volume:.6e} m^3",
             f"infiltrated volume {led.infiltrated_volume:.6e} m^3",
             f"rain in            {led.rain_in:.6e} m^3",
             f"outflow            {led.outflow_out:.6e} m^3",
             f"ledger residual    {led.residual:.3e} m^3"]
    if res.hydrograph is not None:
        lines.append(f"final discharge    {res.hydrograph.Q[-1]:.6e} m^3/s")
    if res.files:
        lines.append(f"wrote {len(res.files)} files to {res.files[0].parent}")
    return "\n".join(lines)


def _cmd_run(args) -> int:
    res = run(load_config(args.config))
    print(_summary(res))
    return 0


def _cmd_preset(args) -> int:
    cfg = apply_overrides(scenario_preset(args.name), args.override)
    if args.print_config:
        sys.stdout.write(format_config(cfg))
        return 0
    check_required(args.name, cfg)
    print(_summary(run(cfg)))
    return 0


def _cmd_rmse(args) -> int:
    sim = read_hydrograph_csv(args.simulated)
    obs = read_hydrograph_csv(args.observed, ordered=False)
    print(f"{rmse(sim, obs):.10e}")
    return 0


def _cmd_calibrate(args) -> int:
    try:
        grid = [float(x) for x in args.n_grid.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--n-grid must be comma-separated numbers, got {args.n_grid!r}") from None
    cfg = load_config(args.config)
    obs = read_hydrograph_csv(args.observed, ordered=False)
    best, table = calibrate_manning(cfg, obs, grid)
    print("n,rmse_m3s")
    for n, err in table:
        print(f"{n!r},{err:.10e}")
    print(f"best n = {best!r}")
    return 0


def _mesh_report(cfg: RunConfig) -> str:
    mesh = build_mesh(cfg)
    tags = mesh.edge_tags[mesh.boundary_edges]
    r = mesh.cell_inradius
    return "\n".join([
        f"vertices        {mesh.n_vertices}",
        f"cells           {mesh.n_cells}",
        f"edges           {mesh.n_edges} ({len(mesh.boundary_edges)} on the boundary: "
        f"{int(np.sum(tags == WALL))} wall, {int(np.sum(tags == OUTFLOW))} outflow)",
        f"total area      {mesh.total_area:.10g} m^2",
        f"mean cell area  {mesh.total_area / mesh.n_cells:.6e} m^2",
        f"inradius        {r.min():.6e} .. {r.max():.6e} m",
        f"bottom          {mesh.bottom.min():.6g} .. {mesh.bottom.max():.6g} m",
    ])


def _cmd_mesh_info(args) -> int:
    print(_mesh_report(load_config(args.config)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swgreen", description="Overland flow with Green-Ampt infiltration.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress at every output time")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", help="run a config file")
    s.add_argument("config")
    s.set_defaults(func=_cmd_run)

    s = sub.add_parser("preset", help="run a built-in scenario")
    s.add_argument("name", choices=PRESET_NAMES)
    s.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="replace a config line, e.g. 'rain=0 1800 50mm/h' (repeatable)")
    s.add_argument("--print-config", action="store_true", help="print the resulting config and exit")
    s.set_defaults(func=_cmd_preset)

    s = sub.add_parser("rmse", help="discharge RMSE of a simulated hydrograph against observations")
    s.add_argument("simulated")
    s.add_argument("observed")
    s.set_defaults(func=_cmd_rmse)

    s = sub.add_parser("calibrate", help="grid search for the Manning coefficient")
    s.add_argument("config")
    s.add_argument("observed")
    s.add_argument("--n-grid", required=True, help="comma-separated Manning coefficients")
    s.set_defaults(func=_cmd_calibrate)

    s = sub.add_parser("mesh-info", help="summarise the mesh a config describes")
    s.add_argument("config")
    s.set_defaults(func=_cmd_mesh_info)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, MeshError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationAborted, NumericalError) as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_ABORTED


if __name__ == "__main__":
    sys.exit(main())
