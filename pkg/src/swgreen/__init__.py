"""Coupled shallow-water / Green-Ampt simulation on triangular meshes."""
from .calibration import calibrate_manning, rmse
from .config import RunConfig, RunResult, load_config, parse_config, run, scenario_preset
from .errors import ConfigError, MeshError, MeshParseError, NumericalError, SimulationAborted
from .infiltration import InfiltrationState, SoilLayer, SoilModel, soil_preset
from .mesh import Mesh, build_mesh, generate_rect_mesh, load_mesh, read_mesh
from .output import HydrographSeries
from .solver import FlowField, MassLedger, RainSchedule, Simulation

__all__ = [
    "calibrate_manning", "rmse",
    "RunConfig", "RunResult", "load_config", "parse_config", "run", "scenario_preset",
    "ConfigError", "MeshError", "MeshParseError", "NumericalError", "SimulationAborted",
    "InfiltrationState", "SoilLayer", "SoilModel", "soil_preset",
    "Mesh", "build_mesh", "generate_rect_mesh", "load_mesh", "read_mesh",
    "HydrographSeries",
    "FlowField", "MassLedger", "RainSchedule", "Simulation",
]
