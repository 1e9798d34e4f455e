"""Recover a Manning coefficient from a hydrograph.

A small plane is run once with n = 0.3 to make synthetic "observations".
Then a grid of n values is tried and each run is scored by RMSE against
them. The grid point that generated the data comes back with RMSE 0.

    python demos/calibration.py
"""
import dataclasses

from swgreen.calibration import calibrate_manning
from swgreen.config import parse_config, run

cfg = parse_config("""\
mesh = rect
domain = 4 0.5
nx = 12
ny = 2
bottom = slope 0.04
boundary = east outflow
rain = 0 120 100mm/h
t_end = 240
output_every = 10
""")

observed = run(dataclasses.replace(cfg, friction_n=0.3)).hydrograph
print("observations (every 40 s):", ", ".join(f"{q:.3e}" for q in observed.Q[::4]))

best, table = calibrate_manning(cfg, observed, [0.1, 0.2, 0.25, 0.3, 0.35, 0.4, 0.6])
for n, err in table:
    print(f"  n = {n:4.2f}  rmse = {err:.3e} m^3/s")
print(f"best n = {best}")
