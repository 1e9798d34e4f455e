"""Still water over the bumpy basin bed stays still.

The basin bed has ridges and hollows, so the pressure flux through each cell
boundary is far from zero. For a flat surface it must cancel the bed-slope
source exactly. We run 1000 steps and report how far w, p and q drift.

    python demos/lake_at_rest.py
"""
import numpy as np

from swgreen.config import make_simulation, scenario_preset

sim = make_simulation(scenario_preset("lake_at_rest"))
m = sim.mesh
print(f"{m.n_cells} cells, bed from {m.cell_bottom.min():.3f} to {m.cell_bottom.max():.3f} m, surface 1.2 m")

for block in range(5):
    for _ in range(200):
        sim.step()
    U = sim.U
    print(f"step {sim.n_steps:5d}  t = {sim.t:7.3f} s  "
          f"max|w - 1.2| = {np.abs(U[:, 0] - 1.2).max():.1e}  max|p|,|q| = {np.abs(U[:, 1:]).max():.1e}")
