"""Rain on a 4 % plane: the outlet hydrograph rises to the rainfall rate.

A 21.945 m long, 1 m wide plane (n = 0.48) gets 50 mm/h of rain from a dry
start. At equilibrium everything that falls leaves through the outlet, so
Q -> R * area = 3.048e-4 m^3/s. The preset mesh takes about 10 minutes on one
core; ``--coarse`` uses a 4x coarser mesh and finishes in a couple of minutes.

    python demos/slope_hydrograph.py [--coarse]
"""
import sys

from swgreen.config import apply_overrides, make_simulation, scenario_preset

overrides = ["rain=0 7200 50mm/h"]
if "--coarse" in sys.argv:
    overrides += ["nx=64", "ny=3"]
cfg = apply_overrides(scenario_preset("slope_runoff"), overrides)
sim = make_simulation(cfg)
target = 50e-3 / 3600 * 21.945

print(f"{sim.mesh.n_cells} cells, equilibrium discharge {target:.4e} m^3/s")
print("   t [s]     Q [m^3/s]   Q/equilibrium")
prev = -1.0
for t in range(100, 2001, 100):
    sim.advance_to(float(t))
    Q = sim.outlet_discharge()
    print(f"{t:8d}  {Q:.6e}   {Q / target:.6f}")
    if abs(Q - prev) <= 1e-7 * Q:
        print("steady")
        break
    prev = Q

led = sim.ledger
print(f"rain in {led.rain_in:.4f} m^3, out {led.outflow_out:.4f} m^3, on the plane {led.surface_volume:.4f} m^3, "
      f"residual {led.residual:.1e} m^3")
