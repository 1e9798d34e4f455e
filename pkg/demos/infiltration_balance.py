"""Ponded water soaking into one- and two-layer soils.

A 10 cm pond on a closed flat box has nowhere to go but down. The surface
depth h falls while the infiltrated depth Ic rises, and h + Ic stays at
0.1 m. The full 2 h preset runs take 40 to 50 minutes each on one core, so this
demo stops at 2 minutes. It also compares the one-cell Green-Ampt update
with the two-layer one over two hours.

    python demos/infiltration_balance.py
"""
import dataclasses

from swgreen.config import apply_overrides, run, scenario_preset
from swgreen.infiltration import advance_one_layer, advance_two_layer, soil_preset


def show(sim):
    h = sim.depth
    print(f"  t = {sim.t:5.0f} s  h = {h.mean() * 100:.5f} cm  Ic = {sim.Ic.mean() * 100:.5f} cm  "
          f"h + Ic - 0.1 = {h.mean() + sim.Ic.mean() - 0.1:+.1e} m  spread of h {h.max() - h.min():.1e} m")


for name in ("conservation_one_layer", "conservation_two_layer"):
    cfg = dataclasses.replace(apply_overrides(scenario_preset(name), ["t_end=120", "output_every=30"]),
                              outdir=None)
    print(name)
    run(cfg, on_output=show)

print("\ncumulative infiltration under zero ponding, 60 s steps")
sandy = soil_preset("sandy_loam").upper
two = soil_preset("two_layer")
a = b = 0.0
for k in range(1, 121):
    a = advance_one_layer(sandy, 0.0, a, 60.0)
    b = advance_two_layer(two, 0.0, b, 60.0)
    if k % 20 == 0:
        print(f"  {k:4d} min  sandy loam {a * 100:6.3f} cm   1 mm sandy loam over silt loam {b * 100:6.3f} cm")
