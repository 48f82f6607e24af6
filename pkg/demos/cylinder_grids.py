"""Velocity grids for the Mach-20 argon cylinder.

Builds the fine Cartesian grid and the AMR grids (Q1, P0, symmetric P0) from
the shipped surrogate field, and the cheaper grid estimated from the
Rankine-Hugoniot states alone.
"""
import numpy as np

from rarevel.io import read_macro_fields, sample_path
from rarevel.kinetic import PrimitiveState, argon
from rarevel.velgrid import generate_grid, rankine_hugoniot_fields

gas = argon()
field = read_macro_fields(sample_path("cyl_cns.dat"))
print(f"sample field {field.dims}, T in [{field.T.min():.0f}, {field.T.max():.0f}] K")

for label, kw in (("Q1", dict(mode="Q1")), ("P0", dict(mode="P0")),
                  ("P0 symmetric", dict(mode="P0", symmetry_axis=1))):
    g, spec, _ = generate_grid(field, gas, c=4, a=2, wall_T=293.0, **kw)
    fine = int(np.prod(spec.n))
    print(f"{label:13s} fine {spec.n[0]}x{spec.n[1]} (dv {spec.dv:.0f} m/s) -> {g.npoints:5d} "
          f"points, {fine / g.npoints:.1f}x fewer")

up = PrimitiveState(3.17e-6, [5810.0, 0.0], 242.4)
rh = rankine_hugoniot_fields(up, 293.0, gas)
g, spec, _ = generate_grid(rh, gas, c=4, a=2, mode="Q1", wall_T=293.0)
print(f"Rankine-Hugoniot estimate: {g.npoints} Q1 points from three states")
