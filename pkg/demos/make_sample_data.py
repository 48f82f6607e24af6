"""Regenerate the shipped sample fields and example configuration.

Writes into src/rarevel/data:
  cyl_cns.dat     argon Mach-20 cylinder, 50 x 50 polar sample
  sphere_cns.dat  air Mach-20 sphere, 50 x 50 meridian sample
  cylinder.json   half-domain run on the cylinder initialised from cyl_cns.dat
"""
import json
from pathlib import Path

from rarevel.io import field_extrema, write_macro_fields
from rarevel.kinetic import air, argon
from rarevel.surrogate import cylinder_model, sample_field, sphere_model

OUT = Path(__file__).resolve().parents[1] / "src" / "rarevel" / "data"


def header(name, model, field):
    lines = [f"{name}: analytic bow-shock surrogate, Mach {model.mach:.2f}",
             f"free stream rho={model.rho_inf:g} kg/m^3 u={model.u_inf:.6g} m/s "
             f"T={model.T_inf:.6g} K, wall T={model.T_wall:g} K, body radius {model.radius:g} m",
             "columns: x y rho ux uy T (SI), i (wall-normal) fastest"]
    lines += [f"{k} in [{a:.6g}, {b:.6g}]" for k, (a, b) in field_extrema(field).items()]
    return lines


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    cyl = cylinder_model(argon())
    f = sample_field(cyl)
    write_macro_fields(f, OUT / "cyl_cns.dat", header("cylinder", cyl, f))
    sph = sphere_model(air(d_v=3))
    f = sample_field(sph)
    write_macro_fields(f, OUT / "sphere_cns.dat", header("sphere", sph, f))
    up = {"rho": cyl.rho_inf, "u": [cyl.u_inf, 0.0], "T": cyl.T_inf}
    cfg = {
        "schema": 1,
        "gas": {"preset": "argon"},
        "grid": {"c": 4, "a": 2, "mode": "P0", "wall_T": 293.0, "symmetry_axis": 1},
        "solver": {"dt_growth": 1.1, "second_order_half_factor": True, "steady_tol": 1e-3,
                   "max_outer": 3000},
        "case": {
            "mesh": {"generator": "annulus_sector", "r_body": 0.1, "r_outer": 0.45,
                     "ni": 30, "nj": 30, "first_cell": 1e-4},
            "bcs": {"imin": {"type": "diffuse_wall", "T_w": 293.0},
                    "imax": dict(type="inflow", **up),
                    "jmin": {"type": "symmetry", "axis": 1},
                    "jmax": {"type": "outflow"}},
            "init": "macro-file cyl_cns.dat",
        },
        "output": {"dir": "out"},
    }
    (OUT / "cylinder.json").write_text(json.dumps(cfg, indent=2) + "\n")
    for p in sorted(OUT.iterdir()):
        print(p.name, p.stat().st_size)


if __name__ == "__main__":
    main()
