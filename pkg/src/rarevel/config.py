"""JSON run configuration (``schema: 1``) with strict key checking."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
import json

import numpy as np

from .errors import ParseError, StructuralError, ValidationError
from .kinetic import GasModel, PrimitiveState, air, argon
from .mesh import SIDES, SpaceMesh2D, annulus_sector, rectangle
from .solver import DiffuseWall, Inflow, Outflow, SolverConfig, SymmetryPlane

SCHEMA = 1
GAS_PRESETS = {"argon": argon, "air": air}
GRID_KEYS = {"c", "a", "mode", "extend_for_p0", "n_omega", "coordinate_system", "wall_T",
             "symmetry_axis"}
GAS_KEYS = {"preset", "R", "mu_ref", "T_ref", "omega_visc", "delta", "d_v"}
CASE_KEYS = {"mesh", "bcs", "init", "upstream"}
OUTPUT_KEYS = {"dir", "vtk", "flux_csv", "residual_csv", "macro"}
MESH_KEYS = {
    "annulus_sector": {"generator", "r_body", "r_outer", "ni", "nj", "first_cell", "theta_span",
                       "center"},
    "rectangle": {"generator", "lx", "ly", "ni", "nj", "origin"},
}


def _check_keys(doc, allowed, where):
    if not isinstance(doc, dict):
        raise StructuralError(f"{where} must be an object")
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise StructuralError(f"unknown key(s) in {where}: {unknown}")


def _state(doc, where):
    _check_keys(doc, {"rho", "u", "T"}, where)
    try:
        return PrimitiveState(float(doc["rho"]), np.asarray(doc["u"], float), float(doc["T"]))
    except KeyError as exc:
        raise StructuralError(f"{where} needs {exc}") from None


def parse_gas(doc) -> GasModel:
    _check_keys(doc, GAS_KEYS, "gas")
    doc = dict(doc)
    preset = doc.pop("preset", None)
    if preset is not None:
        if preset not in GAS_PRESETS:
            raise ValidationError(f"unknown gas preset {preset!r}")
        base = GAS_PRESETS[preset](doc.pop("d_v", 2))
        params = {k: getattr(base, k) for k in ("R", "mu_ref", "T_ref", "omega_visc",
                                                "delta", "d_v")}
        params.update(doc)
        return GasModel(**params)
    return GasModel(**doc)


def parse_bc(doc, side):
    if not isinstance(doc, dict) or "type" not in doc:
        raise StructuralError(f"bcs.{side} needs a 'type'")
    kind = doc["type"]
    rest = {k: v for k, v in doc.items() if k != "type"}
    if kind == "diffuse_wall":
        _check_keys(rest, {"T_w"}, f"bcs.{side}")
        return DiffuseWall(float(rest["T_w"]))
    if kind == "inflow":
        return Inflow(_state(rest, f"bcs.{side}"))
    if kind == "outflow":
        _check_keys(rest, set(), f"bcs.{side}")
        return Outflow()
    if kind == "symmetry":
        _check_keys(rest, {"axis"}, f"bcs.{side}")
        return SymmetryPlane(int(rest.get("axis", 1)))
    raise ValidationError(f"bcs.{side}: unknown type {kind!r}")


def build_mesh(doc, base: Path) -> SpaceMesh2D:
    if "file" in doc:
        _check_keys(doc, {"file"}, "case.mesh")
        path = (base / doc["file"]).resolve()
        if not path.exists():
            raise ValidationError(f"mesh file {path} does not exist")
        return SpaceMesh2D.read(path)
    gen = doc.get("generator")
    if gen not in MESH_KEYS:
        raise ValidationError(f"case.mesh: unknown generator {gen!r}")
    _check_keys(doc, MESH_KEYS[gen], "case.mesh")
    args = {k: v for k, v in doc.items() if k != "generator"}
    if gen == "annulus_sector":
        return annulus_sector(**args)
    return rectangle(**args)


@dataclass
class RunConfig:
    gas: GasModel
    grid: dict
    solver: SolverConfig
    mesh: SpaceMesh2D
    bcs: dict
    init: object
    init_path: Path | None
    upstream: PrimitiveState | None
    output: dict = field(default_factory=dict)
    base: Path = Path(".")

    @classmethod
    def from_dict(cls, doc, base="."):
        base = Path(base)
        _check_keys(doc, {"schema", "gas", "grid", "solver", "case", "output"}, "config")
        if doc.get("schema") != SCHEMA:
            raise ValidationError(f"unsupported schema {doc.get('schema')!r}; expected {SCHEMA}")
        gas = parse_gas(doc.get("gas", {"preset": "argon"}))
        grid = dict(c=4.0, a=2.0, mode="Q1", extend_for_p0=False, n_omega=30,
                    coordinate_system="cartesian", wall_T=None, symmetry_axis=None)
        g = doc.get("grid", {})
        _check_keys(g, GRID_KEYS, "grid")
        grid.update(g)
        if not grid["c"] > 0 or not grid["a"] > 0:
            raise ValidationError("grid.c and grid.a must be positive")
        solver = SolverConfig.from_dict(doc.get("solver", {}))
        case = doc.get("case")
        if case is None:
            raise StructuralError("config needs a 'case' section")
        _check_keys(case, CASE_KEYS, "case")
        mesh = build_mesh(case.get("mesh", {}), base)
        bdoc = case.get("bcs", {})
        _check_keys(bdoc, SIDES, "case.bcs")
        bcs = {side: parse_bc(bdoc[side], side) for side in SIDES if side in bdoc}
        if len(bcs) != 4:
            raise StructuralError(f"case.bcs must assign all of {SIDES}")
        upstream = _state(case["upstream"], "case.upstream") if "upstream" in case else None
        if upstream is None:
            inflows = [bc.state for bc in bcs.values() if isinstance(bc, Inflow)]
            upstream = inflows[0] if inflows else None
        init, init_path = parse_init(case.get("init", "upstream"), base)
        if init == "upstream" and upstream is None:
            raise ValidationError("init 'upstream' needs an inflow boundary or case.upstream")
        out = {"dir": "out", "vtk": "fields.vtk", "flux_csv": "wall_flux.csv",
               "residual_csv": "residuals.csv", "macro": "fields.dat"}
        o = doc.get("output", {})
        _check_keys(o, OUTPUT_KEYS, "output")
        out.update(o)
        return cls(gas, grid, solver, mesh, bcs, init, init_path, upstream, out, base)

    @classmethod
    def load(cls, path):
        path = Path(path)
        if not path.exists():
            raise ValidationError(f"config file {path} does not exist")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno) from exc
        return cls.from_dict(doc, path.parent)

    @property
    def output_dir(self) -> Path:
        return (self.base / self.output["dir"]).resolve()


def parse_init(value, base: Path):
    """``'upstream'`` or ``'macro-file <path>'`` (an object ``{"macro_file": path}`` also works)."""
    if isinstance(value, dict):
        _check_keys(value, {"macro_file"}, "case.init")
        value = f"macro-file {value['macro_file']}"
    if value == "upstream":
        return "upstream", None
    if isinstance(value, str) and value.startswith("macro-file"):
        p = value[len("macro-file"):].strip()
        if not p:
            raise ValidationError("init 'macro-file' needs a path")
        path = (base / p).resolve()
        if not path.exists():
            raise ValidationError(f"macro-field file {path} does not exist")
        return "macro-file", path
    raise ValidationError(f"case.init must be 'upstream' or 'macro-file <path>', got {value!r}")
