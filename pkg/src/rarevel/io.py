"""Text formats: macro fields, legacy VTK, wall-flux and residual CSVs."""
from __future__ import annotations

import csv
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ParseError, StructuralError, ValidationError
from .velgrid import MacroField

FLUX_HEADER = ["theta_deg", "x", "y", "q_n_W_per_m2"]
RESIDUAL_HEADER = ["iter", "residual", "dt"]


def sample_path(name) -> Path:
    """Path of a file shipped in ``rarevel/data`` (sample fields, example configs)."""
    path = Path(str(resources.files("rarevel") / "data" / name))
    if not path.exists():
        raise ValidationError(f"no shipped sample named {name!r}")
    return path


def _structured_index(k, dims):
    idx = []
    for n in dims:
        idx.append(k % n)
        k //= n
    return tuple(idx)


def read_macro_fields(path) -> MacroField:
    """Parse ``dims ni nj [nk]`` followed by ``x y [z] rho u.. T`` lines, i fastest."""
    path = Path(path)
    dims = None
    rows = []
    ncol = None
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if dims is None:
                if parts[0] != "dims" or len(parts) not in (2, 3, 4):
                    raise ParseError("expected header 'dims i_max j_max [k_max]'", lineno)
                try:
                    dims = tuple(int(p) for p in parts[1:])
                except ValueError:
                    raise ParseError(f"non-integer dimension in {text!r}", lineno) from None
                if min(dims) < 1:
                    raise ParseError("dimensions must be positive", lineno)
                continue
            if ncol is None:
                ncol = len(parts)
                nvel = ncol - len(dims) - 2
                if nvel < 1 or nvel > 3:
                    raise ParseError(f"{ncol} columns cannot hold {len(dims)} coordinates, "
                                     "rho, velocity and T", lineno)
            if len(parts) != ncol:
                raise ParseError(f"expected {ncol} columns, found {len(parts)}", lineno)
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                raise ParseError(f"non-numeric value in {text!r}", lineno) from None
            if not all(math.isfinite(x) for x in vals):
                raise ParseError("non-finite value", lineno)
            k = len(rows)
            nd = len(dims)
            rho, T = vals[nd], vals[-1]
            if not rho > 0 or not T > 0:
                raise ValidationError(
                    f"line {lineno}: cell {_structured_index(k, dims)} has rho={rho}, T={T}")
            rows.append(vals)
    if dims is None:
        raise ParseError("empty file: missing 'dims' header", 1)
    n = int(np.prod(dims))
    if len(rows) != n:
        raise ParseError(f"dims announce {n} cells but {len(rows)} data lines were found",
                         lineno if rows else 1)
    data = np.array(rows)
    nd = len(dims)
    return MacroField(dims, data[:, nd], data[:, nd + 1:-1], data[:, -1], coords=data[:, :nd])


def write_macro_fields(field: MacroField, path, comments=()):
    """Write the macro-field format with 17 significant digits."""
    if field.coords is None:
        raise StructuralError("macro-field files need cell coordinates")
    with Path(path).open("w") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write("dims " + " ".join(str(n) for n in field.dims) + "\n")
        for k in range(field.ncells):
            vals = [*field.coords[k], field.rho[k], *field.u[k], field.T[k]]
            fh.write(" ".join(f"{x:.17g}" for x in vals) + "\n")


def field_extrema(field: MacroField) -> dict:
    out = {"rho": (field.rho.min(), field.rho.max()), "T": (field.T.min(), field.T.max())}
    for c in range(field.dim):
        out[f"u{c}"] = (field.u[:, c].min(), field.u[:, c].max())
    return {k: (float(a), float(b)) for k, (a, b) in out.items()}


def write_vtk(field: MacroField, path, R, title="rarevel fields"):
    """Legacy ASCII structured grid with point data rho, u, T and p = rho R T."""
    if field.coords is None:
        raise StructuralError("VTK output needs cell coordinates")
    dims = list(field.dims) + [1] * (3 - len(field.dims))
    pts = np.zeros((field.ncells, 3))
    pts[:, :field.coords.shape[1]] = field.coords
    vel = np.zeros((field.ncells, 3))
    vel[:, :field.dim] = field.u
    p = field.rho * R * field.T
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET STRUCTURED_GRID",
             f"DIMENSIONS {dims[0]} {dims[1]} {dims[2]}", f"POINTS {field.ncells} double"]
    lines += [f"{a:.10g} {b:.10g} {c:.10g}" for a, b, c in pts]
    lines.append(f"POINT_DATA {field.ncells}")
    for name, arr in (("rho", field.rho), ("T", field.T), ("p", p)):
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [f"{x:.10g}" for x in arr]
    lines.append("VECTORS u double")
    lines += [f"{a:.10g} {b:.10g} {c:.10g}" for a, b, c in vel]
    Path(path).write_text("\n".join(lines) + "\n")


def write_flux_csv(flux, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FLUX_HEADER)
        for row in zip(flux.theta_deg, flux.x, flux.y, flux.q_n):
            w.writerow([f"{x:.17g}" for x in row])


def read_flux_csv(path):
    """Returns ``(theta_deg, x, y, q_n)`` arrays sorted by angle."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != FLUX_HEADER:
        raise ParseError(f"expected header {','.join(FLUX_HEADER)}", 1)
    data = []
    for lineno, row in enumerate(rows[1:], 2):
        if not row:
            continue
        if len(row) != 4:
            raise ParseError(f"expected 4 columns, found {len(row)}", lineno)
        try:
            data.append([float(x) for x in row])
        except ValueError:
            raise ParseError(f"non-numeric entry {row}", lineno) from None
    if not data:
        raise ParseError("no data rows", 2)
    a = np.array(data)
    a = a[np.argsort(a[:, 0], kind="stable")]
    return a[:, 0], a[:, 1], a[:, 2], a[:, 3]


def write_residual_csv(report, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESIDUAL_HEADER)
        for k, (r, dt) in enumerate(zip(report.residuals, report.dts), 1):
            w.writerow([k, f"{r:.17g}", f"{dt:.17g}"])


def compare_flux(theta_a, q_a, theta_b, q_b):
    """Max and L2 relative differences of profile ``b`` against reference ``a``.

    ``b`` is linearly interpolated in angle when the samplings differ.
    """
    theta_a, q_a = np.asarray(theta_a, float), np.asarray(q_a, float)
    theta_b, q_b = np.asarray(theta_b, float), np.asarray(q_b, float)
    if len(theta_a) != len(theta_b) or not np.allclose(theta_a, theta_b, rtol=0, atol=1e-9):
        q_b = np.interp(theta_a, theta_b, q_b)
    if np.any(q_a == 0):
        raise ValidationError("reference profile has zero flux; relative difference undefined")
    rel = np.abs(q_b - q_a) / np.abs(q_a)
    l2 = np.linalg.norm(q_b - q_a) / np.linalg.norm(q_a)
    return float(rel.max()), float(l2)
