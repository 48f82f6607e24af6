"""Structured 2D curvilinear space meshes.

Nodes are stored as ``(ni+1, nj+1, 2)``.  Cell ``(i, j)`` is the quadrilateral
with corners ``(i,j), (i+1,j), (i+1,j+1), (i,j+1)``.  Face normals are scaled by
the face length and always point towards increasing ``i`` (for i-faces) or
increasing ``j`` (for j-faces), whatever the handedness of the mesh.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import DomainError, ParseError, StructuralError

SIDES = ("imin", "imax", "jmin", "jmax")


class SpaceMesh2D:
    def __init__(self, nodes, body_center=None, name="mesh"):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 3 or nodes.shape[2] != 2 or min(nodes.shape[:2]) < 2:
            raise StructuralError(f"nodes must have shape (ni+1, nj+1, 2), got {nodes.shape}")
        self.nodes = nodes
        self.ni = nodes.shape[0] - 1
        self.nj = nodes.shape[1] - 1
        self.body_center = None if body_center is None else np.asarray(body_center, float)
        self.name = name
        self._geometry()

    @property
    def shape(self):
        return (self.ni, self.nj)

    @property
    def ncells(self):
        return self.ni * self.nj

    def _geometry(self):
        X = self.nodes
        a, b = X[:-1, :-1], X[1:, :-1]
        c, d = X[1:, 1:], X[:-1, 1:]
        # shoelace over the four corners
        signed = 0.5 * ((a[..., 0] * b[..., 1] - b[..., 0] * a[..., 1])
                        + (b[..., 0] * c[..., 1] - c[..., 0] * b[..., 1])
                        + (c[..., 0] * d[..., 1] - d[..., 0] * c[..., 1])
                        + (d[..., 0] * a[..., 1] - a[..., 0] * d[..., 1]))
        if np.any(signed == 0) or not (np.all(signed > 0) or np.all(signed < 0)):
            raise DomainError("mesh has degenerate or folded cells")
        s = 1.0 if signed.flat[0] > 0 else -1.0
        self.handedness = s
        self.volumes = np.abs(signed)
        self.centers = 0.25 * (a + b + c + d)
        e = X[:, 1:] - X[:, :-1]
        self.normal_i = s * np.stack([e[..., 1], -e[..., 0]], axis=-1)
        e = X[1:, :] - X[:-1, :]
        self.normal_j = s * np.stack([-e[..., 1], e[..., 0]], axis=-1)
        self.face_center_i = 0.5 * (X[:, 1:] + X[:, :-1])
        self.face_center_j = 0.5 * (X[1:, :] + X[:-1, :])

    def closure_defect(self):
        """Max relative norm of the summed outward normals per cell."""
        ni, nj = self.shape
        tot = (self.normal_i[1:] - self.normal_i[:-1]
               + self.normal_j[:, 1:] - self.normal_j[:, :-1])
        scale = np.maximum(np.linalg.norm(self.normal_i[1:], axis=-1),
                           np.linalg.norm(self.normal_j[:, 1:], axis=-1))
        return float(np.max(np.linalg.norm(tot, axis=-1) / scale))

    def boundary_faces(self, side):
        """Face centres, scaled normals pointing out of the domain, and cell indices."""
        if side == "imin":
            return self.face_center_i[0], -self.normal_i[0], [(0, j) for j in range(self.nj)]
        if side == "imax":
            return (self.face_center_i[-1], self.normal_i[-1],
                    [(self.ni - 1, j) for j in range(self.nj)])
        if side == "jmin":
            return self.face_center_j[:, 0], -self.normal_j[:, 0], [(i, 0) for i in range(self.ni)]
        if side == "jmax":
            return (self.face_center_j[:, -1], self.normal_j[:, -1],
                    [(i, self.nj - 1) for i in range(self.ni)])
        raise StructuralError(f"unknown mesh side {side!r}")

    def min_cell_width(self):
        return float(np.min(self.volumes / np.maximum(
            np.linalg.norm(self.normal_i[1:], axis=-1),
            np.linalg.norm(self.normal_j[:, 1:], axis=-1))))

    def to_dict(self):
        out = {"ni": self.ni, "nj": self.nj, "name": self.name,
               "nodes": [[[float(x) for x in p] for p in row] for row in self.nodes]}
        if self.body_center is not None:
            out["body_center"] = [float(x) for x in self.body_center]
        return out

    @classmethod
    def from_dict(cls, doc):
        try:
            nodes = np.array(doc["nodes"], dtype=float)
            if nodes.shape[:2] != (doc["ni"] + 1, doc["nj"] + 1):
                raise StructuralError("node array does not match ni, nj")
            return cls(nodes, doc.get("body_center"), doc.get("name", "mesh"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, StructuralError):
                raise
            raise ParseError(f"malformed mesh document: {exc}") from exc

    def write(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def read(cls, path):
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno) from exc
        return cls.from_dict(doc)


def stretched_spacing(length, n, first):
    """Geometric node distances ``[0, ..., length]`` whose first step is ``first``."""
    if first * n >= length:
        return np.linspace(0.0, length, n + 1)
    lo, hi = 1.0, 2.0
    while first * (hi ** n - 1) / (hi - 1) < length:
        hi *= 2
    for _ in range(200):
        r = 0.5 * (lo + hi)
        if first * (r ** n - 1) / (r - 1) < length:
            lo = r
        else:
            hi = r
    r = 0.5 * (lo + hi)
    s = first * (r ** np.arange(n + 1) - 1) / (r - 1)
    s[-1] = length
    return s


def annulus_sector(r_body, r_outer, ni, nj, first_cell=None, theta_span=90.0,
                   center=(0.0, 0.0)):
    """Region in front of a cylinder, from the stagnation line to ``theta_span``.

    The free stream moves along +x; the stagnation point sits at
    ``(xc - r_body, yc)``.  Index ``i`` runs wall-normal (i=0 on the body),
    ``j`` runs along the wall from the symmetry line y = yc.
    """
    if not 0 < r_body < r_outer:
        raise DomainError("need 0 < r_body < r_outer")
    if not 0 < theta_span <= 180:
        raise DomainError("theta_span must be in (0, 180] degrees")
    s = (stretched_spacing(r_outer - r_body, ni, first_cell) if first_cell
         else np.linspace(0.0, r_outer - r_body, ni + 1))
    r = r_body + s
    theta = np.radians(np.linspace(0.0, theta_span, nj + 1))
    phi = math.pi - theta
    x = center[0] + r[:, None] * np.cos(phi)[None, :]
    y = center[1] + r[:, None] * np.sin(phi)[None, :]
    y[:, 0] = center[1]
    return SpaceMesh2D(np.stack([x, y], axis=-1), body_center=center, name="annulus_sector")


def rectangle(lx, ly, ni, nj, origin=(0.0, 0.0)):
    """Uniform channel; i runs along x (wall-normal when walls sit at x = const)."""
    x = origin[0] + np.linspace(0.0, lx, ni + 1)
    y = origin[1] + np.linspace(0.0, ly, nj + 1)
    X, Y = np.meshgrid(x, y, indexing="ij")
    return SpaceMesh2D(np.stack([X, Y], axis=-1), name="rectangle")


def wall_angles(mesh: SpaceMesh2D, points):
    """Angle in degrees from the stagnation point, measured at the body centre."""
    if mesh.body_center is None:
        raise StructuralError("mesh has no body centre; wall angles are undefined")
    p = np.asarray(points) - mesh.body_center
    return np.degrees(np.arctan2(p[..., 1], -p[..., 0]))
