"""Closed oriented triangle meshes: construction, validation, bulk measures."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class MeshError(Exception):
    """Base class for mesh construction/validation failures."""


class TopologyError(MeshError):
    """Mesh is not a closed, consistently oriented genus-0 2-manifold."""


class OrientationError(MeshError):
    """Face orientation is inconsistent with an outward normal (volume <= 0)."""


class DegenerateFaceError(MeshError):
    """A face area is negligible relative to the mesh scale."""


class TriMesh:
    """Immutable closed oriented triangle mesh.

    vertices: (n, 3) float64, faces: (m, 3) int64 with counter-clockwise
    orientation seen from outside.  Construction validates closedness,
    consistent orientation, Euler characteristic 2 and non-degenerate faces;
    the arrays are frozen afterwards.
    """

    __slots__ = ("vertices", "faces", "_edges")

    def __init__(self, vertices, faces, *, validate: bool = True, geom_eps: float = 1e-6):
        v = np.ascontiguousarray(vertices, dtype=np.float64)
        f = np.ascontiguousarray(faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise TopologyError(f"vertices must be (n, 3), got {v.shape}")
        if f.ndim != 2 or f.shape[1] != 3:
            raise TopologyError(f"faces must be (m, 3), got {f.shape}")
        if not np.isfinite(v).all():
            raise TopologyError("vertex coordinates must be finite")
        self.vertices = v
        self.faces = f
        self._edges = None
        if validate:
            self._validate(geom_eps)
        self.vertices.setflags(write=False)
        self.faces.setflags(write=False)

    # -- construction helpers -------------------------------------------------

    def with_vertices(self, vertices, *, validate: bool = False) -> "TriMesh":
        """Same connectivity with moved vertices (used by the flow loop)."""
        return TriMesh(vertices, self.faces, validate=validate)

    # -- derived topology -----------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    @property
    def edges(self) -> np.ndarray:
        """Unique undirected edges as a sorted (E, 2) int array."""
        if self._edges is None:
            f = self.faces
            e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
            e.sort(axis=1)
            self._edges = np.unique(e, axis=0)
            self._edges.setflags(write=False)
        return self._edges

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def chi(self) -> int:
        """Euler characteristic V - E + F."""
        return self.n_vertices - self.n_edges + self.n_faces

    # -- validation -----------------------------------------------------------

    def _validate(self, geom_eps: float) -> None:
        f = self.faces
        n = self.n_vertices
        if f.size and (f.min() < 0 or f.max() >= n):
            raise TopologyError("face indices out of range")
        if (f[:, 0] == f[:, 1]).any() or (f[:, 1] == f[:, 2]).any() or (f[:, 2] == f[:, 0]).any():
            raise TopologyError("face repeats a vertex")
        used = np.zeros(n, dtype=bool)
        used[f.ravel()] = True
        if not used.all():
            raise TopologyError("isolated vertices present")

        directed = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        keys = directed[:, 0].astype(np.int64) * n + directed[:, 1]
        if np.unique(keys).size != keys.size:
            raise TopologyError("repeated directed edge; orientation inconsistent or non-manifold")
        # Closed + consistently oriented: the reversed edge set must coincide.
        rev = directed[:, 1].astype(np.int64) * n + directed[:, 0]
        if not np.array_equal(np.sort(keys), np.sort(rev)):
            raise TopologyError("mesh has boundary or inconsistently oriented faces")

        if self.chi != 2:
            raise TopologyError(f"Euler characteristic must be 2, got {self.chi}")

        areas = face_areas(self)
        mean_area = float(areas.mean())
        if mean_area <= 0.0 or not np.isfinite(mean_area):
            raise DegenerateFaceError("mesh has no usable face area")
        bad = areas <= geom_eps * mean_area
        if bad.any():
            raise DegenerateFaceError(
                f"{int(bad.sum())} degenerate faces (area <= {geom_eps} * mean)"
            )


@dataclass(frozen=True)
class Measures:
    """Bulk measures of a closed mesh."""

    area: float
    volume: float
    chi: int


def face_areas(mesh: TriMesh) -> np.ndarray:
    v, f = mesh.vertices, mesh.faces
    cross = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
    return 0.5 * np.linalg.norm(cross, axis=1)


def measures(mesh: TriMesh) -> Measures:
    """Total area, enclosed volume (divergence theorem) and chi.

    The volume is the sum over faces of (1/3) * (centroid . unit normal) *
    face area, which reduces to (1/6) * sum of det(a, b, c); it is
    origin-independent for a closed mesh and positive for an outward
    orientation.  A non-positive volume raises OrientationError.
    """
    v, f = mesh.vertices, mesh.faces
    a, b, c = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    volume = float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)
    area = float(face_areas(mesh).sum())
    if volume <= 0.0:
        raise OrientationError(f"enclosed volume {volume} <= 0; faces are inward-oriented")
    return Measures(area=area, volume=volume, chi=mesh.chi)


def _icosahedron() -> tuple[np.ndarray, np.ndarray]:
    """Pole-aligned unit icosahedron (vertices 0 and 11 at the +-z poles)."""
    top = [0.0, 0.0, 1.0]
    bottom = [0.0, 0.0, -1.0]
    upper = []
    lower = []
    lat = math.atan(0.5)
    for i in range(5):
        lon_u = 2.0 * math.pi * i / 5.0
        lon_l = lon_u + math.pi / 5.0
        upper.append([math.cos(lat) * math.cos(lon_u), math.cos(lat) * math.sin(lon_u), math.sin(lat)])
        lower.append([math.cos(lat) * math.cos(lon_l), math.cos(lat) * math.sin(lon_l), -math.sin(lat)])
    verts = np.array([top] + upper + lower + [bottom], dtype=np.float64)

    faces = []
    for i in range(5):
        j = (i + 1) % 5
        u_i, u_j = 1 + i, 1 + j
        l_i, l_j = 6 + i, 6 + j
        faces.append([0, u_i, u_j])          # cap around the north pole
        faces.append([u_i, l_i, u_j])        # upper band
        faces.append([u_j, l_i, l_j])        # lower band
        faces.append([11, l_j, l_i])         # cap around the south pole
    return verts, np.array(faces, dtype=np.int64)


def make_icosphere(subdivisions: int, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Subdivided icosahedron projected to the sphere.

    Vertex count is 10*4**s + 2.  Each subdivision splits every face into
    four via edge midpoints (shared through a midpoint cache) and reprojects
    onto the sphere; orientation stays outward.  Vertices 0 and 11 of the
    base icosahedron sit exactly on the +-z poles at every level.
    """
    if not isinstance(subdivisions, int) or subdivisions < 0:
        raise ValueError(f"subdivisions must be a non-negative int, got {subdivisions!r}")
    if subdivisions > 8:
        raise ValueError(f"subdivisions capped at 8, got {subdivisions}")
    if not (radius > 0.0) or not math.isfinite(radius):
        raise ValueError(f"radius must be a positive finite float, got {radius!r}")

    verts, faces = _icosahedron()
    for _ in range(subdivisions):
        verts_list = list(verts)
        midpoint: dict[tuple[int, int], int] = {}

        def mid(i: int, j: int) -> int:
            key = (i, j) if i < j else (j, i)
            idx = midpoint.get(key)
            if idx is None:
                m = verts_list[i] + verts_list[j]
                m = m / np.linalg.norm(m)
                idx = len(verts_list)
                verts_list.append(m)
                midpoint[key] = idx
            return idx

        new_faces = np.empty((4 * len(faces), 3), dtype=np.int64)
        for t, (i, j, k) in enumerate(faces):
            ij, jk, ki = mid(i, j), mid(j, k), mid(k, i)
            new_faces[4 * t + 0] = (i, ij, ki)
            new_faces[4 * t + 1] = (ij, j, jk)
            new_faces[4 * t + 2] = (ki, jk, k)
            new_faces[4 * t + 3] = (ij, jk, ki)
        verts = np.array(verts_list)
        verts /= np.linalg.norm(verts, axis=1, keepdims=True)
        faces = new_faces

    verts = verts * radius + np.asarray(center, dtype=np.float64)
    return TriMesh(verts, faces)
