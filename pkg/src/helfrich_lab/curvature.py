"""Discrete curvature fields, convexity classes, sphere fitting.

Pointwise conventions (H is the sum of the principal curvatures):

    H_i   = <area_grad_i, nu_i> / A_i          (= -<Laplacian f, nu> at i)
    K_i   = (2*pi - angle_sum_i) / A_i          (angle defect)
    Ao2_i = max(0, H_i^2/2 - 2*K_i)             (traceless second form, squared)
    kappa_-/+ = H/2 -/+ sqrt(Ao2/2)

with nu the outward unit vertex normal (area-weighted) and A the mixed
Voronoi area.  A round sphere of radius r has H = +2/r, K = 1/r^2, Ao2 = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .mesh import MeshError, TriMesh
from .params import Tolerances

WEAKLY_CONVEX = "WeaklyConvex"
STRICTLY_MEAN_CONVEX = "StrictlyMeanConvex"
WEAKLY_MEAN_CONVEX = "WeaklyMeanConvex"
NOT_MEAN_CONVEX = "NotMeanConvex"


class SphereFitError(MeshError):
    """Least-squares sphere fit is singular (e.g. coplanar input)."""


@dataclass(frozen=True)
class CurvatureField:
    """Per-vertex curvature data; arrays are parallel to mesh.vertices."""

    mean: np.ndarray
    gauss: np.ndarray
    ao2: np.ndarray
    kappa_minus: np.ndarray
    kappa_plus: np.ndarray
    area: np.ndarray
    normal: np.ndarray
    vertex_ok: np.ndarray

    @property
    def max_ao2(self) -> float:
        return float(self.ao2.max())

    @property
    def curvature_scale(self) -> float:
        """Median |H|, the scale used by relative convexity tolerances."""
        return float(np.median(np.abs(self.mean)))


def curvature_field(mesh: TriMesh) -> CurvatureField:
    """Assemble the curvature field of a validated closed mesh."""
    X, F = mesh.vertices, mesh.faces
    _, mixed_area, area_grad, normal_sum, angle_sum = _kernels.vertex_geometry(X, F)

    tiny = np.finfo(np.float64).tiny
    area_safe = np.maximum(mixed_area, tiny)
    nn = np.linalg.norm(normal_sum, axis=1)
    nu = normal_sum / np.maximum(nn, tiny)[:, None]

    mean = np.einsum("ij,ij->i", area_grad, nu) / area_safe
    gauss = (2.0 * math.pi - angle_sum) / area_safe
    ao2 = np.maximum(mean * mean / 2.0 - 2.0 * gauss, 0.0)
    spread = np.sqrt(ao2 / 2.0)
    kappa_minus = mean / 2.0 - spread
    kappa_plus = mean / 2.0 + spread

    mean_edge = math.sqrt(float(mixed_area.mean()))
    ok = (
        (mixed_area > 1e-12 * mean_edge**2)
        & (nn > tiny)
        & np.isfinite(mean)
        & np.isfinite(gauss)
    )
    return CurvatureField(
        mean=mean,
        gauss=gauss,
        ao2=ao2,
        kappa_minus=kappa_minus,
        kappa_plus=kappa_plus,
        area=mixed_area,
        normal=nu,
        vertex_ok=ok,
    )


def laplace_beltrami_apply(mesh: TriMesh, u: np.ndarray) -> np.ndarray:
    """Cotangent Laplace-Beltrami of a vertex field over mixed areas.

    Shape (n,) or (n, k) matching u.  Satisfies sum_i (Lu)_i A_i = 0 to
    roundoff on closed meshes, and (L f)_i = -H_i nu_i + tangential error
    for the position field f.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.shape[0] != mesh.n_vertices:
        raise ValueError(f"field has {u.shape[0]} entries for {mesh.n_vertices} vertices")
    X, F = mesh.vertices, mesh.faces
    _, mixed_area, _, _, _ = _kernels.vertex_geometry(X, F)
    acc = _kernels.cot_accumulate(X, F, u)
    area = np.maximum(mixed_area, np.finfo(np.float64).tiny)
    return acc / area if acc.ndim == 1 else acc / area[:, None]


def is_weakly_convex(field: CurvatureField, tol: Tolerances | None = None) -> bool:
    tol = tol or Tolerances()
    slack = tol.geom_eps * field.curvature_scale
    return bool(field.kappa_minus.min() >= -slack)


def is_weakly_mean_convex(field: CurvatureField, tol: Tolerances | None = None) -> bool:
    tol = tol or Tolerances()
    slack = tol.geom_eps * field.curvature_scale
    return bool(field.mean.min() >= -slack)


def is_strictly_mean_convex(field: CurvatureField, tol: Tolerances | None = None) -> bool:
    tol = tol or Tolerances()
    slack = tol.geom_eps * field.curvature_scale
    return bool(field.mean.min() > slack)


def convexity_class(field: CurvatureField, tol: Tolerances | None = None) -> str:
    """Strongest convexity class that holds, tolerances relative to median |H|."""
    tol = tol or Tolerances()
    if is_weakly_convex(field, tol):
        return WEAKLY_CONVEX
    if is_strictly_mean_convex(field, tol):
        return STRICTLY_MEAN_CONVEX
    if is_weakly_mean_convex(field, tol):
        return WEAKLY_MEAN_CONVEX
    return NOT_MEAN_CONVEX


@dataclass(frozen=True)
class SphereFit:
    center: np.ndarray
    radius: float
    rms: float


def sphere_fit(mesh_or_points) -> SphereFit:
    """Algebraic least-squares sphere through the vertex cloud.

    Linearizes |v - c|^2 = r^2 into 2<v, c> + (r^2 - |c|^2) = |v|^2 and
    solves the 4-parameter system by least squares; rms is the root mean
    square of |v - c| - r over the input points.
    """
    pts = mesh_or_points.vertices if isinstance(mesh_or_points, TriMesh) else np.asarray(mesh_or_points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 4:
        raise SphereFitError(f"need at least 4 points of shape (n, 3), got {pts.shape}")
    M = np.concatenate([2.0 * pts, np.ones((pts.shape[0], 1))], axis=1)
    rhs = np.einsum("ij,ij->i", pts, pts)
    sol, _, rank, _ = np.linalg.lstsq(M, rhs, rcond=None)
    if rank < 4:
        raise SphereFitError("degenerate point cloud (coplanar or lower-dimensional)")
    center = sol[:3]
    r2 = sol[3] + center @ center
    if not (r2 > 0.0) or not np.isfinite(r2):
        raise SphereFitError(f"fit produced non-positive squared radius {r2!r}")
    radius = math.sqrt(r2)
    rms = float(np.sqrt(np.mean((np.linalg.norm(pts - center, axis=1) - radius) ** 2)))
    return SphereFit(center=center, radius=radius, rms=rms)


def winding_number_origin(mesh: TriMesh) -> float:
    """Winding number of the closed surface about the origin (solid angles)."""
    v, f = mesh.vertices, mesh.faces
    a, b, c = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    la = np.linalg.norm(a, axis=1)
    lb = np.linalg.norm(b, axis=1)
    lc = np.linalg.norm(c, axis=1)
    triple = np.einsum("ij,ij->i", a, np.cross(b, c))
    den = (
        la * lb * lc
        + np.einsum("ij,ij->i", a, b) * lc
        + np.einsum("ij,ij->i", b, c) * la
        + np.einsum("ij,ij->i", c, a) * lb
    )
    omega = 2.0 * np.arctan2(triple, den)
    return float(omega.sum() / (4.0 * math.pi))


@dataclass(frozen=True)
class HeightPointReport:
    """Curvature report at the farthest-from-origin vertex.

    lower_bound carries the classical 4/<f, nu> value for reference; the
    trace identity 0 >= Delta|f|^2 = 4 - 2<f, nu> H behind it guarantees
    H >= 2/<f, nu> (a centered round sphere attains equality there), so
    positivity of H is the reliable conclusion, not H >= lower_bound.
    """

    index: int
    height: float
    mean_curvature: float
    lower_bound: float
    support: float


def max_height_point_check(mesh: TriMesh, field: CurvatureField | None = None) -> HeightPointReport:
    """Evaluate the touching-sphere curvature bound at argmax |f|.

    Requires the origin strictly inside the surface (winding number 1).
    """
    w = winding_number_origin(mesh)
    if abs(w - 1.0) > 0.1:
        raise ValueError(f"origin is not strictly inside the surface (winding {w:.3f})")
    field = field or curvature_field(mesh)
    r2 = np.einsum("ij,ij->i", mesh.vertices, mesh.vertices)
    i = int(np.argmax(r2))
    support = float(mesh.vertices[i] @ field.normal[i])
    if support <= 0.0:
        raise ValueError(f"non-positive support <f, nu> = {support} at the top vertex")
    return HeightPointReport(
        index=i,
        height=math.sqrt(float(r2[i])),
        mean_curvature=float(field.mean[i]),
        lower_bound=4.0 / support,
        support=support,
    )
