"""L2 gradient descent of the bending energy with Armijo backtracking.

The flow moves vertex positions along the negative exact energy gradient.
Step sizes are found by backtracking line search on the sufficient-decrease
condition; the accepted step is grown again on the next iteration, so the
loop self-tunes to the h^2-type stability limit of the bending term.  The
energy trace is non-increasing except across optional remesh events, which
are logged separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .curvature import curvature_field, sphere_fit
from .energy import el_residual_field, helfrich_energy
from .mesh import TriMesh
from .params import ParameterSet, Tolerances, require_valid
from .spheres import classify_spheres

CONVERGED = "Converged"
MAX_STEPS = "MaxSteps"
MESH_DEGENERATE = "MeshDegenerate"
ENERGY_DIVERGING = "EnergyDiverging"

TRACE_COLUMNS = ("step", "energy", "gradNorm", "maxAo2", "fittedRadius", "minH")


@dataclass(frozen=True)
class FlowConfig:
    """Descent and termination parameters.

    grad_tol is compared against the area-weighted gradient norm
    sqrt(sum |g_i|^2 / A_i).  remesh_every = 0 disables tangential
    relaxation + edge flips; when enabled they never run within the final
    10% of the step budget.  The line search declares convergence if no
    decrease is possible at floating-point precision.  sample_every
    controls how often full trace rows (curvature extrema, sphere fit)
    are recorded; 0 picks a rate that keeps traces near 2000 rows.  The
    first and last steps are always recorded.  max_move_factor bounds the
    largest single-step vertex displacement at that fraction of the mean
    edge length; it keeps one aggressive trial step from folding
    triangles while leaving the exponential growth of homothetic motions
    (inflation runs) intact.
    """

    max_steps: int = 2000
    initial_step: float = 1e-3
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    grad_tol: float = 1e-4
    remesh_every: int = 0
    seed: int = 0
    sample_every: int = 0
    max_move_factor: float = 0.5

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.sample_every < 0:
            raise ValueError(f"sample_every must be >= 0, got {self.sample_every}")
        if not (self.initial_step > 0.0):
            raise ValueError(f"initial_step must be positive, got {self.initial_step}")
        if not (0.0 < self.armijo_c < 1.0):
            raise ValueError(f"armijo_c must be in (0, 1), got {self.armijo_c}")
        if not (0.0 < self.backtrack_factor < 1.0):
            raise ValueError(f"backtrack_factor must be in (0, 1), got {self.backtrack_factor}")
        if not (self.grad_tol > 0.0):
            raise ValueError(f"grad_tol must be positive, got {self.grad_tol}")
        if self.remesh_every < 0:
            raise ValueError(f"remesh_every must be >= 0, got {self.remesh_every}")
        if not (self.max_move_factor > 0.0):
            raise ValueError(
                f"max_move_factor must be positive, got {self.max_move_factor}"
            )


@dataclass
class FlowResult:
    """Final state, per-step trace and termination reason of a flow run."""

    mesh: TriMesh
    termination: str
    steps: int
    trace: dict[str, np.ndarray]
    remesh_steps: list[int] = field(default_factory=list)

    @property
    def final_energy(self) -> float:
        return float(self.trace["energy"][-1])


def face_quality(X: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Per-face quality 4*sqrt(3)*area / sum(edge^2); 1 for equilateral."""
    a, b, c = X[F[:, 0]], X[F[:, 1]], X[F[:, 2]]
    ea, eb, ec = c - b, a - c, b - a
    area = 0.5 * np.linalg.norm(np.cross(ea, eb), axis=1)
    l2 = (
        np.einsum("ij,ij->i", ea, ea)
        + np.einsum("ij,ij->i", eb, eb)
        + np.einsum("ij,ij->i", ec, ec)
    )
    return 4.0 * math.sqrt(3.0) * area / np.maximum(l2, np.finfo(np.float64).tiny)


def _volume(X: np.ndarray, F: np.ndarray) -> float:
    a, b, c = X[F[:, 0]], X[F[:, 1]], X[F[:, 2]]
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)


def _trace_fields(X: np.ndarray, F: np.ndarray) -> tuple[float, float, float]:
    """(maxAo2, fittedRadius, minH) for the trace."""
    mesh = TriMesh(X, F, validate=False)
    fieldv = curvature_field(mesh)
    try:
        fit_r = sphere_fit(X).radius
    except Exception:
        fit_r = float("nan")
    return fieldv.max_ao2, fit_r, float(fieldv.mean.min())


def run_flow(
    mesh: TriMesh,
    params: ParameterSet,
    config: FlowConfig | None = None,
    *,
    quality_floor: float = 0.05,
    volume_blowup: float = 100.0,
) -> FlowResult:
    """Descend the energy from *mesh* until convergence or a stop condition.

    Termination reasons: Converged (gradient norm below grad_tol, or the
    line search exhausted at floating-point precision), MaxSteps,
    MeshDegenerate (min face quality under quality_floor), EnergyDiverging
    (energy still falling while the volume exceeds volume_blowup times its
    start value).
    """
    require_valid(params)
    config = config or FlowConfig()

    X = mesh.vertices.copy()
    F = mesh.faces
    kc, c0, lam, p = params.kc, params.c0, params.lam, params.p
    topo = 2.0 * params.kbar * math.pi * mesh.chi
    vol0 = abs(_volume(X, F))

    rows: list[tuple[float, float, float, float, float, float]] = []
    remesh_steps: list[int] = []
    termination = MAX_STEPS
    energy = _kernels.energy_value(X, F, kc, c0, lam, p) + topo
    t = config.initial_step
    steps_done = 0
    no_remesh_after = config.max_steps - max(1, config.max_steps // 10)
    sample_every = config.sample_every or max(1, config.max_steps // 2000)
    tiny = np.finfo(np.float64).tiny
    prev_x: np.ndarray | None = None
    prev_g: np.ndarray | None = None

    for step in range(config.max_steps):
        grad, areas = _kernels.gradient_with_areas(X, F, kc, c0, lam, p)
        gnorm = float(
            np.sqrt((np.einsum("ij,ij->i", grad, grad) / np.maximum(areas, tiny)).sum())
        )
        if step % sample_every == 0:
            max_ao2, fit_r, min_h = _trace_fields(X, F)
            rows.append((step, energy, gnorm, max_ao2, fit_r, min_h))
        steps_done = step

        if gnorm <= config.grad_tol:
            termination = CONVERGED
            break
        # Geometry health checks; sampled because both quantities drift
        # slowly relative to the step size.
        if step % 16 == 0:
            if float(face_quality(X, F).min()) < quality_floor:
                termination = MESH_DEGENERATE
                break
            if abs(_volume(X, F)) > volume_blowup * vol0:
                termination = ENERGY_DIVERGING
                break

        # Trial step: spectral (Barzilai-Borwein) estimate from the last
        # accepted move when available, otherwise grow the previous step.
        # The monotone Armijo backtracking below keeps either choice safe.
        if prev_g is not None:
            s_vec = X - prev_x
            y_vec = grad - prev_g
            sy = float(np.einsum("ij,ij->", s_vec, y_vec))
            yy = float(np.einsum("ij,ij->", y_vec, y_vec))
            t_try = sy / yy if (sy > 0.0 and yy > 0.0) else 2.0 * t
        else:
            t_try = t
        prev_x, prev_g = X, grad

        # Trust region: the largest vertex move per step stays under
        # max_move_factor times the mean edge length (edge of the
        # equilateral triangle with the current mean face area).
        gmax = float(np.sqrt(np.einsum("ij,ij->i", grad, grad).max()))
        if gmax > 0.0:
            h_ref = math.sqrt(4.0 * float(areas.sum()) / (math.sqrt(3.0) * F.shape[0]))
            t_cap = config.max_move_factor * h_ref / gmax
            if t_try > t_cap:
                t_try = t_cap

        gg = float(np.einsum("ij,ij->", grad, grad))
        accepted = False
        while t_try >= 1e-14 * config.initial_step:
            cand = X - t_try * grad
            cand_energy = _kernels.energy_value(cand, F, kc, c0, lam, p) + topo
            if cand_energy <= energy - config.armijo_c * t_try * gg:
                accepted = True
                break
            t_try *= config.backtrack_factor
        if not accepted:
            # No decrease possible at floating-point precision.
            termination = CONVERGED
            break
        X, energy, t = cand, cand_energy, t_try

        if (
            config.remesh_every > 0
            and step > 0
            and step % config.remesh_every == 0
            and step < no_remesh_after
        ):
            relaxed = tangential_relaxation(TriMesh(X, F, validate=False))
            flipped, _, _ = _delaunay_flips(relaxed)
            X, F = flipped.vertices.copy(), flipped.faces
            energy = _kernels.energy_value(X, F, kc, c0, lam, p) + topo
            prev_x = prev_g = None
            remesh_steps.append(step)
    else:
        step = config.max_steps
        steps_done = step

    # Record the final state.
    grad, areas = _kernels.gradient_with_areas(X, F, kc, c0, lam, p)
    gnorm = float(
        np.sqrt((np.einsum("ij,ij->i", grad, grad) / np.maximum(areas, tiny)).sum())
    )
    max_ao2, fit_r, min_h = _trace_fields(X, F)
    if not rows or rows[-1][0] != steps_done or termination == MAX_STEPS:
        rows.append((steps_done, energy, gnorm, max_ao2, fit_r, min_h))

    arr = np.array(rows, dtype=np.float64)
    trace = {name: arr[:, k] for k, name in enumerate(TRACE_COLUMNS)}
    final = TriMesh(X, F, validate=False)
    return FlowResult(
        mesh=final,
        termination=termination,
        steps=steps_done,
        trace=trace,
        remesh_steps=remesh_steps,
    )


def tangential_relaxation(mesh: TriMesh) -> TriMesh:
    """Move vertices toward their one-ring centroid within the tangent plane.

    The normal component of the displacement is removed and each move is
    capped at a tenth of the mean edge length, so the shape is preserved to
    first order while the sampling equalizes.
    """
    X, F = mesh.vertices, mesh.faces
    n = mesh.n_vertices
    e = mesh.edges
    deg = np.bincount(e.ravel(), minlength=n).astype(np.float64)
    nb_sum = np.zeros((n, 3))
    for k in range(3):
        nb_sum[:, k] = np.bincount(e[:, 0], weights=X[e[:, 1], k], minlength=n)
        nb_sum[:, k] += np.bincount(e[:, 1], weights=X[e[:, 0], k], minlength=n)
    centroid = nb_sum / np.maximum(deg, 1.0)[:, None]

    _, _, _, normal_sum, _ = _kernels.vertex_geometry(X, F)
    nu = normal_sum / np.maximum(np.linalg.norm(normal_sum, axis=1), 1e-300)[:, None]
    disp = centroid - X
    disp -= nu * np.einsum("ij,ij->i", disp, nu)[:, None]

    edge_vecs = X[e[:, 1]] - X[e[:, 0]]
    cap = 0.1 * float(np.linalg.norm(edge_vecs, axis=1).mean())
    norms = np.linalg.norm(disp, axis=1)
    scale = np.minimum(1.0, cap / np.maximum(norms, 1e-300))
    return TriMesh(X + disp * scale[:, None], F, validate=False)


def _delaunay_flips(mesh: TriMesh) -> tuple[TriMesh, int, int]:
    """One pass of Delaunay edge flips; returns (mesh, flipped, skipped).

    An edge flips when the opposite-angle cotangents sum negative. Flips
    that would create an existing edge or drop a vertex below valence 3
    are skipped.
    """
    X = mesh.vertices
    faces = [tuple(f) for f in mesh.faces.tolist()]
    # Map directed edge -> (face index, opposite vertex).
    opp: dict[tuple[int, int], tuple[int, int]] = {}
    for fi, (a, b, c) in enumerate(faces):
        opp[(a, b)] = (fi, c)
        opp[(b, c)] = (fi, a)
        opp[(c, a)] = (fi, b)
    edge_set = {tuple(sorted(k)) for k in opp}
    deg = np.bincount(mesh.faces.ravel(), minlength=mesh.n_vertices)

    def cot(p, q, r):
        u, v = X[q] - X[p], X[r] - X[p]
        cross = np.linalg.norm(np.cross(u, v))
        return float(u @ v) / max(cross, 1e-300)

    flipped = 0
    skipped = 0
    dead: set[int] = set()
    new_faces: list[tuple[int, int, int]] = []
    for u, v in sorted(edge_set):
        fwd = opp.get((u, v))
        bwd = opp.get((v, u))
        if fwd is None or bwd is None:
            continue
        f1, w1 = fwd
        f2, w2 = bwd
        if f1 in dead or f2 in dead:
            continue
        if cot(w1, u, v) + cot(w2, u, v) >= 0.0:
            continue
        if tuple(sorted((w1, w2))) in edge_set or w1 == w2:
            skipped += 1
            continue
        if deg[u] <= 3 or deg[v] <= 3:
            skipped += 1
            continue
        dead.update((f1, f2))
        new_faces.append((w1, u, w2))
        new_faces.append((w2, v, w1))
        edge_set.discard((min(u, v), max(u, v)))
        edge_set.add(tuple(sorted((w1, w2))))
        deg[u] -= 1
        deg[v] -= 1
        deg[w1] += 1
        deg[w2] += 1
        flipped += 1
    if not flipped:
        return mesh, 0, skipped
    kept = [f for fi, f in enumerate(faces) if fi not in dead]
    out = np.array(kept + new_faces, dtype=np.int64)
    return TriMesh(X.copy(), out, validate=True), flipped, skipped


def convergence_diagnostics(
    result: FlowResult, params: ParameterSet, tol: Tolerances | None = None
) -> dict:
    """Post-flow report: fit, curvature, residual, energy and radius match."""
    from .curvature import convexity_class  # local import to avoid cycle noise

    tol = tol or Tolerances()
    mesh = result.mesh
    fieldv = curvature_field(mesh)
    fit = sphere_fit(mesh)
    resid = el_residual_field(mesh, params)
    breakdown = helfrich_energy(mesh, params)
    predicted = classify_spheres(params, tol)

    matched = None
    gap = None
    if predicted.radii:
        gaps = [abs(fit.radius - r) / r for r in predicted.radii]
        k = int(np.argmin(gaps))
        matched, gap = predicted.radii[k], float(gaps[k])
    return {
        "termination": result.termination,
        "steps": result.steps,
        "fittedRadius": fit.radius,
        "fitRms": fit.rms,
        "maxAo2": fieldv.max_ao2,
        "minH": float(fieldv.mean.min()),
        "residualSup": resid.sup,
        "residualL2": resid.l2,
        "energy": {
            "bending": breakdown.bending,
            "area": breakdown.area_term,
            "volume": breakdown.volume_term,
            "topological": breakdown.topological,
            "total": breakdown.total,
        },
        "convexityClass": convexity_class(fieldv, tol),
        "verdict": predicted.verdict,
        "predictedRadii": list(predicted.radii),
        "matchedRadius": matched,
        "radiusGap": gap,
    }
