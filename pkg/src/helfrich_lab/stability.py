"""Perturbation construction, mildness classification and convexity certificates.

Three groups of tools:

- spherical-harmonic normal perturbations of a sphere (the test surfaces for
  stability experiments),
- the four-way mildness classification of perturbation/parameter pairs,
- the mean-convexity certificate: a parabola root analysis that yields a
  strictly positive lower bound H1 for the mean curvature of any critical
  surface whose traceless second fundamental form is pointwise bounded.

The certificate gate uses lambda >= k_c*(a0^2 - c0^2/2).  The source theorem
prints c0/2 in that inequality, but its own proof (and dimensional
consistency) require c0^2/2; with the printed gate the b <= 0 sign lemma
fails for 0 < c0 < 1.  We implement the inequality the proof uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import lpmv

from . import _kernels
from .curvature import curvature_field, is_weakly_mean_convex, is_weakly_convex
from .mesh import TriMesh, make_icosphere
from .params import ParameterSet, Tolerances, require_valid

_CLASS_ORDER = ("I", "II", "III", "IV")

# Theorem 2 prints p > 0 for the class-III case, but the corollary it cites
# (and that corollary's radii table) assume p <= 0.  We implement p <= 0.
CLASS_III_NOTE = (
    "class III implements the cited corollary's hypothesis p <= 0; "
    "the theorem statement's header prints p > 0"
)


@dataclass(frozen=True)
class PerturbationSpec:
    """Normal perturbation of a sphere by a sum of real spherical harmonics.

    modes is a sequence of (degree l, order m, amplitude); amplitudes carry
    length units.  The sum of |amplitude| must stay below the base radius so
    the perturbed surface remains embedded at this scale.
    """

    modes: tuple[tuple[int, int, float], ...]
    radius: float = 1.0
    subdiv: int = 4

    def __post_init__(self) -> None:
        object.__setattr__(self, "modes", tuple((int(l), int(m), float(a)) for l, m, a in self.modes))
        if not (self.radius > 0.0):
            raise ValueError(f"radius must be positive, got {self.radius}")
        for l, m, a in self.modes:
            if l < 0:
                raise ValueError(f"degree must be >= 0, got l={l}")
            if abs(m) > l:
                raise ValueError(f"order must satisfy |m| <= l, got (l={l}, m={m})")
        total = sum(abs(a) for _, _, a in self.modes)
        if not total < self.radius:
            raise ValueError(
                f"sum of |amplitude| = {total} must be < radius = {self.radius}"
            )


def real_harmonic(l: int, m: int, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Real spherical harmonic, normalized so Y_l^0 equals 1 at the poles.

    m = 0 gives the Legendre polynomial P_l(cos theta); m != 0 uses the
    Schmidt semi-normalized associated functions with cos(m phi) for m > 0
    and sin(|m| phi) for m < 0.
    """
    x = np.cos(theta)
    am = abs(m)
    p = lpmv(am, l, x)
    if m == 0:
        return p
    # Schmidt semi-normalization sqrt(2 (l-m)!/(l+m)!).
    norm = math.sqrt(2.0 * math.factorial(l - am) / math.factorial(l + am))
    azim = np.cos(am * phi) if m > 0 else np.sin(am * phi)
    return norm * p * azim


def perturb_sphere(spec: PerturbationSpec, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Icosphere of spec.radius displaced along outward normals.

    The displacement is psi = sum amplitude * Y_l^m evaluated at each vertex
    direction; the result is deterministic for a given spec.
    """
    base = make_icosphere(spec.subdiv, radius=1.0)
    dirs = base.vertices / np.linalg.norm(base.vertices, axis=1)[:, None]
    theta = np.arccos(np.clip(dirs[:, 2], -1.0, 1.0))
    phi = np.arctan2(dirs[:, 1], dirs[:, 0])
    psi = np.zeros(len(dirs))
    for l, m, amp in spec.modes:
        psi += amp * real_harmonic(l, m, theta, phi)
    radial = spec.radius + psi
    verts = dirs * radial[:, None] + np.asarray(center, dtype=np.float64)
    return TriMesh(verts, base.faces)


def average_mean_curvature(mesh: TriMesh) -> float:
    """Mixed-area-weighted average of the vertex mean curvature."""
    fieldv = curvature_field(mesh)
    return float((fieldv.mean * fieldv.area).sum() / fieldv.area.sum())


@dataclass(frozen=True)
class MildnessVerdict:
    """Outcome of the four-way mildness check.

    matched_class is "I".."IV" or None; details records, per class that was
    tried and failed, the first hypothesis that did not hold.  note carries
    the class-III sign caveat when that class matched.
    """

    matched_class: str | None
    details: dict[str, str] = field(default_factory=dict)
    note: str | None = None


def mildness_class(
    mesh: TriMesh,
    params: ParameterSet,
    a0: float | None = None,
    tol: Tolerances | None = None,
) -> MildnessVerdict:
    """Match (mesh, params) against the mildness hypotheses, first hit wins.

    Class I: Willmore parameters (c0 = lambda = p = 0) and weak mean
    convexity.  Class II: c0 = 0, weak mean convexity, and the average mean
    curvature equal to -p/lambda within geom_eps (lambda != 0; no sign is
    imposed on lambda).  Class III: c0 >= 0, lambda >= -k_c c0^2/2, p <= 0,
    weak convexity.  Class IV: a0 given, the class-III parameter range with
    p <= -k_c a0^2, weak mean convexity, and max |A^o|^2 <= a0^2.
    """
    require_valid(params)
    tol = tol or Tolerances()
    fieldv = curvature_field(mesh)
    details: dict[str, str] = {}

    mean_convex = is_weakly_mean_convex(fieldv, tol)
    convex = is_weakly_convex(fieldv, tol)

    # Class I.
    if params.c0 != 0.0 or params.lam != 0.0 or params.p != 0.0:
        details["I"] = "requires c0 = lambda = p = 0"
    elif not mean_convex:
        details["I"] = "surface is not weakly mean convex"
    else:
        return MildnessVerdict("I", details)

    # Class II.
    if params.c0 != 0.0:
        details["II"] = "requires c0 = 0"
    elif params.lam == 0.0:
        details["II"] = "requires lambda != 0 to form -p/lambda"
    elif not mean_convex:
        details["II"] = "surface is not weakly mean convex"
    else:
        avg_h = float((fieldv.mean * fieldv.area).sum() / fieldv.area.sum())
        target = -params.p / params.lam
        if abs(avg_h - target) <= tol.geom_eps * abs(avg_h):
            return MildnessVerdict("II", details)
        details["II"] = (
            f"average mean curvature {avg_h:.6g} differs from -p/lambda = {target:.6g}"
        )

    # Class III.
    if params.c0 < 0.0:
        details["III"] = "requires c0 >= 0"
    elif params.lam < -params.kc * params.c0**2 / 2.0:
        details["III"] = "requires lambda >= -k_c c0^2/2"
    elif params.p > 0.0:
        details["III"] = "requires p <= 0"
    elif not convex:
        details["III"] = "surface is not weakly convex"
    else:
        return MildnessVerdict("III", details, note=CLASS_III_NOTE)

    # Class IV.
    if a0 is None:
        details["IV"] = "requires a0"
    elif not (a0 > 0.0):
        details["IV"] = f"a0 must be positive, got {a0}"
    elif params.c0 < 0.0:
        details["IV"] = "requires c0 >= 0"
    elif params.lam < -params.kc * params.c0**2 / 2.0:
        details["IV"] = "requires lambda >= -k_c c0^2/2"
    elif params.p > -params.kc * a0**2:
        details["IV"] = "requires p <= -k_c a0^2"
    elif not mean_convex:
        details["IV"] = "surface is not weakly mean convex"
    elif fieldv.max_ao2 > a0**2:
        details["IV"] = f"max |A^o|^2 = {fieldv.max_ao2:.6g} exceeds a0^2 = {a0**2:.6g}"
    else:
        return MildnessVerdict("IV", details)

    return MildnessVerdict(None, details)


def parabola_coefficients(params: ParameterSet, s: float) -> tuple[float, float, float]:
    """Coefficients (a, b, c) of the quadratic in H at a curvature minimum.

    s stands for |A^o|^2 at the point where H attains its minimum:
    a = c0/2, b = s - c0^2/2 - lambda/k_c, c = -p/k_c - c0*s.
    """
    require_valid(params)
    if s < 0.0:
        raise ValueError(f"s = |A^o|^2 must be >= 0, got {s}")
    a = params.c0 / 2.0
    b = s - params.c0**2 / 2.0 - params.lam / params.kc
    c = -params.p / params.kc - params.c0 * s
    return a, b, c


class CertificateGateError(ValueError):
    """Certificate preconditions rejected; message names the inequality."""


@dataclass(frozen=True)
class ConvexityCertificate:
    """Result of the parabola root analysis over s in [0, a0^2].

    kind is "PositiveLowerBound" (h1_min > 0 bounds the mean curvature of
    any qualifying critical surface from below) or "Vacuous" (the
    discriminant is negative throughout, so no critical surface attains its
    curvature minimum with such |A^o|^2).  coefficients holds a short
    (s, a, b, c) trace across the interval.
    """

    kind: str
    h1_min: float | None
    s_at_min: float | None
    coefficients: tuple[tuple[float, float, float, float], ...]


def _gate(params: ParameterSet, a0: float) -> None:
    if not (a0 > 0.0):
        raise CertificateGateError(f"a0 must be positive, got {a0}")
    if not (params.c0 > 0.0):
        raise CertificateGateError(f"certificate requires c0 > 0, got c0 = {params.c0}")
    bound = params.kc * (a0**2 - params.c0**2 / 2.0)
    if not (params.lam >= bound):
        raise CertificateGateError(
            f"certificate requires lambda >= k_c*(a0^2 - c0^2/2) = {bound}, "
            f"got lambda = {params.lam}"
        )
    p_bound = -params.c0 * params.kc * a0**2
    if not (params.p < p_bound):
        raise CertificateGateError(
            f"certificate requires p < -c0*k_c*a0^2 = {p_bound}, got p = {params.p}"
        )


def _h1(params: ParameterSet, s: float) -> float:
    """Lower root of the parabola; requires a nonnegative discriminant."""
    a, b, c = parabola_coefficients(params, s)
    disc = b * b - 4.0 * a * c
    return (-b - math.sqrt(disc)) / (2.0 * a)


def mean_convexity_certificate(
    params: ParameterSet,
    a0: float,
    tol: Tolerances | None = None,
    grid: int = 10_000,
) -> ConvexityCertificate:
    """Minimize the curvature lower bound H1(s) over s in [0, a0^2].

    Candidates are a uniform grid, both endpoints, and the roots of the
    discriminant (H1 has no interior stationary point unless p = -c0*lambda,
    in which case it is constant in s).  Halving the grid must not move the
    minimum by more than root_eps; that self-check runs on every call.
    """
    require_valid(params)
    tol = tol or Tolerances()
    _gate(params, a0)
    s_hi = a0 * a0
    a = params.c0 / 2.0

    def disc_of(s: np.ndarray) -> np.ndarray:
        b = s - params.c0**2 / 2.0 - params.lam / params.kc
        c = -params.p / params.kc - params.c0 * s
        return b * b - 4.0 * a * c

    def h1_min_on(n_grid: int) -> tuple[float, float] | None:
        s_vals = np.linspace(0.0, s_hi, n_grid + 1)
        cands = [s_vals]
        # Discriminant roots: D(s) = s^2 + (c0^2 - 2 lambda/k_c) s
        #   + ((c0^2/2 + lambda/k_c)^2 + 2 c0 p / k_c).
        b1 = params.c0**2 - 2.0 * params.lam / params.kc
        c1 = (params.c0**2 / 2.0 + params.lam / params.kc) ** 2 + 2.0 * params.c0 * params.p / params.kc
        roots = np.roots([1.0, b1, c1])
        real = roots[np.abs(roots.imag) < 1e-12].real
        cands.append(real[(real >= 0.0) & (real <= s_hi)])
        s_all = np.concatenate(cands)
        d_all = disc_of(s_all)
        ok = d_all >= 0.0
        if not ok.any():
            return None
        s_ok = s_all[ok]
        b = s_ok - params.c0**2 / 2.0 - params.lam / params.kc
        c = -params.p / params.kc - params.c0 * s_ok
        h1 = (-b - np.sqrt(np.maximum(b * b - 4.0 * a * c, 0.0))) / (2.0 * a)
        k = int(np.argmin(h1))
        return float(h1[k]), float(s_ok[k])

    fine = h1_min_on(grid)
    coarse = h1_min_on(grid // 2)
    samples = np.linspace(0.0, s_hi, 11)
    coeff_trace = tuple(
        (float(s), *parabola_coefficients(params, float(s))) for s in samples
    )
    if fine is None:
        return ConvexityCertificate("Vacuous", None, None, coeff_trace)
    h1_min, s_at = fine
    if coarse is not None and abs(coarse[0] - h1_min) > tol.root_eps * max(1.0, abs(h1_min)):
        raise RuntimeError(
            f"certificate grid self-check failed: {coarse[0]} vs {h1_min}"
        )
    return ConvexityCertificate("PositiveLowerBound", h1_min, s_at, coeff_trace)


def certificate_consistency_probe(
    mesh: TriMesh,
    params: ParameterSet,
    a0: float,
    flow_config=None,
    tol: Tolerances | None = None,
) -> dict:
    """Flow the mesh under qualifying parameters and compare min H to H1.

    Diagnostic only: a violation is reported, not raised, since it can flag
    either discretization error or a genuine counterexample.
    """
    from .flow import FlowConfig, run_flow

    tol = tol or Tolerances()
    _gate(params, a0)
    start_field = curvature_field(mesh)
    if start_field.max_ao2 > a0 * a0:
        raise ValueError(
            f"mesh max |A^o|^2 = {start_field.max_ao2:.6g} exceeds a0^2 = {a0 * a0:.6g}"
        )
    cert = mean_convexity_certificate(params, a0, tol)
    result = run_flow(mesh, params, flow_config or FlowConfig())
    final_field = curvature_field(result.mesh)
    min_h = float(final_field.mean.min())
    report = {
        "termination": result.termination,
        "steps": result.steps,
        "certificate": cert.kind,
        "h1Min": cert.h1_min,
        "minH": min_h,
        "satisfied": None,
    }
    if result.termination == "Converged" and cert.kind == "PositiveLowerBound":
        band = 0.05 * max(abs(cert.h1_min), final_field.curvature_scale)
        report["satisfied"] = bool(min_h >= cert.h1_min - band)
    return report
