"""Spherical solutions, discrete curvature energies and gradient flow for the
Helfrich bilayer model."""

from .params import ParameterSet, Tolerances, scale_params, validate
from .spheres import (
    SphericalSolutionSet,
    boundedness_verdict,
    classify_spheres,
    el_sphere_residual,
    quadratic_roots,
    sphere_energy_closed_form,
    unboundedness_witness,
)
from .mesh import TriMesh, make_icosphere, measures
from .curvature import (
    CurvatureField,
    convexity_class,
    curvature_field,
    laplace_beltrami_apply,
    max_height_point_check,
    sphere_fit,
)
from .energy import (
    EnergyBreakdown,
    el_residual_field,
    energy_gradient,
    fd_gradient_check,
    helfrich_energy,
    tilde_equivalence_check,
)
from .flow import FlowConfig, FlowResult, convergence_diagnostics, run_flow
from .stability import (
    ConvexityCertificate,
    MildnessVerdict,
    PerturbationSpec,
    mean_convexity_certificate,
    mildness_class,
    perturb_sphere,
)

__version__ = "0.1.0"

__all__ = [
    "ParameterSet",
    "Tolerances",
    "scale_params",
    "validate",
    "SphericalSolutionSet",
    "boundedness_verdict",
    "classify_spheres",
    "el_sphere_residual",
    "quadratic_roots",
    "sphere_energy_closed_form",
    "unboundedness_witness",
    "TriMesh",
    "make_icosphere",
    "measures",
    "CurvatureField",
    "convexity_class",
    "curvature_field",
    "laplace_beltrami_apply",
    "max_height_point_check",
    "sphere_fit",
    "EnergyBreakdown",
    "el_residual_field",
    "energy_gradient",
    "fd_gradient_check",
    "helfrich_energy",
    "tilde_equivalence_check",
    "FlowConfig",
    "FlowResult",
    "convergence_diagnostics",
    "run_flow",
    "ConvexityCertificate",
    "MildnessVerdict",
    "PerturbationSpec",
    "mean_convexity_certificate",
    "mildness_class",
    "perturb_sphere",
    "__version__",
]
