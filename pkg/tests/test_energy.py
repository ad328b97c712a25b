"""Discrete energy against the closed-form sphere polynomial and analytic
targets, the reformulation identity, and the pointwise residual field.

Frozen refinement tables below record measured norms on icospheres at
radius 2 for two parameter sets that classify that radius as critical:
set A = (kc=1, c0=0, lam=1, p=-1) and set B = (kc=1, c0=1, lam=0, p=0).
The sup norm of set A plateaus near 8.7e-4 (the valence-5 vertices of the
icosahedral mesh keep an O(1)-inconsistent Laplacian error there), so only
the area-weighted L2 norm converges to zero; the tables pin both.
"""

import math

import numpy as np
import pytest

from conftest import cube_mesh, icosphere
from helfrich_lab.curvature import curvature_field
from helfrich_lab.energy import (
    el_residual_field,
    helfrich_energy,
    tilde_equivalence_check,
)
from helfrich_lab.mesh import TopologyError, TriMesh
from helfrich_lab.params import ParameterSet, scale_params
from helfrich_lab.spheres import sphere_energy_closed_form
from helfrich_lab.stability import PerturbationSpec, perturb_sphere

WILLMORE = ParameterSet(kc=1, c0=0, lam=0, p=0)
SET_A = ParameterSet(kc=1, c0=0, lam=1, p=-1)
SET_B = ParameterSet(kc=1, c0=1, lam=0, p=0)

# s = 3..6 at radius 2.
SUP_A = (8.615806e-4, 8.731918e-4, 8.702413e-4, 8.691371e-4)
L2_A = (6.044198e-4, 4.528993e-4, 3.273101e-4, 2.339919e-4)
SUP_B = (3.405510e-3, 1.379162e-3, 8.759482e-4, 8.303707e-4)
L2_B = (2.462758e-3, 7.484998e-4, 3.593069e-4, 2.368400e-4)


def _blob(seed: int = 0) -> TriMesh:
    rng = np.random.default_rng(seed)
    modes = tuple(
        (l, m, float(rng.uniform(-0.06, 0.06)))
        for l in range(1, 4)
        for m in range(-l, l + 1)
    )
    return perturb_sphere(PerturbationSpec(modes=modes, subdiv=3))


def test_willmore_sphere_energy():
    e = helfrich_energy(icosphere(5), WILLMORE)
    assert e.total == pytest.approx(8.0 * math.pi, rel=0.01)
    assert e.area_term == 0.0 and e.volume_term == 0.0 and e.topological == 0.0


def test_bending_vanishes_when_h_matches_c0():
    # H = 2/r = 1 = c0 kills the integrand analytically.
    e = helfrich_energy(icosphere(5, radius=2.0), SET_B)
    assert abs(e.total) < 0.3
    assert e.bending >= 0.0


def test_topological_term():
    e = helfrich_energy(icosphere(5), ParameterSet(kc=1, kbar=2, c0=0, lam=0, p=0))
    assert e.topological == pytest.approx(8.0 * math.pi, rel=1e-15)
    assert e.total == pytest.approx(16.0 * math.pi, rel=0.01)


def test_breakdown_sums():
    e = helfrich_energy(_blob(3), ParameterSet(kc=2, kbar=0.5, c0=0.3, lam=1.5, p=-0.7))
    parts = e.bending + e.area_term + e.volume_term + e.topological
    assert e.total == pytest.approx(parts, rel=1e-14)
    assert e.bending >= 0.0


def test_energy_requires_chi_two():
    v1 = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    f1 = np.array([[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]])
    two_tets = TriMesh(
        np.vstack([v1, v1 + [5.0, 0.0, 0.0]]), np.vstack([f1, f1 + 4]), validate=False
    )
    with pytest.raises(TopologyError):
        helfrich_energy(two_tets, WILLMORE)


def test_energy_dilation_covariance():
    """E(rho * mesh, scaled params) = E(mesh, params): the parameter scaling
    exponents (c0/rho, lam/rho^2, p/rho^3) leave the energy invariant."""
    params = ParameterSet(kc=1, kbar=0.4, c0=0.5, lam=1, p=-1)
    mesh = _blob(1)
    base = helfrich_energy(mesh, params).total
    for rho in (2.7, 0.3):
        scaled_mesh = TriMesh(mesh.vertices * rho, mesh.faces, validate=False)
        scaled = helfrich_energy(scaled_mesh, scale_params(params, rho)).total
        assert scaled == pytest.approx(base, rel=1e-10)


def test_closed_form_matches_discrete_on_spheres():
    cases = [
        (1.0, WILLMORE),
        (2.0, SET_A),
        (2.0, SET_B),
        (0.8, ParameterSet(kc=1, kbar=0.5, c0=2, lam=-2, p=1)),
    ]
    for r, params in cases:
        want = sphere_energy_closed_form(r, params)
        got = helfrich_energy(icosphere(5, radius=r), params).total
        if abs(want) < 1e-6:
            assert abs(got) < 0.5
        else:
            assert got == pytest.approx(want, rel=0.01)


# -- reformulation identity ---------------------------------------------------


def test_tilde_identity_is_zero_for_willmore():
    defect, _, _ = tilde_equivalence_check(icosphere(3), WILLMORE)
    assert defect == 0.0


def test_tilde_identity_blob():
    defect, lhs, _ = tilde_equivalence_check(
        _blob(2), ParameterSet(kc=1, kbar=1, c0=0.5, lam=2, p=-1)
    )
    assert abs(defect) <= 1e-9 * abs(lhs)


def test_tilde_identity_general_params():
    # kc not a power of two exercises genuinely different roundings on the
    # two sides of the identity.
    defect, lhs, rhs = tilde_equivalence_check(
        _blob(5), ParameterSet(kc=0.7, kbar=-0.3, c0=-1.2, lam=0.9, p=0.4)
    )
    assert abs(defect) <= 1e-9 * max(abs(lhs), abs(rhs), 1.0)


# -- pointwise residual -------------------------------------------------------


def test_residual_refinement_tables():
    for params, sups, l2s in ((SET_A, SUP_A, L2_A), (SET_B, SUP_B, L2_B)):
        for s, sup_want, l2_want in zip(range(3, 7), sups, l2s):
            res = el_residual_field(icosphere(s, radius=2.0), params)
            assert res.sup == pytest.approx(sup_want, rel=1e-6)
            assert res.l2 == pytest.approx(l2_want, rel=1e-6)


def test_residual_norm_behaviour_under_refinement():
    # At the classified radius the sup norm stays small and decreases from
    # s=4 on; the L2 norm decreases at every step.
    assert SUP_A[2] <= 0.05 and SUP_B[2] <= 0.05  # s=5 rows
    assert SUP_A[1] > SUP_A[2] > SUP_A[3]
    assert SUP_B[0] > SUP_B[1] > SUP_B[2] > SUP_B[3]
    assert L2_A == tuple(sorted(L2_A, reverse=True))
    assert L2_B == tuple(sorted(L2_B, reverse=True))


def test_residual_constant_on_critical_sphere_shift():
    """At r=1 with set A the analytic residual is the constant -1; the
    discrete field reproduces it uniformly."""
    res = el_residual_field(icosphere(4), SET_A)
    assert np.abs(res.values + 1.0).max() <= 0.02
    assert res.values.mean() == pytest.approx(-1.0, rel=1e-3)
    assert res.sup == pytest.approx(1.0, rel=0.02)


def test_residual_nonconstant_on_perturbed_sphere():
    pert = perturb_sphere(PerturbationSpec(modes=((2, 0, 0.1),), subdiv=4))
    res = el_residual_field(pert, SET_A)
    assert np.ptp(res.values) > 1.0


def test_residual_norms_consistent():
    res = el_residual_field(_blob(4), SET_A)
    assert res.sup == np.abs(res.values).max()
    area = curvature_field(_blob(4)).area
    l2 = math.sqrt(float((res.values**2 * area).sum() / area.sum()))
    assert res.l2 == pytest.approx(l2, rel=1e-12)


# -- Willmore lower bound -----------------------------------------------------


def test_willmore_lower_bound_on_smooth_meshes():
    """Bending with c0=0, kc=1 stays above the smooth minimum 8*pi minus a
    discretization slack of 0.5 on resolved genus-0 meshes."""
    floor = 8.0 * math.pi - 0.5
    meshes = [
        icosphere(2),
        icosphere(3, radius=2.5),
        icosphere(4),
        TriMesh(icosphere(3).vertices * np.array([2.0, 1.0, 1.0]), icosphere(3).faces),
        _blob(0),
        _blob(7),
    ]
    for mesh in meshes:
        assert helfrich_energy(mesh, WILLMORE).bending >= floor


def test_willmore_bound_fails_on_raw_cube():
    """The 12-triangle cube under-resolves its concentrated edge curvature:
    the discrete bending (measured 14.52) sits far below 8*pi.  Pinned so
    the limitation is explicit rather than silent."""
    bending = helfrich_energy(cube_mesh(), WILLMORE).bending
    assert bending == pytest.approx(14.5185, rel=1e-3)
    assert bending < 8.0 * math.pi - 0.5
