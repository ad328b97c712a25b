"""Cross-checks the compiled kernel backend against the numpy reference.

Both backends are supposed to implement identical arithmetic; agreement is
therefore required to near machine precision, not merely to discretization
accuracy.  Skipped when the extension did not build.
"""

import numpy as np
import pytest

from conftest import cube_mesh, icosphere
from helfrich_lab import _kernels
from helfrich_lab.stability import PerturbationSpec, perturb_sphere

BACKENDS = _kernels.get_backends()

pytestmark = pytest.mark.skipif(
    "cython" not in BACKENDS, reason="compiled kernel backend not built"
)


def _meshes():
    yield icosphere(3)
    yield cube_mesh()
    yield perturb_sphere(
        PerturbationSpec(modes=((2, 0, 0.1), (3, 1, -0.07)), subdiv=3)
    )


PARAMS = (1.0, 0.5, 1.0, -1.0)  # kc, c0, lam, p


def test_active_backend_reported():
    assert _kernels.active_backend() in BACKENDS


def test_vertex_geometry_matches():
    for mesh in _meshes():
        ref = BACKENDS["numpy"].vertex_geometry(mesh.vertices, mesh.faces)
        fast = BACKENDS["cython"].vertex_geometry(mesh.vertices, mesh.faces)
        for a, b in zip(ref, fast):
            np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)


def test_cot_accumulate_matches():
    rng = np.random.default_rng(42)
    for mesh in _meshes():
        u = rng.standard_normal(mesh.vertices.shape[0])
        ref = BACKENDS["numpy"].cot_accumulate(mesh.vertices, mesh.faces, u)
        fast = BACKENDS["cython"].cot_accumulate(mesh.vertices, mesh.faces, u)
        np.testing.assert_allclose(ref, fast, rtol=1e-12, atol=1e-13)


def test_energy_value_matches():
    for mesh in _meshes():
        ref = BACKENDS["numpy"].energy_value(mesh.vertices, mesh.faces, *PARAMS)
        fast = BACKENDS["cython"].energy_value(mesh.vertices, mesh.faces, *PARAMS)
        assert fast == pytest.approx(ref, rel=1e-13, abs=1e-13)


def test_energy_gradient_matches():
    for mesh in _meshes():
        ref = BACKENDS["numpy"].energy_gradient(mesh.vertices, mesh.faces, *PARAMS)
        fast = BACKENDS["cython"].energy_gradient(mesh.vertices, mesh.faces, *PARAMS)
        scale = np.abs(ref).max()
        np.testing.assert_allclose(fast, ref, rtol=1e-11, atol=1e-13 * max(scale, 1.0))


def test_gradient_with_areas_matches():
    mesh = icosphere(3, radius=1.7)
    ref_g, ref_a = BACKENDS["numpy"].gradient_with_areas(
        mesh.vertices, mesh.faces, *PARAMS
    )
    fast_g, fast_a = BACKENDS["cython"].gradient_with_areas(
        mesh.vertices, mesh.faces, *PARAMS
    )
    np.testing.assert_allclose(fast_g, ref_g, rtol=1e-11, atol=1e-14)
    np.testing.assert_allclose(fast_a, ref_a, rtol=1e-13)
