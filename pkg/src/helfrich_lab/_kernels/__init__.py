"""Mesh kernel backend selection.

Two interchangeable implementations of the per-face kernels exist:

- ``numpy_backend``: vectorized numpy, always available;
- ``_fast``: a Cython extension built opportunistically at install time.

The compiled backend is preferred when importable.  Set
``HELFRICH_LAB_KERNELS=numpy`` (or ``cython``) to force a choice; forcing
``cython`` raises if the extension is missing.  Both backends implement
identical arithmetic and are cross-checked in the test suite.
"""

from __future__ import annotations

import os

from . import numpy_backend

_choice = os.environ.get("HELFRICH_LAB_KERNELS", "auto").strip().lower()

if _choice not in ("auto", "cython", "numpy"):
    raise RuntimeError(
        f"HELFRICH_LAB_KERNELS must be auto, cython or numpy, got {_choice!r}"
    )

_impl = None
if _choice in ("auto", "cython"):
    try:
        from . import _fast as _impl  # type: ignore[no-redef]
    except ImportError:
        if _choice == "cython":
            raise RuntimeError(
                "HELFRICH_LAB_KERNELS=cython but the compiled backend is not importable"
            ) from None
if _impl is None:
    _impl = numpy_backend

vertex_geometry = _impl.vertex_geometry
energy_gradient = _impl.energy_gradient
energy_value = _impl.energy_value
gradient_with_areas = _impl.gradient_with_areas
cot_accumulate = _impl.cot_accumulate


def active_backend() -> str:
    """Name of the backend selected at import ("cython" or "numpy")."""
    return _impl.BACKEND_NAME


def get_backends() -> dict:
    """All importable backends by name (used by tests and the benchmark)."""
    found = {"numpy": numpy_backend}
    try:
        from . import _fast
    except ImportError:
        pass
    else:
        found["cython"] = _fast
    return found
