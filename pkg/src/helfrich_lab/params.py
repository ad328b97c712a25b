"""Model constants, admissibility rules and the dilation scaling law.

The bending energy of a closed surface f is

    S(f) = (kc/2) * int (H - c0)^2 dmu  +  lam * Area  +  p * Vol
           + 2 * kbar * pi * chi,

with H the sum of the principal curvatures (a sphere of radius r has
H = 2/r for the outward normal).  Everything downstream works on a single
frozen :class:`ParameterSet` carrying the five constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ParameterSet:
    """Constants of the bending-energy model.

    Attributes
    ----------
    kc : float
        Bending modulus (energy units).  Must be strictly positive.
    kbar : float
        Gaussian bending modulus (energy units).  Enters only through the
        topological term ``2*kbar*pi*chi``; any sign.
    c0 : float
        Spontaneous curvature (1/length).
    lam : float
        Tensile stress (energy/length^2), coefficient of the area term.
    p : float
        Osmotic pressure difference (energy/length^3), coefficient of the
        volume term.
    """

    kc: float = 1.0
    kbar: float = 0.0
    c0: float = 0.0
    lam: float = 0.0
    p: float = 0.0


@dataclass(frozen=True)
class Tolerances:
    """Nondimensional tolerances shared across the package.

    geom_eps: relative tolerance for curvature and convexity tests on meshes.
    root_eps: absolute tolerance for root classification and radius
        comparisons in the sphere analysis.
    grad_tol: default flow termination threshold on the area-weighted
        gradient norm.
    """

    geom_eps: float = 1e-6
    root_eps: float = 1e-9
    grad_tol: float = 1e-4

    def __post_init__(self) -> None:
        for name in ("geom_eps", "root_eps", "grad_tol"):
            value = getattr(self, name)
            if not (value > 0.0) or not math.isfinite(value):
                raise ValueError(f"{name} must be a positive finite float, got {value!r}")


def validate(params: ParameterSet) -> str | None:
    """Check admissibility; return None when fine, else a message naming the field.

    Rules: kc > 0, every field finite.
    """
    for name in ("kc", "kbar", "c0", "lam", "p"):
        value = getattr(params, name)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            return f"{name} must be a real number, got {type(value).__name__}"
        if not math.isfinite(value):
            return f"{name} must be finite, got {value!r}"
    if not params.kc > 0.0:
        return f"kc must be > 0, got {params.kc!r}"
    return None


def require_valid(params: ParameterSet) -> None:
    """Raise ValueError when *params* is inadmissible."""
    message = validate(params)
    if message is not None:
        raise ValueError(message)


def scale_params(params: ParameterSet, rho: float) -> ParameterSet:
    """Parameters seen by the dilated surface rho * f.

    Under f -> rho*f curvatures scale by 1/rho, area by rho^2 and volume by
    rho^3, so the energy of rho*f under the returned parameters equals the
    energy of f under *params*:

        c0 -> c0/rho,  lam -> lam/rho^2,  p -> p/rho^3,

    with kc and kbar untouched.
    """
    if not (rho > 0.0) or not math.isfinite(rho):
        raise ValueError(f"rho must be a positive finite float, got {rho!r}")
    require_valid(params)
    return ParameterSet(
        kc=params.kc,
        kbar=params.kbar,
        c0=params.c0 / rho,
        lam=params.lam / rho**2,
        p=params.p / rho**3,
    )


# JSON/CLI field names; "lambda" is the external spelling of the lam attribute.
_FIELD_MAP = (("kc", "kc"), ("kbar", "kbar"), ("c0", "c0"), ("lambda", "lam"), ("p", "p"))


def params_to_dict(params: ParameterSet) -> dict[str, float]:
    """External mapping form, with the "lambda" spelling."""
    return {key: getattr(params, attr) for key, attr in _FIELD_MAP}


def params_from_dict(data: dict) -> ParameterSet:
    """Build a ParameterSet from an external mapping; unknown keys rejected."""
    known = {key for key, _ in _FIELD_MAP}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
    kwargs = {attr: float(data[key]) for key, attr in _FIELD_MAP if key in data}
    return ParameterSet(**kwargs)
