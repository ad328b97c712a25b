"""Closed-form analysis of spherical critical shapes.

For a round sphere of radius r the Euler-Lagrange equation of the bending
energy collapses to a scalar equation in u = 1/r:

    2*kc*c0*u^2 - (kc*c0^2/2 + lam)*2*u - p = 0.

For c0 != 0, dividing by 2*kc*c0 gives the normalized quadratic

    u^2 - x*u - p/(2*kc*c0) = 0,      x := lam/(kc*c0) + c0/2,

and for c0 = 0 the equation degenerates to the linear 2*lam*u + p = 0.
The classifier enumerates the positive roots, filters them through the
two unboundedness mechanisms of the functional, and reports whether the
textbook inequality table would have said the same thing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .params import ParameterSet, Tolerances, require_valid

# Verdict spellings are part of the external JSON/CSV interface.
ANY_RADIUS = "AnyRadius"
UNIQUE = "Unique"
TWO_RADII = "TwoRadii"
NO_SPHERE = "NoSphere"

PLAUSIBLE = "Plausible"
UNBOUNDED_FLATTENING = "UnboundedFlattening"
UNBOUNDED_INFLATION = "UnboundedInflation"


@dataclass(frozen=True)
class RootReport:
    """Real roots of the scalar Euler-Lagrange equation in u = 1/r.

    kind is "quadratic" for c0 != 0 and "linear" for the degenerate c0 = 0
    equation 2*lam*u + p = 0.  every_u marks the fully degenerate identity
    0 = 0 (c0 = lam = p = 0), where every u solves the equation.
    """

    kind: str
    roots: tuple[float, ...]
    every_u: bool = False


@dataclass(frozen=True)
class SphericalSolutionSet:
    """Outcome of the sphere classification.

    verdict: one of AnyRadius | Unique | TwoRadii | NoSphere.
    radii: admissible radii, ascending (empty unless Unique/TwoRadii).
    x_value: the normalized quadratic's x = lam/(kc*c0) + c0/2, None for c0 = 0.
    literal_theorem_agrees: True when the literal inequality-table reading of
        the classification theorem produces the same verdict and radii.  The
        known divergence is c0 < 0 with p < 0, where the table's interval for
        p is empty although the root analysis admits exactly one sphere.
    """

    verdict: str
    radii: tuple[float, ...] = ()
    x_value: float | None = None
    literal_theorem_agrees: bool = True


def el_sphere_residual(r: float, params: ParameterSet) -> float:
    """Left-hand side of the sphere Euler-Lagrange equation at radius r.

    Zero exactly when the sphere of radius r is a critical shape.
    """
    require_valid(params)
    if not (r > 0.0) or not math.isfinite(r):
        raise ValueError(f"radius must be a positive finite float, got {r!r}")
    kc, c0, lam, p = params.kc, params.c0, params.lam, params.p
    # Evaluated in u = 1/r with plain products so extreme radii underflow or
    # saturate to inf instead of raising.
    u = 1.0 / r
    return 2.0 * kc * c0 * u * u - (kc * c0**2 / 2.0 + lam) * 2.0 * u - p


def residual_scale(r: float, params: ParameterSet) -> float:
    """Magnitude scale used for relative residual comparisons at radius r."""
    kc, c0, lam, p = params.kc, params.c0, params.lam, params.p
    u = 1.0 / r
    return abs(2.0 * kc * c0) * u * u + abs(kc * c0**2 / 2.0 + lam) * 2.0 * u + abs(p) + 1.0


def quadratic_roots(params: ParameterSet, tol: Tolerances | None = None) -> RootReport:
    """Solve the scalar Euler-Lagrange equation for u = 1/r by formula.

    This solver is deliberately independent of :func:`classify_spheres`:
    it applies the plain quadratic formula (or the linear fallback for
    c0 = 0) and reports every real root, positive or not, ascending.
    A double root within tolerance is reported once.
    """
    require_valid(params)
    tol = tol or Tolerances()
    kc, c0, lam, p = params.kc, params.c0, params.lam, params.p

    if c0 == 0.0:
        # Degenerate linear equation 2*lam*u + p = 0.
        if lam == 0.0:
            if p == 0.0:
                return RootReport(kind="linear", roots=(), every_u=True)
            return RootReport(kind="linear", roots=())
        return RootReport(kind="linear", roots=(-p / (2.0 * lam),))

    if kc * c0 == 0.0:
        # Denormal c0: the u^2 coefficient underflows, so only the linear
        # root is representable; its partner lies beyond double range.
        if lam != 0.0:
            return RootReport(kind="quadratic", roots=(-p / (2.0 * lam),))
        return RootReport(kind="quadratic", roots=(0.0,) if p == 0.0 else ())

    x = lam / (kc * c0) + c0 / 2.0
    q = p / (2.0 * kc * c0)
    xx = x * x
    if not (math.isfinite(xx) and math.isfinite(4.0 * q)):
        # The discriminant leaves double range; to this precision the
        # quadratic splits into the dominant root x and the tiny root -q/x
        # (either may itself be infinite, signalling an unrepresentable root).
        lo, hi = sorted((x, -q / x if math.isfinite(q) else math.copysign(math.inf, -q * x)))
        return RootReport(kind="quadratic", roots=(lo, hi))
    disc = xx + 4.0 * q
    disc_scale = max(xx, abs(4.0 * q), 1.0)
    if abs(disc) <= tol.root_eps * disc_scale:
        return RootReport(kind="quadratic", roots=(x / 2.0,))
    if disc < 0.0:
        return RootReport(kind="quadratic", roots=())
    sq = math.sqrt(disc)
    lo, hi = (x - sq) / 2.0, (x + sq) / 2.0
    return RootReport(kind="quadratic", roots=(lo, hi))


def boundedness_verdict(params: ParameterSet) -> str:
    """Which of the two known unbounded-energy mechanisms applies.

    UnboundedFlattening: lam < -kc*c0^2/2 (disc-with-cusps sequence drives the
    energy to -infinity at fixed area scale).  UnboundedInflation: lam equals
    -kc*c0^2/2 exactly and p < 0 (growing spheres).  Otherwise Plausible,
    meaning only that neither mechanism excludes a minimum.
    """
    require_valid(params)
    lam_crit = -params.kc * params.c0**2 / 2.0
    if params.lam < lam_crit:
        return UNBOUNDED_FLATTENING
    if params.lam == lam_crit and params.p < 0.0:
        return UNBOUNDED_INFLATION
    return PLAUSIBLE


def _quadratic_u(kc: float, c0: float, lam: float, p: float, tol: Tolerances) -> tuple[float, ...]:
    """Roots of u^2 - x*u - q = 0 for the classifier, overflow-stable.

    Kept separate from :func:`quadratic_roots` (the test oracle) on purpose,
    although both implement the plain quadratic formula.
    """
    if kc * c0 == 0.0:
        # Denormal c0: the u^2 coefficient underflows; the partner of the
        # linear root lies beyond double range and is treated as absent.
        if lam != 0.0:
            return (-p / (2.0 * lam),)
        return (0.0,) if p == 0.0 else ()
    x = lam / (kc * c0) + c0 / 2.0
    q = p / (2.0 * kc * c0)
    xx = x * x
    if not (math.isfinite(xx) and math.isfinite(4.0 * q)):
        small = -q / x if math.isfinite(q) else math.copysign(math.inf, -q * x)
        return tuple(sorted((x, small)))
    disc = xx + 4.0 * q
    disc_scale = max(xx, abs(4.0 * q), 1.0)
    if abs(disc) <= tol.root_eps * disc_scale:
        return (x / 2.0,)
    if disc < 0.0:
        return ()
    sq = math.sqrt(disc)
    return ((x - sq) / 2.0, (x + sq) / 2.0)


def _representable_radii(roots) -> tuple[float, ...]:
    """Positive roots u mapped to radii 1/u that fit in double precision."""
    radii = []
    for u in roots:
        if u > 0.0:
            r = 1.0 / u
            if math.isfinite(r) and r > 0.0:
                radii.append(r)
    return tuple(sorted(radii))


def _derived_classification(params: ParameterSet, tol: Tolerances) -> tuple[str, tuple[float, ...], float | None]:
    """Case analysis of the root structure intersected with boundedness."""
    kc, c0, lam, p = params.kc, params.c0, params.lam, params.p
    lam_crit = -kc * c0**2 / 2.0

    if c0 == 0.0:
        if lam == 0.0 and p == 0.0:
            # The identity 0 = 0: every radius is critical (minimal Willmore
            # spheres; the topological term is radius-independent).
            return ANY_RADIUS, (), None
        if lam > 0.0 and p < 0.0:
            r = -2.0 * lam / p
            if math.isfinite(r):
                return UNIQUE, (r,), None
            return NO_SPHERE, (), None  # radius beyond double range
        # lam < 0 flattens; lam = 0 with p < 0 inflates; remaining sign
        # patterns leave the linear equation without a positive root.
        return NO_SPHERE, (), None

    if kc * c0 == 0.0:
        # Denormal c0: the quadratic coefficient underflows at double
        # precision. The root beyond double range is treated as absent,
        # leaving only the linear root -p/(2*lam) as a radius candidate.
        if lam != 0.0:
            radii = _representable_radii((-p / (2.0 * lam),))
            if radii:
                return UNIQUE, radii, None
        return NO_SPHERE, (), None

    x = lam / (kc * c0) + c0 / 2.0

    if lam < lam_crit:
        return NO_SPHERE, (), x
    if lam == lam_crit:
        # The quadratic loses its linear term: 2*kc*c0*u^2 = p.
        if p > 0.0 and c0 > 0.0:
            r = math.sqrt(2.0 * kc * c0 / p)
            if 0.0 < r < math.inf:
                return UNIQUE, (r,), x
        # p > 0 with c0 < 0 has no real root; p = 0 forces u = 0 (no finite
        # radius); p < 0 is the inflation regime; a radius that under- or
        # overflows double precision is likewise absent.
        return NO_SPHERE, (), x

    # lam > lam_crit: genuine quadratic with sign(x) = sign(c0).
    roots = _quadratic_u(kc, c0, lam, p, tol)
    radii = _representable_radii(roots)
    if not radii:
        return NO_SPHERE, (), x
    if len(radii) == 1:
        return UNIQUE, radii, x
    return TWO_RADII, radii, x


def _literal_theorem(params: ParameterSet, tol: Tolerances) -> tuple[str, tuple[float, ...]]:
    """Evaluate the classification theorem's inequality table verbatim."""
    kc, c0, lam, p = params.kc, params.c0, params.lam, params.p
    lam_crit = -kc * c0**2 / 2.0

    if c0 == 0.0 and lam == 0.0 and p == 0.0:
        return ANY_RADIUS, ()
    if c0 == 0.0 and lam > 0.0 and p < 0.0:
        r = -2.0 * lam / p
        return (UNIQUE, (r,)) if math.isfinite(r) else (NO_SPHERE, ())
    if c0 > 0.0 and lam == lam_crit and p > 0.0:
        r = math.sqrt(2.0 * kc * c0 / p)
        return (UNIQUE, (r,)) if 0.0 < r < math.inf else (NO_SPHERE, ())

    if c0 != 0.0 and lam > lam_crit:
        if kc * c0 == 0.0:
            # Denormal c0 collapses lam_crit to -0.0, so lam > 0 in this
            # branch. The x root sits beyond double range with the sign of
            # lam/c0; its partner is the linear root.
            on_boundary = False
            huge = math.copysign(math.inf, lam) * math.copysign(1.0, c0)
            u_pair = tuple(sorted((huge, -p / (2.0 * lam))))
            p_crit = math.copysign(math.inf, -c0)
        else:
            x = lam / (kc * c0) + c0 / 2.0
            q = p / (2.0 * kc * c0)
            xx = x * x
            if math.isfinite(xx) and math.isfinite(4.0 * q):
                disc = xx + 4.0 * q
                disc_scale = max(xx, abs(4.0 * q), 1.0)
                on_boundary = abs(disc) <= tol.root_eps * disc_scale
                if on_boundary:
                    u_pair = (x / 2.0, x / 2.0)
                elif disc < 0.0:
                    u_pair = None
                else:
                    sq = math.sqrt(disc)
                    u_pair = ((x - sq) / 2.0, (x + sq) / 2.0)
            else:
                # Same out-of-double-range split as the root solvers.
                on_boundary = False
                small = -q / x if math.isfinite(q) else math.copysign(math.inf, -q * x)
                u_pair = tuple(sorted((x, small)))
            p_crit = -kc * c0 * xx / 2.0  # p at which the discriminant vanishes
        if u_pair is not None:
            # The table's radii 2/(x +- sqrt(disc)) are exactly 1/u for the
            # two roots; drop any that double precision cannot represent.
            if c0 > 0.0 and (p >= 0.0 or on_boundary):
                radii = _representable_radii(u_pair[1:])
                if radii:
                    return UNIQUE, radii
            elif c0 < 0.0 and p_crit < p < 0.0 and not on_boundary:
                # As printed; empty whenever c0 < 0 since then p_crit > 0.
                radii = _representable_radii(u_pair[1:])
                if radii:
                    return UNIQUE, radii
            elif c0 > 0.0 and p_crit < p < 0.0 and not on_boundary:
                radii = _representable_radii(u_pair)
                if len(radii) == 2:
                    return TWO_RADII, radii
                if len(radii) == 1:
                    return UNIQUE, radii
    return NO_SPHERE, ()


def classify_spheres(params: ParameterSet, tol: Tolerances | None = None) -> SphericalSolutionSet:
    """Classify the spherical critical shapes admitted by *params*.

    The verdict is computed from the root analysis of the scalar
    Euler-Lagrange equation intersected with :func:`boundedness_verdict`,
    not by transliterating the inequality table; the table is evaluated
    separately and its agreement recorded.
    """
    require_valid(params)
    tol = tol or Tolerances()

    verdict, radii, x = _derived_classification(params, tol)
    if verdict != ANY_RADIUS and boundedness_verdict(params) != PLAUSIBLE:
        verdict, radii = NO_SPHERE, ()

    lit_verdict, lit_radii = _literal_theorem(params, tol)
    agrees = lit_verdict == verdict and len(lit_radii) == len(radii)
    if agrees:
        for a, b in zip(radii, lit_radii):
            scale = max(abs(a), abs(b), 1.0)
            if abs(a - b) > 1e4 * tol.root_eps * scale:
                agrees = False
                break

    # Internal sanity: every reported radius kills the residual.
    for r in radii:
        resid = el_sphere_residual(r, params)
        if abs(resid) > 1e3 * tol.root_eps * residual_scale(r, params):
            raise AssertionError(
                f"classified radius {r!r} has residual {resid!r}; classification bug"
            )

    return SphericalSolutionSet(
        verdict=verdict, radii=radii, x_value=x, literal_theorem_agrees=agrees
    )


def sphere_energy_closed_form(r: float, params: ParameterSet) -> float:
    """Energy of the round sphere of radius r (genus 0), as a cubic in r.

        E(r) = (4*pi/3)*p*r^3 + (2*pi*kc*c0^2 + 4*pi*lam)*r^2
               - 8*pi*kc*c0*r + 4*pi*kbar + 8*pi*kc.

    This is the direct integral of the functional over the sphere
    (H = 2/r, area 4*pi*r^2, volume (4/3)*pi*r^3, chi = 2); at r = 2/c0
    with lam = p = 0 it evaluates to 4*pi*kbar.
    """
    require_valid(params)
    if not (r > 0.0) or not math.isfinite(r):
        raise ValueError(f"radius must be a positive finite float, got {r!r}")
    kc, kbar, c0, lam, p = params.kc, params.kbar, params.c0, params.lam, params.p
    return (
        (4.0 * math.pi / 3.0) * p * r**3
        + (2.0 * math.pi * kc * c0**2 + 4.0 * math.pi * lam) * r**2
        - 8.0 * math.pi * kc * c0 * r
        + 4.0 * math.pi * kbar
        + 8.0 * math.pi * kc
    )


def unboundedness_witness(params: ParameterSet, n: int = 16) -> list[tuple[float, float]]:
    """Dyadic radii r_k = 2^k with their closed-form energies.

    Only meaningful in the UnboundedInflation regime, where the r^2
    coefficient cancels and the cubic term (p < 0) eventually dominates;
    other regimes are rejected.
    """
    if boundedness_verdict(params) != UNBOUNDED_INFLATION:
        raise ValueError("unboundedness witness requires the UnboundedInflation regime")
    if n < 2:
        raise ValueError(f"need at least two radii, got n={n}")
    return [(float(2**k), sphere_energy_closed_form(float(2**k), params)) for k in range(n)]
