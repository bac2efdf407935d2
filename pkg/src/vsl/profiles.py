"""Radial monotone profile generators and the perturbation families applied
to them, with measured profile parameters and perturbation sizes.

Every generated initial vorticity is nonnegative with finite impulse;
amplitude perturbations that would go negative are clipped at zero and the
clipped mass is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .bounds import (
    PerturbationSize,
    ProfileParams,
    profile_support_radius,
    tail_impulse_of,
)
from .field import (
    GridSpec,
    RadialProfile,
    ScalarField,
    angular_impulse,
    boundary_mass_fraction,
    higher_moment,
    lp_norm,
    quadrature,
    sample_profile,
)

# Cells below this fraction of the peak no longer count as essential support.
SUPPORT_THRESHOLD = 1e-8

# A perturbed field with more than this mass fraction in the boundary frame
# is rejected: truncation artifacts would contaminate every functional.
SAFE_ZONE_LIMIT = 1e-4

PROFILE_KINDS = ("sharp-patch", "mollified-patch", "gaussian", "piecewise-linear", "cone")


def build_profile(kind: str, params: dict) -> RadialProfile:
    """Construct a profile by kind name, as declared in experiment configs."""
    params = dict(params)
    if kind == "sharp-patch":
        return RadialProfile.sharp_patch(**params)
    if kind == "mollified-patch":
        return RadialProfile.mollified_patch(**params)
    if kind == "gaussian":
        return RadialProfile.gaussian(**params)
    if kind == "piecewise-linear":
        return RadialProfile.piecewise_linear(params["points"])
    if kind == "cone":
        return RadialProfile.cone(**params)
    raise ValueError(f"unknown profile kind {kind!r}; expected one of {PROFILE_KINDS}")


def make_profile(
    kind: str, params: dict, spec: GridSpec
) -> tuple[ScalarField, ProfileParams, RadialProfile]:
    """Sample a profile and measure the parameters its stability bounds need."""
    profile = build_profile(kind, params)
    if not profile.is_monotone(r_max=2.0 * spec.L):
        raise ValueError(f"profile {kind} failed the radial monotonicity audit")
    zeta = sample_profile(profile, spec)
    M = zeta.max_abs()
    alpha = quadrature(zeta)
    exact = profile_support_radius(profile, spec.h)
    # measured cell radii sit up to half a cell diagonal inside the support
    R = exact if exact is not None else support_radius(zeta) + spec.h / math.sqrt(2)
    pp = ProfileParams(
        M=M,
        alpha=alpha,
        R=R,
        tail_impulse=tail_impulse_of(profile, R, h=spec.h),
        sixth_moment=higher_moment(zeta, 6),
    )
    return zeta, pp, profile


def support_radius(f: ScalarField, threshold: float = SUPPORT_THRESHOLD) -> float:
    """Largest cell radius carrying more than ``threshold`` of the peak."""
    peak = f.max_abs()
    if peak == 0.0:
        return 0.0
    r2 = f.spec.radius_sq()
    alive = np.abs(f.values) > threshold * peak
    return float(np.sqrt(np.max(r2[alive])))


# ---------------------------------------------------------------------------
# Perturbations
# ---------------------------------------------------------------------------

PERTURBATION_KINDS = ("none", "translate", "boundary-wobble", "additive-bump", "amplitude-scale")


@dataclass(frozen=True)
class PerturbationSpec:
    kind: str
    params: dict = dc_field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in PERTURBATION_KINDS:
            raise ValueError(
                f"unknown perturbation kind {self.kind!r}; expected one of {PERTURBATION_KINDS}"
            )


@dataclass(frozen=True)
class PerturbationResult:
    omega0: ScalarField
    sizes: dict[float, PerturbationSize]
    clipped_mass: float


def perturb(
    zeta: ScalarField,
    pspec: PerturbationSpec,
    p_list: tuple[float, ...] = (2.0,),
    profile: RadialProfile | None = None,
) -> PerturbationResult:
    """Apply a perturbation to a radial profile field and measure its sizes.

    Geometric perturbations (wobble) need the radial rule; it is taken from
    ``profile`` when given, otherwise reconstructed from the sampled field by
    radial interpolation.  The result is clipped at zero (clipped mass
    reported) and rejected when mass reaches the domain's outer frame.
    """
    spec = zeta.spec
    values = _perturbed_values(zeta, pspec, profile)
    clipped = float(-np.sum(np.minimum(values, 0.0)) * spec.h**2)
    omega0 = ScalarField(spec, np.maximum(values, 0.0))
    if boundary_mass_fraction(omega0) > SAFE_ZONE_LIMIT:
        raise ValueError(
            f"perturbation {pspec.kind} pushes mass outside the safe zone "
            f"(boundary fraction {boundary_mass_fraction(omega0):.2e})"
        )
    diff = ScalarField(spec, omega0.values - zeta.values)
    eps1 = lp_norm(diff, 1)
    epsJ = angular_impulse(ScalarField(spec, np.abs(diff.values)))
    sizes = {
        float(p): PerturbationSize(eps1=eps1, epsJ=epsJ, epsP=lp_norm(diff, p), p=float(p))
        for p in p_list
    }
    return PerturbationResult(omega0=omega0, sizes=sizes, clipped_mass=clipped)


def _perturbed_values(
    zeta: ScalarField, pspec: PerturbationSpec, profile: RadialProfile | None
) -> np.ndarray:
    spec = zeta.spec
    kind, params = pspec.kind, pspec.params
    if kind == "none":
        return zeta.values.copy()
    if kind == "translate":
        # whole-cell shifts keep the perturbation an exact permutation
        sx = round(params.get("dx", 0.0) / spec.h)
        sy = round(params.get("dy", 0.0) / spec.h)
        return np.roll(zeta.values, shift=(sy, sx), axis=(0, 1))
    if kind == "amplitude-scale":
        return params["factor"] * zeta.values
    if kind == "additive-bump":
        X, Y = spec.meshgrid()
        cx, cy = params.get("center", (0.0, 0.0))
        bump = (X - cx) ** 2 + (Y - cy) ** 2 < params["radius"] ** 2
        return zeta.values + params["height"] * bump
    if kind == "boundary-wobble":
        rule = profile if profile is not None else _radial_rule(zeta)
        X, Y = spec.meshgrid()
        r = np.sqrt(spec.radius_sq())
        theta = np.arctan2(Y, X)
        if abs(params["amplitude"]) >= 1.0:
            raise ValueError("wobble amplitude >= 1 inverts the boundary")
        stretch = 1.0 + params["amplitude"] * np.cos(params["mode"] * theta)
        if profile is not None:
            return profile(r / stretch, h=spec.h)
        return rule(r / stretch)
    raise AssertionError(kind)


def _radial_rule(zeta: ScalarField):
    """Radial interpolant of a (radially symmetric) sampled field."""
    r = np.sqrt(zeta.spec.radius_sq()).ravel()
    order = np.argsort(r)
    r_sorted = r[order]
    v_sorted = zeta.values.ravel()[order]

    def rule(rq: np.ndarray) -> np.ndarray:
        return np.interp(rq, r_sorted, v_sorted, left=v_sorted[0], right=0.0)

    return rule


# ---------------------------------------------------------------------------
# Randomized nonnegative fields for the verification suites
# ---------------------------------------------------------------------------

def random_bumps(
    spec: GridSpec,
    rng: np.random.Generator,
    n_bumps: tuple[int, int] = (1, 6),
    center_radius: float | None = None,
) -> ScalarField:
    """Sum of random Gaussian bumps, supported well inside the box."""
    if center_radius is None:
        center_radius = 0.35 * spec.L
    X, Y = spec.meshgrid()
    values = np.zeros((spec.n, spec.n))
    for _ in range(int(rng.integers(n_bumps[0], n_bumps[1] + 1))):
        cx, cy = rng.uniform(-center_radius, center_radius, size=2)
        width = rng.uniform(0.15, 0.6) * max(1.0, 0.25 * spec.L)
        amp = rng.uniform(0.2, 1.0)
        values += amp * np.exp(-(((X - cx) ** 2 + (Y - cy) ** 2) / width**2))
    return ScalarField(spec, values)


def random_admissible(spec: GridSpec, rng: np.random.Generator) -> ScalarField:
    """Random field with 0 <= value <= 1 and mass pi (the minimality class).

    The mass of ``min(s * bumps, 1)`` grows continuously with s (Gaussian
    bumps are positive everywhere), so a bisection on s lands on mass pi;
    a final down-scale makes it exact without breaking the upper bound.
    """
    target = np.pi
    bumps = random_bumps(spec, rng).values
    h2 = spec.h**2
    # pedestal disk comfortably exceeding mass pi on its own; random radius
    # keeps the family from collapsing onto one support shape
    radius = rng.uniform(1.05, max(1.1, 0.42 * spec.L))
    pedestal = (spec.radius_sq() < radius**2).astype(float)

    def mass_at(c: float) -> float:
        return float(np.minimum(bumps * min(1.0, c) + c * pedestal, 1.0).sum() * h2)

    if mass_at(1.0) < target:
        raise RuntimeError(f"pedestal of radius {radius} cannot reach mass pi; L too small")
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mass_at(mid) < target:
            lo = mid
        else:
            hi = mid
    values = np.minimum(bumps * min(1.0, hi) + hi * pedestal, 1.0)
    return ScalarField(spec, values * (target / (values.sum() * h2)))
