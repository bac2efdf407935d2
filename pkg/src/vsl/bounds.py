"""Explicit evaluators for the L1 and J_p stability bound chains.

The underlying estimates are stated with existential constants; here every
constant is fixed by composing the displayed inequalities of the proofs term
by term, giving a checkable (sufficient, non-optimal) bound:

  B1 = 2 e1 + 2 sqrt(M a) sqrt(e1)
       + sqrt(4 pi (M+1)) * sqrt(2 eJ + 2 R^2 e1 + 2 T + e1^2/pi + a e1/pi)

where e1, eJ are the L1 and impulse sizes of the initial perturbation, M and
a bound the profile's sup and mass, and T is the tail impulse beyond B_R.
The J and L^p chains then reuse B1:

  BJ = 2 R^2 B1 + eJ + 2 T
  Bp = ((M+1)^p B1 + 2^(3p) M^p e1 + 2^(2p) eP^p)^(1/p)

When only (L^p, impulse) perturbation data is available, e1 is majorized by
pi eP + eJ.  All bounds are monotone non-decreasing in every size argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad

from .field import RadialProfile


@dataclass(frozen=True)
class ProfileParams:
    """Measured parameters of a radial monotone profile.

    M bounds the sup, alpha the mass; the profile's essential support sits in
    the disk of radius R, tail_impulse is the impulse beyond that disk (zero
    for compactly supported profiles) and sixth_moment is the full |x|^6
    moment used by the non-compact theory.
    """

    M: float
    alpha: float
    R: float
    tail_impulse: float = 0.0
    sixth_moment: float = math.inf

    def __post_init__(self):
        for name in ("M", "alpha", "R", "tail_impulse"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class PerturbationSize:
    """Measured sizes of the initial perturbation omega0 - zeta.

    eps1 may be omitted (None) when only J_p data is available; the bounds
    then majorize it via pi * epsP + epsJ.
    """

    epsJ: float
    epsP: float
    p: float
    eps1: float | None = None

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        for name in ("epsJ", "epsP"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.eps1 is not None and self.eps1 < 0:
            raise ValueError("eps1 must be nonnegative")

    def l1_size(self) -> float:
        """eps1 if measured, else its (L^p, impulse) majorant pi epsP + epsJ."""
        if self.eps1 is not None:
            return self.eps1
        return math.pi * self.epsP + self.epsJ


def bound_l1(pp: ProfileParams, sz: PerturbationSize) -> float:
    """Sup-in-time L1 deviation bound."""
    e1 = sz.l1_size()
    eJ = sz.epsJ
    T = pp.tail_impulse
    inner = (
        2.0 * eJ
        + 2.0 * pp.R**2 * e1
        + 2.0 * T
        + e1**2 / math.pi
        + pp.alpha * e1 / math.pi
    )
    return (
        2.0 * e1
        + 2.0 * math.sqrt(pp.M * pp.alpha) * math.sqrt(e1)
        + math.sqrt(4.0 * math.pi * (pp.M + 1.0)) * math.sqrt(inner)
    )


def bound_j(pp: ProfileParams, sz: PerturbationSize, l1_bound: float) -> float:
    """Sup-in-time impulse deviation bound, given an L1 bound (or measurement)."""
    return 2.0 * pp.R**2 * l1_bound + sz.epsJ + 2.0 * pp.tail_impulse


def bound_lp(pp: ProfileParams, sz: PerturbationSize, l1_bound: float) -> float:
    """Sup-in-time L^p deviation bound, given an L1 bound (or measurement)."""
    p = sz.p
    if p > 16:
        raise ValueError(f"p = {p} would overflow the 2^(3p) factors; p <= 16 only")
    e1 = sz.l1_size()
    total = (
        (pp.M + 1.0) ** p * l1_bound
        + 2.0 ** (3 * p) * pp.M**p * e1
        + 2.0 ** (2 * p) * sz.epsP**p
    )
    return total ** (1.0 / p)


def bound_jp_total(pp: ProfileParams, sz: PerturbationSize) -> float:
    """Sup-in-time J_p deviation bound: the L^p and impulse chains combined."""
    b1 = bound_l1(pp, sz)
    return bound_lp(pp, sz, b1) + bound_j(pp, sz, b1)


# ---------------------------------------------------------------------------
# Tail radii for non-compact profiles
# ---------------------------------------------------------------------------

def tail_impulse_of(profile: RadialProfile, R: float, h: float | None = None) -> float:
    """2 pi * integral_R^inf r^3 f(r) dr by radial quadrature."""
    return _radial_tail(profile, R, 3, h)


def tail_sixth_of(profile: RadialProfile, R: float, h: float | None = None) -> float:
    """2 pi * integral_R^inf r^7 f(r) dr by radial quadrature."""
    return _radial_tail(profile, R, 7, h)


def _radial_tail(profile: RadialProfile, R: float, power: int, h: float | None) -> float:
    upper = _support_radius(profile, h)
    if upper is not None and upper <= R:
        return 0.0
    val, _err = quad(
        lambda r: 2.0 * math.pi * r**power * float(profile(r, h=h)),
        R,
        upper if upper is not None else math.inf,
        limit=200,
    )
    return max(0.0, float(val))


def profile_support_radius(profile: RadialProfile, h: float | None = None) -> float | None:
    """Exact support radius for compactly supported kinds, else None."""
    if profile.kind == "sharp-patch":
        return profile.params["radius"]
    if profile.kind == "piecewise-linear":
        return max(profile.params["radii"])
    return None  # gaussian and mollified tails are strictly positive


_support_radius = profile_support_radius


def tail_radius_for(
    profile: RadialProfile,
    epsilon: float,
    p: float,
    r_max: float,
    h: float | None = None,
) -> float:
    """Smallest ladder radius making both tail terms of the J_p chain <= epsilon.

    Searches R over the geometric ladder {1, 1.25, 1.5625, ...} capped at
    ``r_max`` (the profile's support radius, when finite, is included as a
    rung).  The two conditions mirror the non-compact reduction: with
    C = sqrt(4 pi (M+1)),

        C * (T(R)^(1/2p) + T(R)) <= epsilon
        R^2 * C * T(R)^(1/2)     <= epsilon

    Raises if no rung qualifies, reporting the tails at the largest rung.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if p < 1:
        raise ValueError("p must be >= 1")
    M = float(profile(0.0, h=h))
    C = math.sqrt(4.0 * math.pi * (M + 1.0))
    rungs = []
    r = 1.0
    while r <= r_max:
        rungs.append(r)
        r *= 1.25
    support = _support_radius(profile, h)
    if support is not None and support <= r_max:
        rungs.append(support)
    if not rungs:
        raise ValueError(f"no ladder rung below r_max = {r_max}")
    last_diag = None
    for R in sorted(set(rungs)):
        T = tail_impulse_of(profile, R, h)
        cond_a = C * (T ** (1.0 / (2.0 * p)) + T)
        cond_b = R**2 * C * math.sqrt(T)
        last_diag = (R, T, cond_a, cond_b)
        if cond_a <= epsilon and cond_b <= epsilon:
            return R
    R, T, cond_a, cond_b = last_diag
    raise ValueError(
        f"epsilon = {epsilon:g} unreachable within r_max = {r_max}: at R = {R:g} "
        f"the tail impulse is {T:.3g} (terms {cond_a:.3g}, {cond_b:.3g})"
    )
