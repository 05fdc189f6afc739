"""Spectral objects of the Hardy operator and the existence classifier.

For the operator -(1/psi) L - lambda/rho^2 on the unit Koranyi ball the radial
indicial roots are

    alpha(+,-) = -(Q-2)/2 +- sqrt(lambda + ((Q-2)/2)^2),

real exactly when lambda is at least the critical value -((Q-2)/2)^2 (the
sharp Hardy constant).  The barrier

    sigma_lambda(s) = s^alpha- - s^alpha+        (lambda above critical)
                    = -s^alpha- * ln s           (lambda critical)

vanishes at s = 1, is positive on (0, 1), and its radial lift K = sigma(|xi|)
is annihilated by the operator.  K's boundary flux density is

    A grad K . n = sigma'(1) * psi / |grad rho|   on the unit sphere,

with sigma'(1) = alpha- - alpha+ above critical and -1 at critical.

The classifier is a three-way verdict in the parameters (Q, lambda, a, p),
decided by the sign of the margin

    margin = (a + 2) - (Q - 2 + alpha-) * (p - 1):

positive margin means an explicit stationary solution exists (witness
module); negative margin (or zero above critical) means no weak solution
exists for any admissible boundary datum; zero margin at critical lambda is
genuinely open.  All threshold bookkeeping (critical exponents of first,
second, and third kind) is rearrangement of the same margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .hcalc import HyperDual, hd_log, hlap, radial_lift, egrad, value_of
from .hgroup import (
    GroupContext,
    HPoint,
    a_matrix,
    knorm,
    knorm_grad_of,
    knorm_of,
    psi,
    psi_of,
)
from .hquad import Annulus, radial_integral, surface_integral

CRITICAL_TOL = 1e-12


@dataclass(frozen=True)
class ProblemParams:
    """Full parameter state: group context, potential strength lambda,
    weight exponent a (V = |xi|^a), nonlinearity p, time order k."""

    ctx: GroupContext
    lam: float
    a: float
    p: float
    k: int = 1

    def __post_init__(self) -> None:
        if not self.p > 1.0:
            raise ValueError(f"nonlinearity exponent must satisfy p > 1, got {self.p}")
        if not (isinstance(self.k, int) and self.k >= 1):
            raise ValueError(f"time order must be a positive integer, got {self.k}")
        if self.lam < self.critical_lam - CRITICAL_TOL:
            raise ValueError(
                f"lambda = {self.lam} lies below the Hardy threshold {self.critical_lam}"
            )

    @property
    def Q(self) -> int:
        return self.ctx.Q

    @property
    def critical_lam(self) -> float:
        return -(((self.Q - 2) / 2.0) ** 2)

    @property
    def is_critical(self) -> bool:
        return abs(self.lam - self.critical_lam) <= CRITICAL_TOL


@dataclass(frozen=True)
class AlphaPair:
    alpha_minus: float
    alpha_plus: float


class Verdict(str, Enum):
    NONEXISTENCE_ALL_F = "NonexistenceAllF"
    EXISTENCE_WITNESS = "ExistenceWitness"
    OPEN_CRITICAL = "OpenCritical"


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    rule: str
    threshold: Optional[float]
    threshold_kind: Optional[str]


@dataclass(frozen=True)
class ThresholdInfo:
    """A critical exponent, if the parameters admit one.

    kind 'second': nonexistence for p above the threshold (lambda in
    [critical, 0), a > -2); kind 'first': nonexistence for p below it
    (lambda > 0, a < -2); kind 'third': the threshold lives in the weight
    exponent a instead of p (lambda = 0, a* = -2).
    """

    kind: Optional[str]
    value: Optional[float]
    variable: Optional[str]  # 'p' or 'a'


@dataclass(frozen=True)
class PointwiseReport:
    """Outcome of a pointwise identity check over a sample of points."""

    passed: bool
    max_scaled_residual: float
    tol: float
    n_points: int
    worst_point: tuple = ()
    note: str = ""


def alphas(params: ProblemParams) -> AlphaPair:
    half = (params.Q - 2) / 2.0
    if params.is_critical:
        return AlphaPair(-half, -half)
    root = math.sqrt(params.lam + half * half)
    return AlphaPair(-half - root, -half + root)


def existence_margin(params: ProblemParams) -> float:
    """(a+2) - (Q-2+alpha-)(p-1); positive iff a stationary witness exists.

    The same expression decides the nonempty decay window of the subcritical
    witness, so classifier and witness construction can never disagree.
    """
    al = alphas(params)
    return (params.a + 2.0) - (params.Q - 2.0 + al.alpha_minus) * (params.p - 1.0)


def sigma_lambda(s, params: ProblemParams):
    """The radial barrier profile; accepts float, array, or HyperDual s > 0."""
    if isinstance(s, HyperDual):
        positive = s.value > 0.0
    elif isinstance(s, np.ndarray):
        positive = bool((s > 0.0).all())
    else:
        positive = s > 0.0
    if not positive:
        raise ValueError("sigma_lambda needs s > 0")
    al = alphas(params)
    if params.is_critical:
        return -(s ** al.alpha_minus) * hd_log(s)
    return s ** al.alpha_minus - s ** al.alpha_plus


def sigma_prime_one(params: ProblemParams) -> float:
    """sigma'(1): the boundary flux coefficient c_lambda."""
    if params.is_critical:
        return -1.0
    al = alphas(params)
    return al.alpha_minus - al.alpha_plus


def k_profile(params: ProblemParams) -> Callable:
    """K as a 1D profile, for radial lifts and quadrature."""
    return lambda s: sigma_lambda(s, params)


def k_func(xi: HPoint, params: ProblemParams) -> float:
    """K(xi) = sigma_lambda(|xi|) on the punctured closed unit ball."""
    rho = knorm(xi)
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"K is defined for 0 < |xi| <= 1, got |xi| = {rho}")
    return float(value_of(sigma_lambda(rho, params)))


# ---------------------------------------------------------------------------
# pointwise identity checks
# ---------------------------------------------------------------------------

def _chart_point(r: float, angle_unit: np.ndarray, sign: float, rho: float, n: int) -> HPoint:
    """Point at gauge distance rho with sphere parameters (r, omega, sign)."""
    z = r * angle_unit
    phi = sign * math.sqrt(max(1.0 - r**4, 0.0))
    return HPoint(rho * z[:n], rho * z[n:], rho * rho * phi)


def check_k_harmonic(
    params: ProblemParams,
    n_points: int = 2000,
    tol: float = 1e-8,
    seed: int = 1,
    rho_bounds: tuple[float, float] = (1e-3, 1.0),
    psi_min: float = 0.05,
) -> PointwiseReport:
    """Verify -(1/psi) L K + (lambda/rho^2) K = 0 at random interior points.

    The sub-Laplacian is evaluated by hyper-dual AD on the radial lift (the
    full 2N+1-coordinate pipeline, not the 1D shortcut).  The residual is
    scaled by 1 + |K|/rho^2 so the tolerance is meaningful where the terms
    blow up.  Points keep psi >= psi_min and rho in rho_bounds.
    """
    rng = np.random.default_rng(seed)
    n = params.ctx.N
    field = radial_lift(k_profile(params))

    worst = 0.0
    worst_pt: tuple = ()
    for _ in range(n_points):
        r = math.sqrt(rng.uniform(psi_min * 1.2, 0.999))
        u = rng.normal(size=2 * n)
        u /= np.linalg.norm(u)
        sign = 1.0 if rng.uniform() < 0.5 else -1.0
        rho = math.exp(rng.uniform(math.log(rho_bounds[0]), math.log(rho_bounds[1])))
        pt = _chart_point(r, u, sign, rho, n)

        kval = float(value_of(sigma_lambda(rho, params)))
        resid = abs(-hlap(field, pt) / psi(pt) + params.lam * kval / rho**2)
        scaled = resid / (1.0 + abs(kval) / rho**2)
        if scaled > worst:
            worst = scaled
            worst_pt = (tuple(pt.x), tuple(pt.y), pt.phi)
    return PointwiseReport(worst <= tol, worst, tol, n_points, worst_pt)


def flux_pair(params: ProblemParams, xi: HPoint) -> tuple[float, float]:
    """(measured, predicted) boundary flux density of K at a unit-sphere point.

    measured:  A(z) grad K . n with grad K and n = grad rho/|grad rho| from AD;
    predicted: sigma'(1) * psi / |grad rho|.
    """
    field = radial_lift(k_profile(params))
    grad_k = egrad(field, xi)
    grad_rho = egrad(radial_lift(lambda s: s), xi)
    nrm = float(np.linalg.norm(grad_rho))
    measured = float(a_matrix(xi) @ grad_k @ grad_rho) / nrm
    predicted = sigma_prime_one(params) * psi(xi) / nrm
    return measured, predicted


def check_k_boundary(
    params: ProblemParams,
    nodes: int = 1200,
    tol: float = 1e-6,
    psi_min: float = 0.05,
) -> PointwiseReport:
    """Verify the boundary flux identity on a deterministic unit-sphere grid.

    Nodes keep psi = r^2 >= psi_min; the identity degenerates to 0 = 0 at the
    poles, which carry no information.
    """
    n = params.ctx.N
    n_r = max(8, int(math.sqrt(nodes / 2)))
    n_ang = max(4, nodes // (2 * n_r) + 1)
    r_grid = np.linspace(math.sqrt(psi_min) + 0.01, 0.999, n_r)

    rng = np.random.default_rng(7)
    worst = 0.0
    worst_pt: tuple = ()
    count = 0
    for r in r_grid:
        for _ in range(n_ang):
            u = rng.normal(size=2 * n)
            u /= np.linalg.norm(u)
            for sign in (1.0, -1.0):
                pt = _chart_point(float(r), u, sign, 1.0, n)
                measured, predicted = flux_pair(params, pt)
                rel = abs(measured - predicted) / max(abs(predicted), 1e-300)
                count += 1
                if rel > worst:
                    worst = rel
                    worst_pt = (tuple(pt.x), tuple(pt.y), pt.phi)
    return PointwiseReport(worst <= tol, worst, tol, count, worst_pt)


# ---------------------------------------------------------------------------
# classifier
# ---------------------------------------------------------------------------

def classify(params: ProblemParams) -> Classification:
    """Three-way existence verdict from the sign of the margin
    (a+2) - (Q-2+alpha-)(p-1), with the open equality case at critical lambda.
    """
    margin = existence_margin(params)
    thr = critical_exponent(params.ctx, params.lam, params.a)
    scale = abs(params.a) + 2.0 + abs(params.Q - 2.0 + alphas(params).alpha_minus) * params.p
    if params.is_critical and abs(margin) <= CRITICAL_TOL * max(1.0, scale):
        return Classification(
            Verdict.OPEN_CRITICAL,
            "critical lambda with (Q-2+alpha-)*p exactly equal to Q+a+alpha-: "
            "neither the capacity argument nor the witness construction applies",
            thr.value,
            thr.kind,
        )
    if margin > 0.0:
        return Classification(
            Verdict.EXISTENCE_WITNESS,
            "(Q-2+alpha-)*p < Q+a+alpha-: an explicit radial stationary "
            "solution exists for suitable boundary data",
            thr.value,
            thr.kind,
        )
    qualifier = "strictly exceeds" if params.is_critical else "reaches or exceeds"
    return Classification(
        Verdict.NONEXISTENCE_ALL_F,
        f"(Q-2+alpha-)*p {qualifier} Q+a+alpha-: no weak solution exists for "
        "any boundary datum with positive weighted surface integral",
        thr.value,
        thr.kind,
    )


def critical_exponent(ctx: GroupContext, lam: float, a: float) -> ThresholdInfo:
    """The threshold where the classifier verdict flips, when one exists."""
    probe = ProblemParams(ctx, lam, a, p=2.0)
    al = alphas(probe)
    L = ctx.Q - 2.0 + al.alpha_minus
    if lam == 0.0:
        return ThresholdInfo("third", -2.0, "a")
    if L > 0.0 and a > -2.0:
        return ThresholdInfo("second", 1.0 + (a + 2.0) / L, "p")
    if L < 0.0 and a < -2.0:
        return ThresholdInfo("first", 1.0 + (a + 2.0) / L, "p")
    return ThresholdInfo(None, None, None)


# ---------------------------------------------------------------------------
# boundary data and the nonexistence probe
# ---------------------------------------------------------------------------

def l1plus_test(f_boundary, nodes: int, ctx: GroupContext) -> tuple[float, bool]:
    """Weighted boundary functional int f * psi/|grad rho| dH and its sign.

    Membership in the positive class requires a strictly positive value; the
    decision threshold is 1e-10 times the absolute-mass scale of the
    integrand, so odd integrands land on the 'not a member' side.
    """

    def weighted(x, y, phi):
        gx, gy, gphi = knorm_grad_of(x, y, phi)
        gnorm = np.sqrt((gx * gx).sum(axis=-1) + (gy * gy).sum(axis=-1) + gphi * gphi)
        return np.asarray(f_boundary(x, y, phi)) * psi_of(x, y, phi) / gnorm

    def absolute(x, y, phi):
        return np.abs(weighted(x, y, phi))

    value = surface_integral(weighted, nodes, ctx).value
    scale = surface_integral(absolute, max(8, nodes // 2), ctx).value
    return value, value > 1e-10 * max(scale, 1e-300)


def liminf_probe(
    V_radial: Callable[[float], float],
    params: ProblemParams,
    R_list,
) -> list[tuple[float, float]]:
    """R^{2p/(p-1)} * int_{1/(2R) < |xi| < 1/R} V^{-1/(p-1)} K psi dxi.

    The nonexistence criterion demands liminf = 0 along R -> infinity; for
    power weights the sequence follows R^{(a+2p)/(p-1) - Q - alpha-} up to
    slowly-varying factors.
    """
    m = 1.0 / (params.p - 1.0)
    profile = k_profile(params)

    def F(rho: float) -> float:
        return V_radial(rho) ** (-m) * value_of(profile(rho))

    out = []
    for R in R_list:
        if not R > 1.0:
            raise ValueError(f"probe scale must exceed 1, got {R}")
        q = radial_integral(F, Annulus(0.5 / R, 1.0 / R), params.ctx)
        out.append((float(R), float(R ** (2.0 * params.p / (params.p - 1.0)) * q.value)))
    return out
