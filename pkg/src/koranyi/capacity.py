"""Scaled cutoff test functions and the capacity functionals they generate.

Nonexistence arguments pair the evolution inequality against test functions

    phi(t, xi) = beta_T(t) * D_R(xi),

where beta_T(t) = theta^iota(t/T) is a smooth bump in time and D_R is K
multiplied by a spatial cutoff that removes the origin: either

    gamma_R = K * zeta^iota(R rho)            (annulus transition (1/(2R), 1/R))
    mu_R    = K * ell^iota(1 + ln rho/ln R)    (transition (1/R, R^{-1/2})),

with rho the gauge norm.  Pairing and Young's inequality leave two
functionals whose decay in T and R drives the contradiction:

    J1 = int phi^{-1/(p-1)} |d^k phi/dt^k|^{p/(p-1)} V^{-1/(p-1)} psi
    J2 = int phi^{-1/(p-1)} |-L phi + (lambda/rho^2) psi phi|^{p/(p-1)}
             V^{-1/(p-1)} psi^{-1/(p-1)}

Both factor into (1D time integral) x (radial space integral); K-harmonicity
confines the J2 space factor to the transition annulus.  The exponent laws
are measured empirically by least-squares fits over scale grids.

The power iota is large enough that every differentiated cutoff retains a
positive leftover power, so integrands extend by 0 where the cutoff
vanishes; evaluation guards enforce this instead of trusting rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .hcalc import HyperDual, hd_exp, hd_log, value_of
from .hgroup import HPoint, knorm
from .hquad import Annulus, QuadResult, radial_integral
from .spectrum import ProblemParams, k_profile

_CUT_FLOOR = 1e-12  # below this the leftover cutoff power forces the integrand to 0

DEFAULT_SCALES: tuple[float, ...] = tuple(10.0 ** (1.0 + 0.5 * i) for i in range(7))


def bump(s):
    """C-infinity bump on (0,1), peak value 1 at s = 1/2; 0 outside."""
    sv = value_of(s)
    if sv <= 0.0 or sv >= 1.0:
        return 0.0
    return hd_exp(4.0 - 1.0 / (s * (1.0 - s)))


def smooth_step(t):
    """C-infinity nondecreasing step: 0 for t <= 0, 1 for t >= 1."""
    tv = value_of(t)
    if tv <= 0.0:
        return 0.0
    if tv >= 1.0:
        return 1.0
    lo = hd_exp(-1.0 / t)
    hi = hd_exp(-1.0 / (1.0 - t))
    return lo / (lo + hi)


def ramp_zeta(s):
    """0 on (-inf, 1/2], 1 on [1, inf): the annulus-type spatial transition."""
    return smooth_step(2.0 * s - 1.0)


def ramp_ell(s):
    """0 on (-inf, 0], 1 on [1/2, inf): the log-type spatial transition."""
    return smooth_step(2.0 * s)


def min_iota(k: int, p: float) -> int:
    """Smallest cutoff power keeping every differentiated-cutoff exponent
    positive: ceil(max(k,2) p/(p-1)) + 2."""
    return math.ceil(max(k, 2) * p / (p - 1.0)) + 2


@dataclass(frozen=True)
class CutoffFamily:
    """The three cutoff shapes and the common power iota."""

    theta: Callable = bump
    zeta: Callable = ramp_zeta
    ell: Callable = ramp_ell
    iota: int = 6


def default_family(params: ProblemParams, iota: Optional[int] = None) -> CutoffFamily:
    floor = min_iota(params.k, params.p)
    if iota is None:
        iota = floor
    elif iota < floor:
        raise ValueError(f"iota = {iota} is below the admissible minimum {floor}")
    return CutoffFamily(iota=iota)


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    r_squared: float
    points: tuple[tuple[float, float], ...]


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

def beta_t(t, T: float, fam: CutoffFamily):
    """Time bump theta^iota(t/T), supported in (0, T); accepts HyperDual t."""
    if not T > 0.0:
        raise ValueError(f"time scale must be positive, got {T}")
    b = fam.theta(t / T)
    return b ** fam.iota if isinstance(b, HyperDual) else float(b) ** fam.iota


def gamma_profile(R: float, params: ProblemParams, fam: CutoffFamily) -> Callable:
    """Radial profile of gamma_R: K(s) * zeta^iota(R s); HyperDual-ready."""
    _check_scale(R)
    K = k_profile(params)

    def profile(s):
        cut = fam.zeta(R * s)
        cv = value_of(cut)
        if cv < _CUT_FLOOR:
            return 0.0
        c = cut ** fam.iota if isinstance(cut, HyperDual) else float(cut) ** fam.iota
        return K(s) * c

    return profile


def mu_profile(R: float, params: ProblemParams, fam: CutoffFamily) -> Callable:
    """Radial profile of mu_R: K(s) * ell^iota(1 + ln s/ln R); HyperDual-ready."""
    _check_scale(R)
    lnR = math.log(R)
    K = k_profile(params)

    def profile(s):
        cut = fam.ell(1.0 + hd_log(s) / lnR)
        cv = value_of(cut)
        if cv < _CUT_FLOOR:
            return 0.0
        c = cut ** fam.iota if isinstance(cut, HyperDual) else float(cut) ** fam.iota
        return K(s) * c

    return profile


def gamma_r(xi: HPoint, R: float, params: ProblemParams, fam: CutoffFamily) -> float:
    """gamma_R at a point of the punctured closed unit ball."""
    return float(value_of(gamma_profile(R, params, fam)(knorm(xi))))


def mu_r(xi: HPoint, R: float, params: ProblemParams, fam: CutoffFamily) -> float:
    """mu_R at a point of the punctured closed unit ball."""
    return float(value_of(mu_profile(R, params, fam)(knorm(xi))))


def _check_scale(R: float) -> None:
    if not R > 1.0:
        raise ValueError(f"spatial scale must exceed 1, got {R}")


def _transition_zone(cutoff: str, R: float) -> Annulus:
    if cutoff == "gamma":
        return Annulus(0.5 / R, 1.0 / R)
    if cutoff == "mu":
        return Annulus(1.0 / R, R ** -0.5)
    raise ValueError(f"cutoff must be 'gamma' or 'mu', got {cutoff!r}")


def _support(cutoff: str, R: float) -> Annulus:
    lo = 0.5 / R if cutoff == "gamma" else 1.0 / R
    return Annulus(lo, 1.0)


def _spatial_profile(cutoff: str, R: float, params: ProblemParams, fam: CutoffFamily) -> Callable:
    maker = gamma_profile if cutoff == "gamma" else mu_profile
    _transition_zone(cutoff, R)  # validates the name
    return maker(R, params, fam)


# ---------------------------------------------------------------------------
# J1: the time-derivative functional
# ---------------------------------------------------------------------------

def beta_time_integral(T: float, fam: CutoffFamily) -> QuadResult:
    """int_0^T beta_T dt; always <= T since 0 <= beta_T <= 1."""
    val, err = quad(lambda t: beta_t(t, T, fam), 0.0, T, points=[0.5 * T], limit=200)
    return QuadResult(val, err, 0, "quad")


def j1_time_factor(T: float, params: ProblemParams, fam: CutoffFamily) -> QuadResult:
    """int_0^T |d^k beta_T/dt^k|^{p/(p-1)} beta_T^{-1/(p-1)} dt.

    Derivatives come from hyper-dual seeds, so the k-th derivative is exact;
    time orders above 2 would need deeper jets than the algebra carries.
    """
    if params.k > 2:
        raise ValueError("time orders above 2 are not supported by the cutoff machinery")
    pexp = params.p / (params.p - 1.0)
    mexp = 1.0 / (params.p - 1.0)

    def integrand(t: float) -> float:
        b = beta_t(HyperDual(t, 1.0, 1.0, 0.0), T, fam)
        if not isinstance(b, HyperDual) or b.value < _CUT_FLOOR:
            return 0.0
        der = b.d1 if params.k == 1 else b.d12
        return abs(der) ** pexp * b.value ** -mexp

    val, err = quad(integrand, 0.0, T, points=[0.5 * T], limit=200)
    return QuadResult(val, err, 0, "quad")


def j1_space_factor(
    cutoff: str, R: float, params: ProblemParams, fam: CutoffFamily
) -> QuadResult:
    """radial_integral of V^{-1/(p-1)} * D_R over the support of D_R."""
    profile = _spatial_profile(cutoff, R, params, fam)
    mexp = params.a / (params.p - 1.0)

    def F(s: float) -> float:
        return s ** -mexp * float(value_of(profile(s)))

    return radial_integral(F, _support(cutoff, R), params.ctx)


def j1(
    cutoff: str, T: float, R: float, params: ProblemParams, fam: CutoffFamily
) -> QuadResult:
    """The full time-derivative functional: time factor x space factor."""
    tf = j1_time_factor(T, params, fam)
    sf = j1_space_factor(cutoff, R, params, fam)
    return _product(tf, sf)


# ---------------------------------------------------------------------------
# J2: the elliptic functional
# ---------------------------------------------------------------------------

def j2_space_factor(
    cutoff: str, R: float, params: ProblemParams, fam: CutoffFamily
) -> QuadResult:
    """radial_integral of D^{-1/(p-1)} |E|^{p/(p-1)} V^{-1/(p-1)} over the
    transition annulus, where E = -D'' - (Q-1)D'/s + lambda D/s^2.

    Outside the annulus D coincides with 0 or with K, and E vanishes either
    way, so the restriction loses nothing.
    """
    profile = _spatial_profile(cutoff, R, params, fam)
    zone = _transition_zone(cutoff, R)
    p = params.p
    pexp = p / (p - 1.0)
    qm1 = params.Q - 1.0

    def F(s: float) -> float:
        d = profile(HyperDual(s, 1.0, 1.0, 0.0))
        if not isinstance(d, HyperDual):
            return 0.0
        elliptic = -d.d12 - qm1 * d.d1 / s + params.lam * d.value / (s * s)
        out = d.value ** (-1.0 / (p - 1.0)) * abs(elliptic) ** pexp * s ** (-params.a / (p - 1.0))
        if not math.isfinite(out):
            raise RuntimeError(f"nonfinite capacity integrand at rho = {s}")
        return out

    return radial_integral(F, zone, params.ctx)


def j2(
    cutoff: str, T: float, R: float, params: ProblemParams, fam: CutoffFamily
) -> QuadResult:
    """The full elliptic functional: int beta_T dt x space factor."""
    tf = beta_time_integral(T, fam)
    sf = j2_space_factor(cutoff, R, params, fam)
    return _product(tf, sf)


def _product(a: QuadResult, b: QuadResult) -> QuadResult:
    err = abs(a.value) * b.error_estimate + abs(b.value) * a.error_estimate
    return QuadResult(a.value * b.value, err, a.evaluations + b.evaluations, "product")


# ---------------------------------------------------------------------------
# eta and the scaling fits
# ---------------------------------------------------------------------------

def eta(
    R: float,
    params: ProblemParams,
    V_radial: Optional[Callable[[float], float]] = None,
) -> float:
    """int_{1/(2R) < rho <= 1} V^{-1/(p-1)} K psi dxi, the domination envelope
    of the J1 space factors.  Nondecreasing in R; V defaults to rho^a."""
    _check_scale(R)
    mexp = 1.0 / (params.p - 1.0)
    K = k_profile(params)
    if V_radial is None:
        V_radial = lambda s: s ** params.a

    def F(s: float) -> float:
        return V_radial(s) ** -mexp * float(value_of(K(s)))

    return float(radial_integral(F, Annulus(0.5 / R, 1.0), params.ctx).value)


def scaling_fit(values: Sequence[tuple[float, float]]) -> ScalingFit:
    """Least-squares line through (ln scale, ln value).

    Needs at least 4 points whose scales span a factor of 10, and strictly
    positive values; r_squared is 1.0 for degenerate (constant) data.
    """
    if len(values) < 4:
        raise ValueError(f"need at least 4 points for a scaling fit, got {len(values)}")
    scales = np.array([s for s, _ in values], dtype=float)
    vals = np.array([v for _, v in values], dtype=float)
    if (scales <= 0.0).any():
        raise ValueError("scales must be positive")
    if (vals <= 0.0).any():
        raise ValueError("cannot fit a power law through nonpositive values")
    if scales.max() / scales.min() < 10.0:
        raise ValueError("scales must span at least one decade")

    x = np.log(scales)
    y = np.log(vals)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float((resid**2).sum()) / ss_tot
    return ScalingFit(float(slope), float(intercept), r2, tuple(zip(x.tolist(), y.tolist())))
