import math

import numpy as np
from pytest import approx, mark, raises

from koranyi.hgroup import knorm_of, psi_of
from koranyi.hquad import (
    Annulus,
    c_n,
    mc_annulus,
    radial_integral,
    sphere_rule,
    surface_integral,
)


def closed_form(ctx, s, ann):
    """Antiderivative of C_N rho^{Q-1+s} over the annulus."""
    expo = ctx.Q + s
    if expo == 0.0:
        return c_n(ctx) * math.log(ann.r_outer / ann.r_inner)
    return c_n(ctx) * (ann.r_outer**expo - ann.r_inner**expo) / expo


# ---------------------------------------------------------------------------
# the angular constant and the polar formula
# ---------------------------------------------------------------------------

def test_angular_constants(ctx1, ctx2):
    assert c_n(ctx1) == approx(4.0 * math.pi, rel=1e-12)
    assert c_n(ctx2) == approx(math.pi**3, rel=1e-12)


def test_ball_weight_integral_is_pi(ctx1):
    res = radial_integral(lambda r: 1.0, Annulus(0.0, 1.0), ctx1)
    assert res.value == approx(math.pi, rel=1e-10)
    assert res.method == "radial"


@mark.parametrize("s", [0.0, 2.0, -1.0, -3.5])
@mark.parametrize("inner", [0.0, 0.25])
def test_monomials_match_antiderivative(ctx1, s, inner):
    ann = Annulus(inner, 1.0)
    got = radial_integral(lambda r: r**s, ann, ctx1).value
    assert got == approx(closed_form(ctx1, s, ann), rel=1e-9)


def test_monomials_in_higher_layers(ctx2):
    ann = Annulus(0.0, 1.0)
    got = radial_integral(lambda r: r**2, ann, ctx2).value
    assert got == approx(closed_form(ctx2, 2.0, ann), rel=1e-9)


def test_wide_annulus_uses_log_substitution(ctx1):
    # inner/outer span many decades; the substituted path must still nail
    # the antiderivative
    ann = Annulus(1e-8, 1e-2)
    got = radial_integral(lambda r: r**-2.0, ann, ctx1).value
    assert got == approx(closed_form(ctx1, -2.0, ann), rel=1e-8)


def test_borderline_power_diverges(ctx1):
    with raises(RuntimeError):
        radial_integral(lambda r: r ** float(-ctx1.Q), Annulus(0.0, 1.0), ctx1)


@mark.parametrize("inner, outer", [(-0.1, 1.0), (1.0, 1.0), (2.0, 1.0)])
def test_annulus_validation(inner, outer):
    with raises(ValueError):
        Annulus(inner, outer)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def test_mc_matches_quadrature_within_band(ctx1):
    ann = Annulus(0.0, 1.0)
    qr = radial_integral(lambda r: r**2, ann, ctx1)
    mc = mc_annulus(
        lambda x, y, phi: psi_of(x, y, phi) * knorm_of(x, y, phi) ** 2,
        ann, samples=200_000, seed=42, ctx=ctx1,
    )
    assert abs(mc.value - qr.value) <= 3.0 * (mc.error_estimate + qr.error_estimate)
    assert mc.method == "montecarlo"


def test_mc_is_reproducible(ctx1):
    ann = Annulus(0.25, 1.0)
    f = lambda x, y, phi: psi_of(x, y, phi)
    a = mc_annulus(f, ann, samples=50_000, seed=7, ctx=ctx1)
    b = mc_annulus(f, ann, samples=50_000, seed=7, ctx=ctx1)
    c = mc_annulus(f, ann, samples=50_000, seed=8, ctx=ctx1)
    assert a.value == b.value and a.error_estimate == b.error_estimate
    assert a.value != c.value


def test_mc_rejects_tiny_sample_counts(ctx1):
    with raises(ValueError):
        mc_annulus(lambda x, y, phi: 1.0, Annulus(0.0, 1.0), samples=10, seed=0, ctx=ctx1)


# ---------------------------------------------------------------------------
# surface quadrature
# ---------------------------------------------------------------------------

@mark.parametrize("d, area", [(2, 2.0 * math.pi), (4, 2.0 * math.pi**2)])
def test_sphere_rule_total_weight(d, area):
    _, w = sphere_rule(d, 24)
    assert w.sum() == approx(area, rel=1e-12)


def test_sphere_rule_rejects_low_dimension():
    with raises(ValueError):
        sphere_rule(1, 8)


def coarea_weight(x, y, phi):
    # psi / |grad knorm| on the unit sphere; integrating it recovers the
    # angular constant, the surface counterpart of the polar formula
    ps = psi_of(x, y, phi)
    return ps / np.sqrt(ps**3 + (1.0 - ps**2) / 4.0)


def test_surface_coarea_identity(ctx1):
    res = surface_integral(coarea_weight, nodes=200, ctx=ctx1)
    assert res.value == approx(c_n(ctx1), rel=1e-12)
    assert res.method == "surface"


def test_surface_coarea_identity_higher_layers(ctx2):
    # node counts multiply fast in the omega sphere at N = 2; stay coarse
    res = surface_integral(coarea_weight, nodes=24, ctx=ctx2)
    assert res.value == approx(c_n(ctx2), rel=1e-12)


def test_surface_odd_function_cancels(ctx1):
    res = surface_integral(lambda x, y, phi: phi, nodes=100, ctx=ctx1)
    assert res.value == approx(0.0, abs=1e-12)
