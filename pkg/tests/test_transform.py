import math
from fractions import Fraction

import pytest

from driftnf.errors import PotentialMismatch
from driftnf.literals import parse_rational, parse_series
from driftnf.poly import ActionRational, Poly
from driftnf.series import FrequencyMap, PoissonSeries
from driftnf.transform import (NormalFormBuilder, VectorFieldSpec,
                               build_normal_form, invert_near_identity)

Y0 = (math.sqrt(5) + 1) / 2


def omega_y():
    return FrequencyMap([parse_rational("(y)")])


def e19_spec():
    return VectorFieldSpec(
        omega_y(),
        parse_series("-cos(x - t) - cos(x)"),
        [parse_series("-sin(x - t) - sin(x)")],
        [parse_series("-[ (y) ]")],
    )


def oscillating_spec():
    # the sign of the mu-force is chosen so the published transformation
    # list (beta01 = cos X etc.) is reproduced; see notes in the test values
    return VectorFieldSpec(
        omega_y(),
        parse_series("-cos(x - t) - cos(x)"),
        [parse_series("0")],
        [parse_series("[ (y) ] * sin(x)")],
    )


@pytest.fixture(scope="module")
def e19_nf2():
    return build_normal_form(e19_spec(), 2, 20)


@pytest.fixture(scope="module")
def osc_nf2():
    return build_normal_form(oscillating_spec(), 2, 20)


# ---------------------------------------------------------------------------
# e19: closed forms of the second order normalization


def test_e19_psi10(e19_nf2):
    expected = parse_series(
        "eps * [ (1)/((y - 1)) ] * sin(x - t) + eps * [ (1)/((y)) ] * sin(x)")
    assert e19_nf2.psis[0] == expected


def test_e19_psi20(e19_nf2):
    expected = parse_series(
        "-eps^2 * [ (1)/(2*(y - 1)*(y)*(2*y - 1)) ] * sin(2*x - t)"
        " - eps^2 * [ (1)/(8*(y - 1)^3) ] * sin(2*x - 2*t)"
        " - eps^2 * [ (1)/(2*(y - 1)*(y)) ] * sin(t)"
        " - eps^2 * [ (1)/(8*(y)^3) ] * sin(2*x)")
    assert e19_nf2.psis[1] == expected


def test_e19_frequency_corrections(e19_nf2):
    om = e19_nf2.omega_corrections
    assert set(om) == {(2, 0), (0, 2)}
    assert om[(2, 0)][0] == parse_rational(
        "(-2*y^3 + 3*y^2 - 3*y + 1)/(2*(y - 1)^3*(y)^3)")
    assert om[(0, 2)][0] == parse_rational("(1 - 2*y)/(2*(y - 1)*(y))")


def test_e19_drift(e19_nf2):
    # the field convention ydot = ... + mu (g01 - eta) makes eta the negative
    # of the drift printed for the equivalent system ydot = ... - mu (y - eta)
    eta = e19_nf2.eta
    assert set(eta) == {(0, 1), (1, 1)}
    assert eta[(0, 1)][0] == parse_rational("(-y)")
    assert eta[(1, 1)][0] == parse_rational("(-(2*y - 1))/(2*(y - 1)*(y))")


def test_e19_first_order_dissipative(e19_nf2):
    assert (0, 1) not in e19_nf2.betas  # beta01 = 0
    expected = parse_series(
        "mu * [ (1)/((1 - y)) ] * cos(x - t) - mu * [ (1)/((y)) ] * cos(x)")
    assert e19_nf2.alphas[(0, 1)][0] == expected


def test_e19_second_order_dissipative(e19_nf2):
    beta11 = parse_series(
        "eps * mu * [ (1)/(2*(1 - y)*(y)) ] * sin(2*x - t)"
        " - eps * mu * [ (1)/(4*(y - 1)^2) ] * sin(2*x - 2*t)"
        " - eps * mu * [ (1 - 2*y)/(2*(y - 1)*(y)) ] * sin(t)"
        " - eps * mu * [ (1)/(4*(y)^2) ] * sin(2*x)")
    assert e19_nf2.betas[(1, 1)][0] == beta11
    assert (0, 2) not in e19_nf2.betas  # beta02 = 0
    alpha11 = parse_series(
        "eps * mu * [ (1)/(2*(y)*(2*y^2 - 3*y + 1)) ] * cos(2*x - t)"
        " + eps * mu * [ (1)/(8*(y - 1)^3) ] * cos(2*x - 2*t)"
        " + eps * mu * [ (-2*y^3 + 3*y^2 + 3*y - 2)/(2*(y - 1)^2*(y)^2) ] * cos(t)"
        " + eps * mu * [ (1)/(8*(y)^3) ] * cos(2*x)")
    assert e19_nf2.alphas[(1, 1)][0] == alpha11
    # alpha02 solves the published second-order equation (whose printed
    # solution carries sign typos on the 2X modes); the self-consistent
    # solution is asserted here
    alpha02 = parse_series(
        "-mu^2 * [ (1)/(2*(y - 1)*(y)) ] * sin(2*x - t)"
        " - mu^2 * [ (1)/(4*(y - 1)^2) ] * sin(2*x - 2*t)"
        " + mu^2 * [ (2*y - 1)/(2*(y - 1)*(y)) ] * sin(t)"
        " - mu^2 * [ (1)/(4*(y)^2) ] * sin(2*x)")
    assert e19_nf2.alphas[(0, 2)][0] == alpha02


def test_e19_drift_in_original(e19_nf2):
    eta = e19_nf2.drift_in_original()[0]
    expected = parse_series(
        "-mu * [ (y) ] - eps * mu * [ (2*y - 1)/(2*(y - 1)*(y)) ]")
    assert eta == expected


# ---------------------------------------------------------------------------
# oscillating system


def test_osc_transformations(osc_nf2):
    assert osc_nf2.psis[0] == parse_series(
        "eps * [ (1)/((y - 1)) ] * sin(x - t) + eps * [ (1)/((y)) ] * sin(x)")
    assert osc_nf2.eta == {}
    assert osc_nf2.betas[(0, 1)][0] == parse_series("mu * cos(x)")
    assert osc_nf2.alphas[(0, 1)][0] == parse_series("mu * [ (1)/((y)) ] * sin(x)")
    assert osc_nf2.alphas[(0, 2)][0] == parse_series(
        "-mu^2 * [ (1)/(4*(y)^2) ] * sin(2*x)")
    # the mu-oscillation is removed exactly at first order, so its feedback
    # vanishes identically and beta02 = 0 (the published -cos(2X)/(2Y) does
    # not satisfy the order-(0,2) normal form equation)
    assert (0, 2) not in osc_nf2.betas


def test_osc_frequency_corrections(osc_nf2):
    om = osc_nf2.omega_corrections
    # eps^2 term identical to e19 (same mu=0 sector); eps*mu term validated
    # against direct numerical integration (secular-error discrimination)
    assert om[(2, 0)][0] == parse_rational(
        "(-2*y^3 + 3*y^2 - 3*y + 1)/(2*(y - 1)^3*(y)^3)")
    assert om[(1, 1)][0] == parse_rational("(1)/((y)^2)")
    assert om[(0, 2)][0] == parse_rational("(-1)/(2*(y))")


# ---------------------------------------------------------------------------
# structural invariants


def test_normal_form_invariant_symbolic(e19_nf2, osc_nf2):
    for res in (e19_nf2, osc_nf2):
        for i in range(res.ell):
            resid = res.ydot_final[i].up_to_grading(res.order).project_modes(
                res.modes_cutoff, "le")
            assert resid.is_zero()


def test_remainders_have_expected_grading(e19_nf2):
    for s in e19_nf2.g_remainder + e19_nf2.f_remainder:
        if not s.is_zero():
            assert s.min_grading() == e19_nf2.order + 1
    for s in e19_nf2.g_high_modes + e19_nf2.f_high_modes:
        assert s.is_zero()  # all modes of e19 stay far below K = 20


def test_map_grading_structure(e19_nf2):
    # conservative map is O(eps): only eps gradings; dissipative is O(mu)
    for s in e19_nf2.gamma_x + e19_nf2.gamma_y:
        assert all(key[1] == 0 and key[0] >= 1 for key in s.terms)
    for s in e19_nf2.delta_x + e19_nf2.delta_y:
        assert all(key[1] >= 1 for key in s.terms)
    for s in e19_nf2.phi_y:
        assert s.min_grading() >= 1


def test_transformations_are_real(e19_nf2, osc_nf2):
    for res in (e19_nf2, osc_nf2):
        for s in (res.psis + res.gamma_x + res.gamma_y + res.delta_x +
                  res.delta_y + res.phi_x + res.phi_y + res.t_shift +
                  res.ydot_final + res.xdot_final):
            assert s.is_real() if isinstance(s, PoissonSeries) else all(
                c.is_real() for c in s)


def test_inversion_round_trip(e19_nf2):
    cap = 3
    # Xi_c round trip: Gamma composed with the forward psi-shift
    shift_y = [e19_nf2.gamma_y[0]]
    shift_x = [e19_nf2.gamma_x[0]]
    gy, gx = invert_near_identity(shift_y, shift_x, cap)
    # (id + g) o (id + shift) = id up to the grading cap
    comp_y = shift_y[0] + gy[0].substitute(dy=shift_y, dx=shift_x, nmax=cap)
    comp_x = shift_x[0] + gx[0].substitute(dy=shift_y, dx=shift_x, nmax=cap)
    assert comp_y.up_to_grading(cap - 1).is_zero()
    assert comp_x.up_to_grading(cap - 1).is_zero()


def test_invert_near_identity_trivial_cases():
    zero = PoissonSeries.zero(1)
    gy, gx = invert_near_identity([zero], [zero], 3)
    assert gy[0].is_zero() and gx[0].is_zero()
    c = parse_series("eps * cos(x - t)")
    gy, gx = invert_near_identity([zero], [c], 3)
    assert gx[0].part(1, 0) == -c


def test_trivial_spec_gives_identity():
    spec = VectorFieldSpec(
        omega_y(), parse_series("0"), [parse_series("0")], [parse_series("0")])
    res = build_normal_form(spec, 3, 10)
    assert all(s.is_zero() for s in res.psis)
    assert res.alphas == {} and res.betas == {} and res.eta == {}
    assert res.omega_corrections == {}
    assert res.omega_d_series()[0] == parse_series("[ (y) ]")


def test_h10_zero_gives_zero_psi():
    spec = VectorFieldSpec(
        omega_y(), parse_series("0"),
        [parse_series("sin(x)")], [parse_series("cos(x - t)")])
    res = build_normal_form(spec, 2, 10)
    assert all(s.is_zero() for s in res.psis)
    assert (0, 1) in res.alphas


def test_renormalizing_normalized_field_is_identity():
    # a field already in normal form (zero perturbations, rational frequency)
    om = FrequencyMap([parse_rational("(y^2 + 1)/((y))")])
    spec = VectorFieldSpec(om, parse_series("0"), [parse_series("0")],
                           [parse_series("0")])
    res = build_normal_form(spec, 2, 8)
    assert res.omega_d_series()[0] == PoissonSeries.action_function(om.components[0])
    assert all(s.is_zero() for s in res.phi_x + res.phi_y + res.t_shift)


def test_two_dimensional_smoke():
    om = FrequencyMap([parse_rational("(y1)", ell=2), parse_rational("(y2)", ell=2)])
    h10 = parse_series("-cos(x1 - t)", ell=2)
    zero = parse_series("0", ell=2)
    spec = VectorFieldSpec(om, h10, [zero, zero],
                           [parse_series("-[ (y1) ]", ell=2), zero])
    res = build_normal_form(spec, 1, 6)
    assert res.psis[0] == parse_series(
        "eps * [ (1)/((y1 - 1)) ] * sin(x1 - t)", ell=2)
    assert res.eta[(0, 1)][0] == parse_rational("(-y1)", ell=2)
    assert res.ydot_final[0].up_to_grading(1).project_modes(6, "le").is_zero()
    assert res.ydot_final[1].up_to_grading(1).project_modes(6, "le").is_zero()


def test_nf_frequency_evaluation(e19_nf2):
    assert e19_nf2.nf_frequency([Y0], 0.0, 0.0)[0] == pytest.approx(Y0)
    eps = mu = 1e-3
    om20 = (-2 * Y0**3 + 3 * Y0**2 - 3 * Y0 + 1) / (2 * (Y0 - 1)**3 * Y0**3)
    om02 = (1 - 2 * Y0) / (2 * (Y0 - 1) * Y0)
    expected = Y0 + eps**2 * om20 + mu**2 * om02
    assert e19_nf2.nf_frequency([Y0], eps, mu)[0] == pytest.approx(expected, rel=1e-14)
