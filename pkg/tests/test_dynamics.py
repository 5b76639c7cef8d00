import math

import numpy as np
import pytest

from driftnf.dynamics import (AnalyticSolution, State, Trajectory,
                              back_transform, compile_field, compile_series_1d,
                              drift_measure, energy_track, err_metric,
                              error_curve, nf_flow, rk4, rk4_fast)
from driftnf.errors import PoleEncountered
from driftnf.literals import parse_rational, parse_series
from driftnf.series import FrequencyMap
from driftnf.transform import VectorFieldSpec, build_normal_form

Y0 = (math.sqrt(5) + 1) / 2


def e19_spec():
    return VectorFieldSpec(
        FrequencyMap([parse_rational("(y)")]),
        parse_series("-cos(x - t) - cos(x)"),
        [parse_series("-sin(x - t) - sin(x)")],
        [parse_series("-[ (y) ]")])


@pytest.fixture(scope="module")
def e19_nf2():
    return build_normal_form(e19_spec(), 2, 20)


def test_rk4_exponential_convergence_order():
    # dx/dt = 1, dy/dt = -y has y(T) = y0 exp(-T)
    rhs = lambda t, x, y: (1.0, -y)
    T = 2.0
    errs = []
    for dt in (0.1, 0.05):
        traj = rk4(rhs, State([0.0], [1.0], 0.0), dt, T, stride=1)
        errs.append(abs(traj.ys[-1, 0] - math.exp(-T)))
    ratio = errs[0] / errs[1]
    assert ratio == pytest.approx(16.0, rel=0.2)


def test_rk4_integrable_limit():
    spec = e19_spec()
    rhs = compile_field(spec, None, 0.0, 0.0)
    traj = rk4(rhs, State([0.25], [Y0], 0.0), 1e-2, 100.0, stride=10)
    assert drift_measure(traj) < 1e-12
    assert traj.xs[-1, 0] == pytest.approx(0.25 + Y0 * 100.0, abs=1e-9)


def test_rk4_fast_matches_reference():
    spec = e19_spec()
    eps = mu = 1e-3
    rhs = compile_field(spec, None, eps, mu)
    a = rk4(rhs, State([0.1], [Y0], 0.0), 1e-2, 50.0, stride=7)
    b = rk4_fast(spec, None, eps, mu, State([0.1], [Y0], 0.0), 1e-2, 50.0, stride=7)
    assert np.max(np.abs(a.xs - b.xs)) == 0.0
    assert np.max(np.abs(a.ys - b.ys)) == 0.0


def test_trajectory_requires_increasing_times():
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), np.zeros((2, 1)), np.zeros((2, 1)))


def test_err_metric_formula():
    s = State([1.0], [0.0], 0.0)
    z = State([0.0], [0.0], 0.0)
    assert err_metric(s, z) == pytest.approx(0.5)
    assert err_metric(s, s) == 0.0
    assert err_metric(z, z) == 0.0  # all-zero convention


def test_nf_flow_is_linear(e19_nf2):
    eps = mu = 1e-3
    s0 = nf_flow(e19_nf2, Y0, 0.25, 0.0, eps, mu)
    assert s0.x[0] == pytest.approx(0.25) and s0.y[0] == pytest.approx(Y0)
    om = e19_nf2.nf_frequency([Y0], eps, mu)[0]
    T = 1e4 * math.pi
    sT = nf_flow(e19_nf2, Y0, 0.25, T, eps, mu)
    assert sT.y[0] == Y0
    assert sT.x[0] - 0.25 == pytest.approx(om * T, rel=1e-14)


def test_back_transform_identity_at_zero_parameters(e19_nf2):
    s = back_transform(e19_nf2, State([0.7], [Y0], 3.0), 0.0, 0.0)
    assert s.x[0] == pytest.approx(0.7) and s.y[0] == pytest.approx(Y0)


def test_forward_backward_roundtrip(e19_nf2):
    eps = mu = 1e-3
    lam = max(eps, mu)
    t_shift = compile_series_1d(e19_nf2.t_shift[0], eps, mu)
    x_shift = compile_series_1d(e19_nf2.x_fwd_shift[0], eps, mu)
    for x0, t in [(0.0, 0.0), (1.3, 2.0), (4.0, 7.5)]:
        Yv = Y0 + t_shift(Y0, x0, t)
        Xv = x0 + x_shift(Y0, x0, t)
        back = back_transform(e19_nf2, State([Xv], [Yv], t), eps, mu)
        assert abs(back.x[0] - x0) < 50 * lam ** (e19_nf2.order + 1)
        assert abs(back.y[0] - Y0) < 50 * lam ** (e19_nf2.order + 1)


def test_analytic_solution_tracks_integration(e19_nf2):
    eps = mu = 1e-3
    spec = e19_spec()
    sol = AnalyticSolution(e19_nf2, Y0, 0.0, eps, mu, initial_in="normal")
    s0 = sol.state(0.0)
    traj = rk4_fast(spec, e19_nf2.eta, eps, mu, State(s0.x, s0.y, 0.0),
                    1e-2, 200 * math.pi, stride=100)
    errs = error_curve(traj, sol)
    assert errs.max() < 1e-7


def test_energy_conserved_without_dissipation():
    # with the extended-phase-space action included, H is an exact first
    # integral of the mu = 0 flow (up to RK4 truncation error)
    spec = e19_spec()
    eps = 1e-3
    traj = rk4_fast(spec, None, eps, 0.0, State([0.0], [Y0], 0.0),
                    1e-2, 200.0, stride=1, track_energy=True)
    rep = energy_track(traj, spec, None, eps, 0.0)
    assert np.max(np.abs(rep.energies - rep.energies[0])) < 1e-12
    assert abs(rep.secular_slope) < 1e-14


def test_energy_rate_matches_finite_difference():
    # oscillating field: dH/dt = mu y^2 sin x along the flow
    spec = VectorFieldSpec(
        FrequencyMap([parse_rational("(y)")]),
        parse_series("-cos(x - t) - cos(x)"),
        [parse_series("0")], [parse_series("[ (y) ] * sin(x)")])
    eps = mu = 1e-3
    traj = rk4_fast(spec, None, eps, mu, State([0.3], [Y0], 0.0),
                    1e-2, 50.0, stride=1, track_energy=True)
    rep = energy_track(traj, spec, None, eps, mu)
    rate_scale = mu * Y0 ** 2
    assert rep.dHdt_max_err / rate_scale < 1e-4


def test_pole_guard():
    f = compile_series_1d(parse_series("[ (1)/((y)) ] * cos(x)"), 1.0, 1.0)
    with pytest.raises(PoleEncountered):
        f(1e-12, 0.0, 0.0)


def test_drift_measure_linear_trajectory():
    times = np.linspace(0.0, 10.0, 11)
    ys = (0.5 + 0.01 * times)[:, None]
    traj = Trajectory(times, np.zeros_like(ys), ys)
    assert drift_measure(traj) == pytest.approx(0.1)
