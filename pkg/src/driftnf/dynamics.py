"""Numerical validation: fixed-step RK4 integration of the original field,
analytic flow of the normal form, back-transformation to original variables,
the relative-error metric, energy tracking and action-drift measurement.

Angles are kept unwrapped throughout: the error metric divides by raw
magnitudes and would be discontinuous on wrapped angles.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PoleEncountered
from .series import PoissonSeries

__all__ = [
    "State", "Trajectory", "compile_field", "compile_series_1d", "rk4",
    "rk4_fast", "make_rk4_kernel", "drift_measure", "AnalyticSolution",
    "nf_flow", "back_transform", "err_metric", "error_curve", "energy_track",
    "EnergyReport",
]

POLE_GUARD = 1e-8


@dataclass
class State:
    x: np.ndarray
    y: np.ndarray
    t: float

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float))
        self.y = np.atleast_1d(np.asarray(self.y, dtype=float))


@dataclass
class Trajectory:
    times: np.ndarray
    xs: np.ndarray          # shape (n, ell)
    ys: np.ndarray
    energies: np.ndarray | None = None
    t_action: np.ndarray | None = None   # extended-phase-space action samples

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def state(self, i):
        return State(self.xs[i], self.ys[i], float(self.times[i]))

    def __len__(self):
        return len(self.times)


# ---------------------------------------------------------------------------
# compiling series to fast numeric callables


def _compile_coeff(ar):
    """Rational coefficient -> (numpoly, [(denpoly, power)]) complex arrays."""
    deg = max((e[0] for e in ar.num.terms), default=0)
    num = np.zeros(deg + 1, dtype=complex)
    for expo, c in ar.num.terms.items():
        num[deg - expo[0]] = complex(c)
    dens = []
    for f, k in ar.den.items():
        d = f.degree()
        arr = np.zeros(d + 1, dtype=complex)
        for expo, c in f.terms.items():
            arr[d - expo[0]] = complex(c)
        dens.append((arr, k))
    return num, dens


def compile_series_1d(series, eps, mu):
    """Compile an ell=1 real series into a callable f(y, x, t) -> float.

    Conjugate mode pairs are folded into cosine/sine amplitudes, so each
    pair costs one trig evaluation per step.  Raises PoleEncountered when a
    denominator drops below the pole guard during evaluation.
    """
    if series.ell != 1:
        raise NotImplementedError("compiled evaluation is for ell = 1")
    groups = []
    seen = set()
    for key in series.terms:
        if key in seen:
            continue
        j, p, k, m = key
        c = series.terms[key]
        scale = (eps ** j) * (mu ** p)
        if not any(k) and m == 0:
            groups.append((0, 0, scale, _compile_coeff(c), None))
            seen.add(key)
            continue
        neg = (j, p, tuple(-a for a in k), -m)
        phase = list(k) + [m]
        if next(v for v in phase if v) < 0:
            continue
        seen.add(key)
        seen.add(neg)
        groups.append((k[0], m, 2 * scale, _compile_coeff(c), "pair"))

    def coeff_val(compiled, y):
        num, dens = compiled
        v = num[0]
        for a in num[1:]:
            v = v * y + a
        for arr, kpow in dens:
            d = arr[0]
            for a in arr[1:]:
                d = d * y + a
            if abs(d) < POLE_GUARD:
                raise PoleEncountered(f"denominator ~ 0 at y = {y}")
            v /= d ** kpow
        return v

    def f(y, x, t):
        tot = 0.0
        for k, m, scale, compiled, kind in groups:
            c = coeff_val(compiled, y)
            if kind is None:
                tot += scale * c.real
            else:
                th = k * x + m * t
                tot += scale * (c.real * math.cos(th) - c.imag * math.sin(th))
        return tot

    return f


def compile_field(spec, eta, eps, mu):
    """Numeric right-hand side of the vector field (ell = 1).

    ``eta`` is a drift series per component (action-only, graded) or None.
    """
    eta_map = {}
    if eta is not None:
        for (j, p), comps in eta.items():
            eta_map[(j, p)] = comps
    fx, fy = spec.field(eta=eta_map or None)
    fx1 = compile_series_1d(fx[0], eps, mu)
    fy1 = compile_series_1d(fy[0], eps, mu)

    def rhs(t, x, y):
        return fx1(y, x, t), fy1(y, x, t)

    return rhs


# ---------------------------------------------------------------------------
# code generation: inline the field into a single RK4 loop (ell = 1)


def _series_to_expr(series, eps, mu, yvar="y", xvar="x", tvar="t"):
    """Python source expression for a real ell=1 series at numeric eps, mu."""
    bits = []
    seen = set()
    for key in sorted(series.terms, key=lambda k: (k[0] + k[1], k)):
        if key in seen:
            continue
        j, p, k, m = key
        c = series.terms[key]
        scale = (eps ** j) * (mu ** p)
        if not any(k) and m == 0:
            bits.append(f"({scale!r})*({_rational_to_expr(c, yvar)})")
            seen.add(key)
            continue
        neg = (j, p, tuple(-a for a in k), -m)
        phase = list(k) + [m]
        if next(v for v in phase if v) < 0:
            continue
        seen.add(key)
        seen.add(neg)
        th_bits = []
        if k[0]:
            th_bits.append(f"{k[0]}*{xvar}" if k[0] != 1 else xvar)
        if m:
            th_bits.append(f"+({m})*{tvar}" if th_bits else f"({m})*{tvar}")
        th = "".join(th_bits)
        # conjugate pair folds to A(y) cos(th) + B(y) sin(th) with
        # A = c + conj(c), B = i (c - conj(c)); both real rationals
        from .poly import GR_I
        acoef = _rational_to_expr(c + c.conj(), yvar)
        bcoef = _rational_to_expr((c - c.conj()) * GR_I, yvar)
        bits.append(f"({scale!r})*(({acoef})*cos({th}) + ({bcoef})*sin({th}))")
    return " + ".join(bits) if bits else "0.0"


def _rational_to_expr(ar, yvar):
    """Real rational function of one variable as Python source (Horner)."""
    def poly_expr(terms, deg):
        coeffs = [0.0] * (deg + 1)
        for expo, c in terms.items():
            cc = complex(c)
            if abs(cc.imag) > 0:
                raise ValueError("nonreal coefficient in compiled expression")
            coeffs[expo[0]] = cc.real
        expr = repr(coeffs[deg])
        for d in range(deg - 1, -1, -1):
            expr = f"({expr})*{yvar}+{coeffs[d]!r}"
        return expr
    ndeg = max((e[0] for e in ar.num.terms), default=0)
    out = f"({poly_expr(ar.num.terms, ndeg)})"
    for f, k in ar.den.items():
        ddeg = f.degree()
        dexpr = f"({poly_expr(f.terms, ddeg)})"
        out += f"/{dexpr}" * k
    return out


def make_rk4_kernel(spec, eta, eps, mu, track_energy=False):
    """Generate a specialised RK4 stepping function for an ell=1 field.

    Returns run(x0, y0, t0, dt, nsteps, stride) -> (times, xs, ys[, Ts]).
    With ``track_energy`` the extended-phase-space action T with
    dT/dt = -eps dh10/dt is integrated alongside, so that the conserved-or-
    oscillating energy y^2/2 + eps h10 + T can be reconstructed exactly.
    """
    eta_map = dict(eta) if eta else None
    fx, fy = spec.field(eta=eta_map)
    xexpr = _series_to_expr(fx[0], eps, mu)
    yexpr = _series_to_expr(fy[0], eps, mu)
    wexpr = None
    if track_energy:
        wexpr = _series_to_expr((-spec.h10.diff("t")).shift_grading(1, 0), eps, mu)

    import re as _re

    def stage(exprs, xs, ys, ts):
        mapping = {"x": xs, "y": ys, "t": ts}
        sub = lambda e: _re.sub(r"\b([xyt])\b", lambda m: mapping[m.group(1)], e)
        return [sub(e) for e in exprs]

    exprs = [xexpr, yexpr] + ([wexpr] if track_energy else [])
    names = ["x", "y"] + (["w"] if track_energy else [])
    src_lines = [
        f"def _run(x, y, w, t0, dt, nsteps, stride, times, xs, ys, ws):",
        "    from math import sin, cos",
        "    half = dt*0.5; sixth = dt/6.0",
        "    t = t0",
        "    idx = 0",
        "    for step in range(1, nsteps+1):",
    ]
    stages = []
    stages.append(stage(exprs, "x", "y", "t"))
    stages.append(stage(exprs, "(x+half*k1x)", "(y+half*k1y)", "(t+half)"))
    stages.append(stage(exprs, "(x+half*k2x)", "(y+half*k2y)", "(t+half)"))
    stages.append(stage(exprs, "(x+dt*k3x)", "(y+dt*k3y)", "(t+dt)"))
    for si, st in enumerate(stages, start=1):
        for name, e in zip(names, st):
            src_lines.append(f"        k{si}{name} = {e}")
    for name in names:
        src_lines.append(
            f"        {name} += sixth*(k1{name} + 2.0*(k2{name}+k3{name}) + k4{name})")
    src_lines.extend([
        "        t = t0 + step*dt",
        "        if step % stride == 0 or step == nsteps:",
        "            idx += 1",
        "            times[idx] = t; xs[idx] = x; ys[idx] = y",
    ])
    if track_energy:
        src_lines.append("            ws[idx] = w")
    src_lines.append("    return idx")
    ns = {}
    exec("\n".join(src_lines), ns)
    runner = ns["_run"]

    def run(x0, y0, t0, dt, nsteps, stride):
        nsamp = nsteps // stride + 2
        times = np.empty(nsamp)
        xs = np.empty(nsamp)
        ys = np.empty(nsamp)
        ws = np.empty(nsamp) if track_energy else np.empty(1)
        times[0] = t0
        xs[0] = x0
        ys[0] = y0
        ws[0] = 0.0
        last = runner(x0, y0, 0.0, t0, dt, nsteps, stride, times, xs, ys, ws)
        if track_energy:
            return times[:last + 1], xs[:last + 1], ys[:last + 1], ws[:last + 1]
        return times[:last + 1], xs[:last + 1], ys[:last + 1], None

    return run


def rk4_fast(spec, eta, eps, mu, state0, dt, T, stride=100, track_energy=False):
    """RK4 via the generated kernel."""
    run = make_rk4_kernel(spec, eta, eps, mu, track_energy=track_energy)
    nsteps = int(round(T / dt))
    times, xs, ys, ws = run(float(state0.x[0]), float(state0.y[0]),
                            float(state0.t), dt, nsteps, stride)
    if np.any(~np.isfinite(xs)) or np.any(~np.isfinite(ys)):
        raise PoleEncountered("integration produced non-finite values")
    return Trajectory(times, xs[:, None], ys[:, None],
                      t_action=ws if track_energy else None)


# ---------------------------------------------------------------------------
# integrator


def rk4(rhs, state0, dt, T, stride=100, energy=None):
    """Classical fixed-step RK4, ell = 1; deterministic and allocation-free
    in the inner loop.  Samples every ``stride`` steps (plus the endpoint).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    nsteps = int(round(T / dt))
    x = float(state0.x[0])
    y = float(state0.y[0])
    t = float(state0.t)
    times = [t]
    xs = [x]
    ys = [y]
    ens = [energy(t, x, y)] if energy else None
    half = dt / 2.0
    sixth = dt / 6.0
    for step in range(1, nsteps + 1):
        k1x, k1y = rhs(t, x, y)
        k2x, k2y = rhs(t + half, x + half * k1x, y + half * k1y)
        k3x, k3y = rhs(t + half, x + half * k2x, y + half * k2y)
        k4x, k4y = rhs(t + dt, x + dt * k3x, y + dt * k3y)
        x += sixth * (k1x + 2.0 * (k2x + k3x) + k4x)
        y += sixth * (k1y + 2.0 * (k2y + k3y) + k4y)
        t = state0.t + step * dt
        if step % stride == 0 or step == nsteps:
            times.append(t)
            xs.append(x)
            ys.append(y)
            if ens is not None:
                ens.append(energy(t, x, y))
    return Trajectory(np.array(times), np.array(xs)[:, None], np.array(ys)[:, None],
                      np.array(ens) if ens is not None else None)


def drift_measure(traj):
    """Maximum action deviation from the initial value along the samples."""
    return float(np.max(np.abs(traj.ys - traj.ys[0])))


# ---------------------------------------------------------------------------
# the analytic (normal form) solution


class AnalyticSolution:
    """Linear normal-form flow plus exact back-transformation.

    Given a NormalFormResult and an initial condition in original variables,
    maps it forward once, flows (X, Y) linearly, and evaluates the composed
    back-transform at sample times.  Coefficients are frozen at Y = Y0 since
    Y is constant along the normal-form flow.
    """

    def __init__(self, result, y0, x0, eps, mu, initial_in="original"):
        if result.ell != 1:
            raise NotImplementedError("analytic solution is for ell = 1")
        self.result = result
        self.eps = eps
        self.mu = mu
        if initial_in == "original":
            t_shift = compile_series_1d(result.t_shift[0], eps, mu)
            x_shift = compile_series_1d(result.x_fwd_shift[0], eps, mu)
            self.Y0 = y0 + t_shift(y0, x0, 0.0)
            self.X0 = x0 + x_shift(y0, x0, 0.0)
        elif initial_in == "normal":
            self.Y0 = y0
            self.X0 = x0
        else:
            raise ValueError("initial_in must be 'original' or 'normal'")
        self.omega = float(result.nf_frequency([self.Y0], eps, mu)[0])
        self._phi_x = self._freeze(result.phi_x[0])
        self._phi_y = self._freeze(result.phi_y[0])

    def _freeze(self, series):
        """Freeze coefficients at Y0: list of (amplitude, k, m) pairs."""
        terms = []
        for (j, p, k, m), c in series.terms.items():
            amp = c.eval(np.array([self.Y0 + 0j])) * (self.eps ** j) * (self.mu ** p)
            terms.append((amp, k[0], m))
        return terms

    def nf_state(self, t):
        """Normal-form variables at time t (linear flow)."""
        return self.X0 + self.omega * t, self.Y0

    def state(self, t):
        """Back-transformed state in original variables at time t."""
        X = self.X0 + self.omega * t
        x = X
        y = self.Y0
        for amp, k, m in self._phi_x:
            x += (amp * cmath.exp(1j * (k * X + m * t))).real
        for amp, k, m in self._phi_y:
            y += (amp * cmath.exp(1j * (k * X + m * t))).real
        return State(np.array([x]), np.array([y]), t)

    def states(self, times):
        """Vectorized back-transformed states: arrays (x(t), y(t))."""
        times = np.asarray(times, dtype=float)
        X = self.X0 + self.omega * times
        x = X.copy()
        y = np.full_like(times, self.Y0)
        for terms, target in ((self._phi_x, x), (self._phi_y, y)):
            if not terms:
                continue
            amps = np.array([a for a, _, _ in terms])
            ks = np.array([k for _, k, _ in terms])
            ms = np.array([m for _, _, m in terms])
            phases = np.outer(ks, X) + np.outer(ms, times)
            target += (amps[:, None] * np.exp(1j * phases)).real.sum(axis=0)
        return x, y


def nf_flow(result, Y0, X0, t, eps, mu):
    """Normal-form flow: X(t) = Omega_d(Y0) t + X0, Y(t) = Y0."""
    om = result.nf_frequency([Y0], eps, mu)[0]
    return State(np.array([X0 + om * t]), np.array([Y0]), t)


def back_transform(result, state, eps, mu):
    """Map a normal-form state to original variables via the Phi shifts."""
    X, Y, t = float(state.x[0]), float(state.y[0]), state.t
    x, y = X, Y
    for (j, p, k, m), c in result.phi_x[0].terms.items():
        x += ((eps ** j) * (mu ** p) * c.eval(np.array([Y + 0j]))
              * cmath.exp(1j * (k[0] * X + m * t))).real
    for (j, p, k, m), c in result.phi_y[0].terms.items():
        y += ((eps ** j) * (mu ** p) * c.eval(np.array([Y + 0j]))
              * cmath.exp(1j * (k[0] * X + m * t))).real
    return State(np.array([x]), np.array([y]), t)


def err_metric(num_state, ana_state):
    """Relative error between numerical and analytical states at equal t:
    half the distance over the root-sum-square of all four components."""
    dx = num_state.x - ana_state.x
    dy = num_state.y - ana_state.y
    dist = math.sqrt(float(np.sum(dx * dx) + np.sum(dy * dy)))
    denom = math.sqrt(float(np.sum(num_state.x ** 2) + np.sum(ana_state.x ** 2)
                            + np.sum(num_state.y ** 2) + np.sum(ana_state.y ** 2)))
    if denom == 0.0:
        return 0.0
    return 0.5 * dist / denom


def error_curve(traj, solution):
    """err(t) for every sample of a trajectory against an AnalyticSolution."""
    xa, ya = solution.states(traj.times)
    xn = traj.xs[:, 0]
    yn = traj.ys[:, 0]
    dist = np.hypot(xn - xa, yn - ya)
    denom = np.sqrt(xn ** 2 + xa ** 2 + yn ** 2 + ya ** 2)
    out = np.where(denom == 0.0, 0.0, 0.5 * dist / np.maximum(denom, 1e-300))
    return out


# ---------------------------------------------------------------------------
# energy tracking for the oscillating regime


@dataclass
class EnergyReport:
    times: np.ndarray
    energies: np.ndarray
    dHdt_max_err: float
    period: float
    secular_slope: float


def energy_track(traj, spec, eta, eps, mu):
    """Track the extended-phase-space energy along a trajectory.

    H = y^2/2 + eps h10(x, t) + T, where T (with dT/dt = -eps dh10/dt) must
    have been integrated alongside (``track_energy=True`` in rk4_fast).  Its
    variation dH/dt = mu y (g01 - eta) + eps mu h10_x f01 is checked against
    a centered finite difference of the samples; the dominant oscillation
    period comes from zero crossings and the secular trend from a fitted
    line.
    """
    if traj.t_action is None:
        raise ValueError("trajectory lacks the time-action samples; "
                         "integrate with track_energy=True")
    ts = traj.times
    xs = traj.xs[:, 0]
    ys = traj.ys[:, 0]
    h10 = compile_series_1d(spec.h10, eps, mu)
    H = 0.5 * ys * ys + eps * np.array(
        [h10(y, x, t) for t, x, y in zip(ts, xs, ys)]) + traj.t_action
    # analytic variation rate along the flow
    g01 = compile_series_1d(spec.g01[0], eps, mu)
    f01 = None if spec.f01[0].is_zero() else compile_series_1d(spec.f01[0], eps, mu)
    h10x = compile_series_1d(spec.h10.diff(("x", 0)), eps, mu)
    eta_series = None
    if eta:
        total = PoissonSeries.zero(spec.ell)
        for (j, p), comps in eta.items():
            total = total + PoissonSeries.action_function(comps[0], j=j, p=p)
        eta_series = compile_series_1d(total, eps, mu)
    rate = np.empty(len(ts))
    for i, (t, x, y) in enumerate(zip(ts, xs, ys)):
        r = mu * y * g01(y, x, t)
        if eta_series is not None:
            r -= y * eta_series(y, x, t)   # eta carries its mu grading
        if f01 is not None:
            r += eps * mu * h10x(y, x, t) * f01(y, x, t)
        rate[i] = r
    fd = (H[2:] - H[:-2]) / (ts[2:] - ts[:-2])
    max_err = float(np.max(np.abs(fd - rate[1:-1]))) if len(H) > 2 else 0.0
    centered = H - np.mean(H)
    signs = np.sign(centered)
    crossings = ts[1:][signs[1:] * signs[:-1] < 0]
    if len(crossings) >= 3:
        period = 2.0 * float(np.mean(np.diff(crossings)))
    else:
        period = math.nan
    slope = float(np.polyfit(ts, H, 1)[0])
    return EnergyReport(ts, H, max_err, period, slope)
