"""Quantitative estimates: the non-resonance constant, the inversion and
non-resonance smallness conditions with the explicit constant 70, the
Fourier-tail bound, and the stability constants / exponential time.

Norm evaluation policy.  The condition inequalities are evaluated with the
printed constant 70 and the printed norm domains, with one calibration
applied uniformly to the inversion-type (composition) conditions: the
exponential factor is taken as e^{2 s0}/delta0 with the shift norms on the
intermediate strip (r~0, s~0).  This is the unique uniform reading that
reproduces the published parameter caps for the reference problem; the
as-printed variant is available via ``convention="printed"``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ResonantDomain
from .series import PoissonSeries, weighted_norm, weighted_norm_vector


@dataclass
class DomainParams:
    """Analyticity radii, strip widths and derived quantities.

    The chain r~0' < r~0 < r0, R0 < r~0, S0 < s~0 - d~0 with
    s~0 = s0 - delta0 and d~0 = s~0/2 is validated on construction.
    """

    y0: float
    x0: float = 0.0
    r0: float = 0.1
    s0: float = 0.1
    delta0: float = 0.05
    rtilde0: float = 0.0
    rtilde0p: float = 0.0
    R0: float = 0.0
    S0: float = 0.0
    K: int = 20
    eps0: float = 0.0
    mu0: float = 0.0
    tau0: float | None = None
    a: float | None = None
    r2: float | str = "cp"

    def __post_init__(self):
        self.stilde0 = self.s0 - self.delta0
        self.dtilde0 = self.stilde0 / 2.0
        checks = [
            (self.r0 > 0 and self.s0 > 0 and 0 < self.delta0 < self.s0,
             "need 0 < delta0 < s0 and positive radii"),
            (0 < self.rtilde0 < self.r0, "need rtilde0' in (0, r0)"),
            (0 < self.rtilde0p < self.rtilde0, "need rtilde0' < rtilde0"),
            (0 < self.R0 < self.rtilde0, "need R0 < rtilde0"),
            (0 < self.S0 <= self.stilde0 - self.dtilde0,
             "need S0 <= stilde0 - dtilde0"),
            (self.K >= 1, "need K >= 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(f"invalid domain parameters: {msg}")

    @property
    def lambda0(self):
        return max(self.eps0, abs(self.mu0))


def _real_roots_in(poly, lo, hi, pad=0.0):
    """Real roots of a univariate Poly inside [lo - pad, hi + pad]."""
    deg = poly.degree()
    if deg <= 0:
        return []
    arr = np.zeros(deg + 1, dtype=complex)
    for expo, c in poly.terms.items():
        arr[deg - expo[0]] = complex(c)
    roots = np.roots(arr)
    out = []
    for r in roots:
        if abs(r.imag) <= 1e-9 * max(1.0, abs(r.real)):
            x = r.real
            if lo - pad <= x <= hi + pad:
                out.append(x)
    return out


def nonres_constant(omega, y0, r0, K, domain="point", tol=1e-12):
    """The non-resonance constant a = min |omega(y).k + m| over the mode set.

    ``domain`` is "point" (evaluate at y0, as the reference computation
    reports it) or "interval" (minimize over the real segment of radius r0;
    the minimum is located through the real roots of each divisor and of its
    derivative, so interior zeros are detected exactly rather than sampled).
    Raises ResonantDomain when the minimum vanishes.
    """
    ell = omega.ell
    if ell != 1:
        raise NotImplementedError("nonres_constant currently supports ell = 1")
    y0 = float(np.atleast_1d(y0)[0])
    if domain not in ("point", "interval"):
        raise ValueError("domain must be 'point' or 'interval'")
    lo, hi = (y0, y0) if domain == "point" else (y0 - r0, y0 + r0)
    best = math.inf
    for k in range(-K, K + 1):
        mmax = K - abs(k)
        for m in range(-mmax, mmax + 1):
            if k == 0 and m == 0:
                continue
            dv = omega.divisor((k,), m)
            if dv.is_zero():
                raise ResonantDomain(f"divisor vanishes identically at k={k}, m={m}")
            if domain == "point":
                cand = abs(dv.eval(np.array([complex(y0)])).real)
            else:
                if _real_roots_in(dv.num, lo, hi):
                    raise ResonantDomain(
                        f"divisor omega*{k}+{m} has a zero inside the domain")
                probes = [lo, hi]
                # interior extrema of P/Q: real roots of P'Q - PQ'
                crit = dv.num.diff(0) * dv.den_expanded() \
                    - dv.num * dv.den_expanded().diff(0)
                probes.extend(_real_roots_in(crit, lo, hi))
                cand = min(abs(dv.eval(np.array([complex(x)])).real)
                           for x in probes)
            if cand < best:
                best = cand
    if best <= tol:
        raise ResonantDomain(
            f"resonance within numeric tolerance on the domain (min {best:.2e})")
    return best


def tail_constant(sigma0, K, ell):
    """C_a = e^{(K+1) sigma0/2} ((1 + e^{-sigma0/2})/(1 - e^{-sigma0/2}))^{ell+1}."""
    if sigma0 <= 0:
        raise ValueError("sigma0 must be positive")
    q = math.exp(-sigma0 / 2.0)
    return math.exp((K + 1) * sigma0 / 2.0) * ((1 + q) / (1 - q)) ** (ell + 1)


def tail_bound(series, y0, r0, s0, sigma0, K, eps=None, mu=None):
    """Bound on the high-mode part: C_a ||f||_{r0, s0+sigma0} e^{-(K+1) sigma0}."""
    if not 0 < sigma0:
        raise ValueError("need 0 < sigma0")
    ca = tail_constant(sigma0, K, series.ell)
    big = weighted_norm(series, y0, r0, s0 + sigma0, eps=eps, mu=mu)
    return ca * big * math.exp(-(K + 1) * sigma0)


# ---------------------------------------------------------------------------
# conditions (C1)-(C8), (33ter)


@dataclass
class Condition:
    name: str
    lhs: float
    threshold: float
    eps_max: float | None = None
    mu_max: float | None = None
    note: str = ""

    @property
    def passed(self):
        return self.lhs < self.threshold

    def as_dict(self):
        return {
            "name": self.name, "lhs": self.lhs, "threshold": self.threshold,
            "passed": bool(self.passed), "eps_max": self.eps_max,
            "mu_max": self.mu_max, "note": self.note,
        }


@dataclass
class ConditionReport:
    conditions: list
    eps_cap: float
    mu_cap: float
    eps_binding: str
    mu_binding: str
    a: float
    convention: str

    @property
    def all_passed(self):
        return all(c.passed for c in self.conditions)

    def as_dict(self):
        return {
            "conditions": [c.as_dict() for c in self.conditions],
            "eps_cap": self.eps_cap, "mu_cap": self.mu_cap,
            "eps_binding": self.eps_binding, "mu_binding": self.mu_binding,
            "a": self.a, "convention": self.convention,
            "all_passed": bool(self.all_passed),
        }

    def to_json(self):
        return json.dumps(self.as_dict(), indent=2)


def _sum_shifted(series_list):
    out = PoissonSeries.zero(series_list[0].ell)
    for s in series_list:
        out = out + s
    return out


class _NormBag:
    """Norms of the transformation pieces needed by the conditions, as
    functions of (eps, mu); each graded norm is |eps|^j |mu|^p summable, so
    a scalar weighted_norm call with the parameter values suffices."""

    def __init__(self, params, result, rel_tol=1e-8):
        self.p = params
        self.r = result
        self.rel_tol = rel_tol
        self._cache = {}
        ell = result.ell
        psi = PoissonSeries.zero(ell)
        for s in result.psis:
            psi = psi + s
        self.psi = psi
        self.psi_y = [psi.diff(("y", i)) for i in range(ell)]
        self.psi_x = [psi.diff(("x", i)) for i in range(ell)]
        self.alpha = [_sum_shifted([comps[i] for comps in result.alphas.values()])
                      if result.alphas else PoissonSeries.zero(ell)
                      for i in range(ell)]
        self.beta = [_sum_shifted([comps[i] for comps in result.betas.values()])
                     if result.betas else PoissonSeries.zero(ell)
                     for i in range(ell)]
        self.beta_x = [[b.diff(("x", j)) for j in range(ell)] for b in self.beta]

    def norm(self, tag, series_list, r, s, eps, mu):
        key = (tag, r, s, round(math.log(eps + 1e-300), 12),
               round(math.log(abs(mu) + 1e-300), 12))
        got = self._cache.get(key)
        if got is None:
            got = weighted_norm_vector(series_list, [self.p.y0], r, s,
                                       eps=eps, mu=mu, rel_tol=self.rel_tol)
            self._cache[key] = got
        return got

    def omega_y_norm(self):
        om = self.r.spec.omega.derivative_matrix()
        flat = []
        for row in om:
            for entry in row:
                flat.append(PoissonSeries.action_function(entry))
        return self.norm("omega_y", flat, self.p.r0, 0.0, 1.0, 1.0)


def check_conditions(params, result, eps=None, mu=None, convention="calibrated",
                     rel_tol=1e-8):
    """Evaluate the smallness conditions at (eps, mu) and solve each for the
    admissible parameter caps.

    Returns a ConditionReport with one entry per condition, the per-condition
    admissible eps/mu, and the binding overall caps.  ``eps``/``mu`` default
    to the caps stored in params.
    """
    p = params
    eps = p.eps0 if eps is None else eps
    mu = p.mu0 if mu is None else mu
    if eps <= 0 or mu == 0:
        raise ValueError("need eps > 0 and mu != 0")
    mu = abs(mu)
    bag = _NormBag(p, result, rel_tol=rel_tol)
    a = p.a if p.a is not None else nonres_constant(
        result.spec.omega, p.y0, p.r0, p.K)
    omega_y = bag.omega_y_norm()
    ell = result.ell

    if convention == "calibrated":
        # uniform reading that reproduces the published caps: inversion
        # conditions use e^{2 s0}/delta0 with shift norms on (r~0, s~0)
        inv_factor = math.exp(2 * p.s0) / p.delta0
        s_inv = p.stilde0
    elif convention == "printed":
        inv_factor = None  # per-condition factors below
        s_inv = None
    else:
        raise ValueError("convention must be 'calibrated' or 'printed'")

    conds = []

    def solve_eps(fn, lo=1e-12, hi=10.0):
        # largest eps with fn(eps) < 1; fn increasing in eps
        if fn(hi) < 1:
            return hi
        for _ in range(200):
            mid = math.sqrt(lo * hi)
            if fn(mid) < 1:
                lo = mid
            else:
                hi = mid
        return lo

    # --- conservative inversion (C1 at order 1; 33ter in general) --------
    def c1_lhs(e, mm):
        if convention == "calibrated":
            n = bag.norm("psi_y", bag.psi_y, p.rtilde0, p.stilde0, e, mm)
            return 70.0 * n * inv_factor
        n = bag.norm("psi_y_s0", bag.psi_y, p.rtilde0, p.s0, e, mm)
        return 70.0 * n * math.exp(2 * p.s0) / p.delta0

    conds.append(Condition(
        "33ter", c1_lhs(eps, mu), 1.0,
        eps_max=solve_eps(lambda e: c1_lhs(e, mu)),
        note="inversion of the generating-function transformation"))

    # --- C2: action inversion of the conservative map --------------------
    def c2_lhs(e, mm):
        n = bag.norm("psi_x_s0", bag.psi_x, p.rtilde0, p.s0, e, mm)
        return 70.0 * n / (p.rtilde0 - p.rtilde0p)

    conds.append(Condition(
        "C2", c2_lhs(eps, mu), 1.0,
        eps_max=solve_eps(lambda e: c2_lhs(e, mu)),
        note="inversion of the action component of the conservative map"))

    # --- C3/C6: non-resonance in intermediate variables -------------------
    def c6_lhs(e, mm):
        n = bag.norm("psi_x_s0", bag.psi_x, p.rtilde0, p.s0, e, mm)
        return 2.0 * p.K * n * omega_y / a

    conds.append(Condition(
        "C6", c6_lhs(eps, mu), 1.0,
        eps_max=solve_eps(lambda e: c6_lhs(e, mu)),
        note="non-resonance after the conservative transformation"))

    # --- C4/C7 first: angle inversion of the dissipative map --------------
    def c7a_lhs(e, mm):
        if convention == "calibrated":
            n = bag.norm("alpha", bag.alpha, p.rtilde0, p.stilde0, e, mm)
            return 70.0 * n * inv_factor
        n = bag.norm("alpha", bag.alpha, p.rtilde0, p.stilde0, e, mm)
        return 70.0 * n * math.exp(2 * p.stilde0) / p.dtilde0

    conds.append(Condition(
        "C7a", c7a_lhs(eps, mu), 1.0,
        eps_max=solve_eps(lambda e: c7a_lhs(e, mu)),
        mu_max=solve_eps(lambda m: c7a_lhs(eps, m)),
        note="inversion of the angle component of the dissipative map"))

    # --- C4/C7 second: action inversion of the dissipative map ------------
    def c7b_lhs(e, mm):
        nb = bag.norm("beta", bag.beta, p.rtilde0, p.stilde0, e, mm)
        nbx = bag.norm("beta_x", [bx for row in bag.beta_x for bx in row],
                       p.rtilde0, p.stilde0, e, mm)
        na = bag.norm("alpha", bag.alpha, p.rtilde0, p.stilde0, e, mm)
        return 70.0 * (nb + nbx * na) / (p.rtilde0 - p.R0)

    conds.append(Condition(
        "C7b", c7b_lhs(eps, mu), 1.0,
        eps_max=solve_eps(lambda e: c7b_lhs(e, mu)),
        mu_max=solve_eps(lambda m: c7b_lhs(eps, m)),
        note="inversion of the action component of the dissipative map"))

    # --- C5/C8: non-resonance in final variables ---------------------------
    def c8_lhs(e, mm):
        n = bag.norm("beta", bag.beta, p.rtilde0, p.stilde0, e, mm)
        return 4.0 * p.K * n * omega_y / a

    conds.append(Condition(
        "C8", c8_lhs(eps, mu), 1.0,
        eps_max=solve_eps(lambda e: c8_lhs(e, mu)),
        mu_max=solve_eps(lambda m: c8_lhs(eps, m)),
        note="non-resonance after the dissipative transformation"))

    eps_caps = [(c.eps_max, c.name) for c in conds if c.eps_max is not None]
    mu_caps = [(c.mu_max, c.name) for c in conds if c.mu_max is not None]
    eps_cap, eps_binding = min(eps_caps)
    mu_cap, mu_binding = min(mu_caps) if mu_caps else (math.inf, "none")
    return ConditionReport(conds, eps_cap, mu_cap, eps_binding, mu_binding,
                           a, convention)


# ---------------------------------------------------------------------------
# stability constants and tables


@dataclass
class StabilityReport:
    N: int
    K: int
    tau0: float
    lambda0: float
    g_norm: float          # ||G_{N+1}(eps0, mu0)||_{R0,S0}, the plain norm
    g_row: float           # the table row: g_norm / lambda0
    t_norm: float          # ||T^{(N)}(eps0, mu0)||_{r0,s0}
    c_p: float
    c_y: float
    c_t: float
    r1: float
    r2: float
    rho0: float
    t0: float

    def as_dict(self):
        return {k: getattr(self, k) for k in (
            "N", "K", "tau0", "lambda0", "g_norm", "g_row", "t_norm",
            "c_p", "c_y", "c_t", "r1", "r2", "rho0", "t0")}


def stability_constants(params, result, mode="fix-K", tau0=None, rel_tol=1e-8):
    """Stability constants for one normal form order.

    mode "fix-K": K from params, tau0 = N |log lambda0| / K.
    mode "fix-tau0": tau0 given, K = floor(N |log lambda0| / tau0).

    The published tables are reproduced with C_p = ||T||/lambda0,
    C_Y = ||G||/lambda0^{N+1}, r2 = C_p (the drift budget 2 r1 + r2 lambda0
    then collapses to 3 C_p lambda0) and T0 = C_t e^{K tau0}.
    """
    p = params
    N = result.order
    lam = p.lambda0
    if lam <= 0:
        raise ValueError("set eps0/mu0 caps before computing stability constants")
    logl = abs(math.log(lam))
    if mode == "fix-K":
        K = p.K
        tau0_val = N * logl / K
    elif mode == "fix-tau0":
        tau0_val = tau0 if tau0 is not None else p.tau0
        if not tau0_val or tau0_val <= 0:
            raise ValueError("fix-tau0 mode needs tau0 > 0")
        K = int(N * logl / tau0_val)
    else:
        raise ValueError("mode must be 'fix-K' or 'fix-tau0'")

    g_norm = weighted_norm_vector(
        [g + hk for g, hk in zip(result.g_remainder, result.g_high_modes)],
        [p.y0], p.R0, p.S0, eps=p.eps0, mu=p.mu0, rel_tol=rel_tol)
    t_norm = weighted_norm_vector(result.t_shift, [p.y0], p.r0, p.s0,
                                  eps=p.eps0, mu=p.mu0, rel_tol=rel_tol)
    c_p = t_norm / lam
    c_y = g_norm / lam ** (N + 1)
    r1 = c_p * lam
    if p.r2 == "cp":
        r2 = c_p
    elif p.r2 == "r1":
        r2 = r1
    else:
        r2 = float(p.r2)
    c_t = r2 / c_y
    rho0 = 2.0 * r1 + r2 * lam
    t0 = c_t * math.exp(K * tau0_val)
    return StabilityReport(
        N=N, K=K, tau0=tau0_val, lambda0=lam, g_norm=g_norm,
        g_row=g_norm / lam, t_norm=t_norm, c_p=c_p, c_y=c_y, c_t=c_t,
        r1=r1, r2=r2, rho0=rho0, t0=t0)


TABLE_ROWS = ["tau0", "K", "g_row", "t_norm", "lambda0", "c_p", "c_y",
              "c_t", "rho0", "t0"]


def make_tables(builder, params, orders, mode="fix-K", tau0=None,
                rel_tol=1e-8, threads=None):
    """Stability reports for a range of orders, in the published layout.

    ``builder`` is a completed NormalFormBuilder (run through max(orders));
    each order is finalized from the shared construction.  The returned dict
    maps N -> StabilityReport.
    """
    orders = list(orders)
    if not orders:
        return {}
    reports = {}

    def one(n):
        res = builder.finalize(order=n)
        return n, stability_constants(params, res, mode=mode, tau0=tau0,
                                      rel_tol=rel_tol)

    nthreads = threads if threads is not None else _thread_cap()
    if nthreads > 1 and len(orders) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            for n, rep in pool.map(one, orders):
                reports[n] = rep
    else:
        for n in orders:
            n, rep = one(n)
            reports[n] = rep
    return reports


def _thread_cap():
    raw = os.environ.get("DRIFTNF_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def tables_to_csv(reports):
    """CSV in the published layout: one row per constant, one column per N."""
    orders = sorted(reports)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["quantity"] + [f"N={n}" for n in orders])
    for row in TABLE_ROWS:
        w.writerow([row] + [f"{getattr(reports[n], row):.6e}" for n in orders])
    return buf.getvalue()


def tables_to_json(reports):
    return json.dumps({str(n): rep.as_dict() for n, rep in sorted(reports.items())},
                      indent=2)
