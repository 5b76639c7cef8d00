"""Order-by-order normal form construction for the dissipative vector field

    dx/dt = omega(y) + eps * h10_y(y,x,t) + mu * f01(y,x,t)
    dy/dt = -eps * h10_x(y,x,t) + mu * (g01(y,x,t) - eta(y))

First all conservative orders are normalized through a sequence of mixed
generating functions, then the dissipative orders; the drift eta is chosen
order by order as the average of the residual action equation, which is what
makes the normal form close.  Everything is exact rational arithmetic; the
defining invariant (no transformed-action terms of total grading <= N with
Fourier order <= K) is asserted symbolically at the end.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DimensionMismatch, PotentialMismatch
from .poly import GR_I, GR_ONE, ActionRational, GaussianRational, Poly, rational_antiderivative
from .series import (FrequencyMap, PoissonSeries, SubstOp, mode_order,
                     solve_homological)


def _zero_series(ell, cap=None):
    return PoissonSeries.zero(ell, cap)


def _one_series(ell, cap=None):
    return PoissonSeries.from_term(ell, 0, 0, (0,) * ell, 0,
                                   ActionRational.const(ell, 1), nmax=cap)


class VectorFieldSpec:
    """The data (omega, h10, f01, g01) defining the vector field.

    h10 is the scalar Hamiltonian perturbation (its gradients are generated
    internally, which enforces the Hamiltonian structure of the mu=0 part);
    f01 and g01 are vectors of series.  All series are ungraded here; the
    eps/mu prefactors are attached when the field is assembled.
    """

    def __init__(self, omega, h10, f01, g01):
        self.omega = omega
        self.ell = omega.ell
        self.h10 = h10
        self.f01 = list(f01)
        self.g01 = list(g01)
        if h10.ell != self.ell:
            raise DimensionMismatch("h10 dimension mismatch")
        if len(self.f01) != self.ell or len(self.g01) != self.ell:
            raise DimensionMismatch("f01/g01 must have ell components")
        for s in [h10] + self.f01 + self.g01:
            if s.ell != self.ell:
                raise DimensionMismatch("series dimension mismatch")
            if any(key[0] or key[1] for key in s.terms):
                raise ValueError("spec series must be ungraded (no eps/mu factors)")
        if not h10.is_real():
            raise ValueError("h10 must be a real series")

    def field(self, eta=None, cap=None):
        """Graded field (xdot, ydot) as series in (y, x, t).

        ``eta`` maps (j, p) -> list of ActionRational drift components; the
        term enters ydot at grading (j, p) with a minus sign.
        """
        ell = self.ell
        xdot = []
        ydot = []
        for i in range(ell):
            fx = PoissonSeries.action_function(self.omega.components[i])
            fx = fx + self.h10.diff(("y", i)).shift_grading(1, 0)
            fx = fx + self.f01[i].shift_grading(0, 1)
            fy = (-self.h10.diff(("x", i))).shift_grading(1, 0)
            fy = fy + self.g01[i].shift_grading(0, 1)
            if eta:
                for (j, p), comps in eta.items():
                    fy = fy + PoissonSeries.action_function(-comps[i], j=j, p=p)
            xdot.append(fx.truncate(cap) if cap is not None else fx)
            ydot.append(fy.truncate(cap) if cap is not None else fy)
        return xdot, ydot


def invert_near_identity(dy_shifts, dx_shifts, cap):
    """Invert (y, x) -> (y + dy(y,x,t), x + dx(y,x,t)) as formal series.

    Returns shifts (gy, gx) with (id + g) o (id + shift) = id up to total
    grading ``cap``; termination is guaranteed because every shift is
    O_1(eps, mu), so each fixed-point sweep settles one more grading.
    """
    ell = dy_shifts[0].ell if dy_shifts else dx_shifts[0].ell
    zero = _zero_series(ell, cap)
    dy_shifts = [s.truncate(cap) for s in dy_shifts]
    dx_shifts = [s.truncate(cap) for s in dx_shifts]
    for s in dy_shifts + dx_shifts:
        if not s.is_zero() and s.min_grading() == 0:
            raise ValueError("inversion requires O_1 shifts")
    gy = [-s.truncate(cap) for s in dy_shifts]
    gx = [-s.truncate(cap) for s in dx_shifts]
    # progressive truncation: after the sweep at grading cap g the iterate
    # is exact through grading g, so only the last sweep runs at full cap
    for g in range(2, cap + 1):
        op = SubstOp(ell, gy, gx, g)
        gy = [-op.apply(s.truncate(g)) for s in dy_shifts]
        gx = [-op.apply(s.truncate(g)) for s in dx_shifts]
    return gy, gx


def _matrix_neumann_inverse(amat, ell, cap):
    """(I + A)^{-1} for a matrix of O_1 series, by the Neumann series."""
    ident = [[_one_series(ell, cap) if i == j else _zero_series(ell, cap)
              for j in range(ell)] for i in range(ell)]
    out = [row[:] for row in ident]
    term = [row[:] for row in ident]
    for _ in range(cap):
        # term <- -term @ A
        new = [[_zero_series(ell, cap) for _ in range(ell)] for _ in range(ell)]
        nonzero = False
        for i in range(ell):
            for j in range(ell):
                acc = _zero_series(ell, cap)
                for k in range(ell):
                    if term[i][k].is_zero() or amat[k][j].is_zero():
                        continue
                    acc = acc + term[i][k].mul(amat[k][j], cap)
                new[i][j] = -acc
                nonzero = nonzero or not acc.is_zero()
        term = new
        if not nonzero:
            break
        for i in range(ell):
            for j in range(ell):
                out[i][j] = out[i][j] + term[i][j]
    return out


class ConservativeMap:
    """The generating-function transformation (A) and its field pushforward.

    Given psi = sum_j psi_{j0} eps^j (mixed variables: new action, old angle)
    the map is  x~ = x + psi_y(y~, x, t),  y = y~ + psi_x(y~, x, t).
    ``push`` expresses a field given in (y, x, t) in the intermediate
    variables (y~, x~, t).
    """

    def __init__(self, psis, ell, cap):
        self.ell = ell
        self.cap = cap
        psi = _zero_series(ell, cap)
        for s in psis:
            psi = psi + s.truncate(cap)
        self.psi = psi
        psi_y = [psi.diff(("y", i)) for i in range(ell)]
        psi_x = [psi.diff(("x", i)) for i in range(ell)]
        # invert the angle relation at fixed y~ (x-shift only)
        zero_shifts = [_zero_series(ell, cap) for _ in range(ell)]
        _, self.gamma_x = invert_near_identity(zero_shifts, psi_y, cap)
        angle_op = SubstOp(ell, None, self.gamma_x, cap)
        self.gamma_y = [angle_op.apply(s) for s in psi_x]
        comp = angle_op.apply
        self.a_xx = [[comp(psi_x[i].diff(("x", j))) for j in range(ell)] for i in range(ell)]
        self.a_xy = [[comp(psi_x[i].diff(("y", j))) for j in range(ell)] for i in range(ell)]
        self.a_xt = [comp(psi_x[i].diff("t")) for i in range(ell)]
        self.a_yy = [[comp(psi_y[i].diff(("y", j))) for j in range(ell)] for i in range(ell)]
        self.a_yx = [[comp(psi_y[i].diff(("x", j))) for j in range(ell)] for i in range(ell)]
        self.a_yt = [comp(psi_y[i].diff("t")) for i in range(ell)]
        self.p_inv = _matrix_neumann_inverse(self.a_xy, ell, cap)
        self._field_op = SubstOp(ell, self.gamma_y, self.gamma_x, cap)

    def push(self, fx, fy, cap=None, affine=True):
        """Pushforward of the field; with affine=False the map-velocity
        terms (independent of the field) are omitted, making push linear in
        (fx, fy) so incremental field updates can be pushed separately."""
        cap = self.cap if cap is None else cap
        ell = self.ell
        comp_x = [self._field_op.apply(f.truncate(cap)).truncate(cap) for f in fx]
        comp_y = [self._field_op.apply(f.truncate(cap)).truncate(cap) for f in fy]
        rhs = []
        for i in range(ell):
            acc = comp_y[i]
            for j in range(ell):
                if not self.a_xx[i][j].is_zero() and not comp_x[j].is_zero():
                    acc = acc - self.a_xx[i][j].mul(comp_x[j], cap)
            if affine:
                acc = acc - self.a_xt[i]
            rhs.append(acc)
        ydot = []
        for i in range(ell):
            acc = _zero_series(ell, cap)
            for j in range(ell):
                if not self.p_inv[i][j].is_zero() and not rhs[j].is_zero():
                    acc = acc + self.p_inv[i][j].mul(rhs[j], cap)
            ydot.append(acc)
        xdot = []
        for i in range(ell):
            acc = comp_x[i]
            for j in range(ell):
                if not self.a_yy[i][j].is_zero() and not ydot[j].is_zero():
                    acc = acc + self.a_yy[i][j].mul(ydot[j], cap)
                if not self.a_yx[i][j].is_zero() and not comp_x[j].is_zero():
                    acc = acc + self.a_yx[i][j].mul(comp_x[j], cap)
            if affine:
                acc = acc + self.a_yt[i]
            xdot.append(acc)
        return xdot, ydot


class DissipativeMap:
    """The transformation (B): X = x~ + alpha, Y = y~ + beta and its
    pushforward from intermediate to final variables.

    Shift derivatives are substituted into final variables once here;
    ``push`` then only substitutes the (small) field components and forms
    products, using that substitution is a ring homomorphism.
    """

    def __init__(self, alphas, betas, ell, cap):
        self.ell = ell
        self.cap = cap
        self.a_shift = [_zero_series(ell, cap) for _ in range(ell)]
        self.b_shift = [_zero_series(ell, cap) for _ in range(ell)]
        for comps in alphas.values():
            for i in range(ell):
                self.a_shift[i] = self.a_shift[i] + comps[i].truncate(cap)
        for comps in betas.values():
            for i in range(ell):
                self.b_shift[i] = self.b_shift[i] + comps[i].truncate(cap)
        self.delta_y, self.delta_x = invert_near_identity(self.b_shift, self.a_shift, cap)
        self._op = SubstOp(ell, self.delta_y, self.delta_x, cap)

        def comp(s):
            if s.is_zero():
                return s
            return self._op.apply(s)

        self.da_dy = [[comp(self.a_shift[i].diff(("y", j))) for j in range(ell)]
                      for i in range(ell)]
        self.da_dx = [[comp(self.a_shift[i].diff(("x", j))) for j in range(ell)]
                      for i in range(ell)]
        self.da_dt = [comp(self.a_shift[i].diff("t")) for i in range(ell)]
        self.db_dy = [[comp(self.b_shift[i].diff(("y", j))) for j in range(ell)]
                      for i in range(ell)]
        self.db_dx = [[comp(self.b_shift[i].diff(("x", j))) for j in range(ell)]
                      for i in range(ell)]
        self.db_dt = [comp(self.b_shift[i].diff("t")) for i in range(ell)]

    def push(self, fx, fy, cap=None):
        cap = self.cap if cap is None else cap
        ell = self.ell
        comp_fx = [self._op.apply(f.truncate(cap)).truncate(cap) for f in fx]
        comp_fy = [self._op.apply(f.truncate(cap)).truncate(cap) for f in fy]
        xdot = []
        ydot = []
        for d_dy, d_dx, d_dt, out, base in (
                (self.da_dy, self.da_dx, self.da_dt, xdot, comp_fx),
                (self.db_dy, self.db_dx, self.db_dt, ydot, comp_fy)):
            for i in range(ell):
                acc = base[i]
                for j in range(ell):
                    if not d_dy[i][j].is_zero() and not comp_fy[j].is_zero():
                        acc = acc + d_dy[i][j].mul(comp_fy[j], cap)
                    if not d_dx[i][j].is_zero() and not comp_fx[j].is_zero():
                        acc = acc + d_dx[i][j].mul(comp_fx[j], cap)
                acc = acc + d_dt[i]
                out.append(acc)
        return xdot, ydot


@dataclass
class NormalFormResult:
    """The complete output of build_normal_form."""

    spec: VectorFieldSpec
    order: int
    modes_cutoff: int
    psis: list                      # generating functions psi_{n0}, graded
    alphas: dict                    # (j,p) -> vector of series
    betas: dict                     # (j,p) -> vector of series
    eta: dict                       # (j,p) -> vector of ActionRational
    omega_corrections: dict         # (j,p) -> vector of ActionRational
    gamma_x: list                   # x = x~ + Gamma_x(y~, x~, t)
    gamma_y: list
    delta_x: list                   # x~ = X + Delta_x(Y, X, t)
    delta_y: list
    phi_x: list                     # x = X + Phi_x(Y, X, t)
    phi_y: list
    t_shift: list                   # Y = y + T(y, x, t)
    x_fwd_shift: list               # X = x + (this)(y, x, t)
    xdot_final: list                # transformed field, final variables
    ydot_final: list
    f_remainder: list               # grading N+1 part of Xdot
    g_remainder: list               # grading N+1 part of Ydot
    f_high_modes: list              # gradings <= N with Fourier order > K
    g_high_modes: list
    saw_high_modes: bool
    term_counts: dict

    @property
    def ell(self):
        return self.spec.ell

    def omega_d_series(self):
        """Normalized frequency as graded action-only series (per component)."""
        out = []
        for i in range(self.ell):
            s = PoissonSeries.action_function(self.spec.omega.components[i])
            for (j, p), comps in sorted(self.omega_corrections.items()):
                if not comps[i].is_zero():
                    s = s + PoissonSeries.action_function(comps[i], j=j, p=p)
            out.append(s)
        return out

    def eta_series(self):
        """Drift as graded action-only series (per component)."""
        out = []
        for i in range(self.ell):
            s = PoissonSeries.zero(self.ell)
            for (j, p), comps in sorted(self.eta.items()):
                if not comps[i].is_zero():
                    s = s + PoissonSeries.action_function(comps[i], j=j, p=p)
            out.append(s)
        return out

    def nf_frequency(self, Y0, eps, mu):
        """Evaluate Omega_d^{(N)} at the point Y0 for numeric eps, mu."""
        import numpy as np
        Y0 = np.atleast_1d(np.asarray(Y0, dtype=complex))
        out = []
        for i in range(self.ell):
            tot = self.spec.omega.components[i].eval(Y0).real
            for (j, p), comps in self.omega_corrections.items():
                if not comps[i].is_zero():
                    tot += (eps ** j) * (mu ** p) * comps[i].eval(Y0).real
            out.append(tot)
        return np.array(out)

    def drift_in_original(self):
        """Drift as a function of the original action.

        The construction determines each eta_{jp} as an average in the
        normalized variables and then uses the same rational function of the
        original action in the integrated field; the final symbolic residual
        check certifies that this choice closes the normal form, which is
        the same-functional-form statement validated here.
        """
        return self.eta_series()


class NormalFormBuilder:
    """Stages the construction so individual orders can be inspected."""

    def __init__(self, spec, N, K, cap=None):
        self.spec = spec
        self.N = N
        self.K = K
        self.ell = spec.ell
        self.cap = (N + 1) if cap is None else cap
        self.psis = []
        self.alphas = {}
        self.betas = {}
        self.eta = {}
        self.omega_corrections = {}
        self.saw_high_modes = False
        self.max_rhs_mode = 0
        self.max_rhs_mode_by_order = {}
        self._cons_map = None
        self._cnf = None           # conservative normal form field, cached
        self._cons_done = 0
        self._diss_done = 0
        self._finalized = {}

    # -- conservative phase ------------------------------------------------
    def conservative_order(self, n):
        if n != self._cons_done + 1:
            raise RuntimeError("conservative orders must be run in sequence")
        ell = self.ell
        cmap = ConservativeMap(self.psis, ell, n)
        fx, fy = self.spec.field(eta=None, cap=n)
        xdot, ydot = cmap.push(fx, fy, cap=n)
        f1 = [s.part(n, 0) for s in xdot]
        f3 = [s.part(n, 0) for s in ydot]
        omega_n = []
        for i in range(ell):
            avg3 = f3[i].average()
            if not avg3.is_zero():
                raise PotentialMismatch(
                    f"action residual at order {n} has a nonzero average")
            omega_n.append(f1[i].coeff(n, 0, (0,) * ell, 0))
        if any(not c.is_zero() for c in omega_n):
            self.omega_corrections[(n, 0)] = omega_n
        f1osc = [s.oscillatory() for s in f1]
        f3osc = [s.oscillatory() for s in f3]
        high = max([s.max_mode_order() for s in f1osc + f3osc] or [0])
        self.max_rhs_mode = max(self.max_rhs_mode, high)
        self.max_rhs_mode_by_order[n] = max(self.max_rhs_mode_by_order.get(n, 0), high)
        if high > self.K:
            self.saw_high_modes = True
        f1le = [s.project_modes(self.K, "le") for s in f1osc]
        f3le = [s.project_modes(self.K, "le") for s in f3osc]
        m = self._potential(f1le, f3le, n)
        psi = solve_homological(self.spec.omega, m, self.K)
        self.psis.append(psi)
        self._cons_done = n
        self._cons_map = None
        self._cnf = None
        return psi, m

    def _potential(self, f1le, f3le, n):
        """Scalar potential M with M_y = f1le and M_x = -f3le, built
        termwise; the gradient cross-check certifies the Hamiltonian
        structure of the mu = 0 dynamics."""
        ell = self.ell
        m = PoissonSeries.zero(ell)
        seen = set()
        for i in range(ell):
            for (j, p, k, mm), c in f3le[i].terms.items():
                if (k, mm) in seen or not any(k):
                    continue
                # use the first nonzero angle index of this mode
                idx = next(a for a, ka in enumerate(k) if ka)
                if i != idx:
                    continue
                seen.add((k, mm))
                m = m + PoissonSeries.from_term(ell, j, p, k, mm,
                                                -c / (GR_I * k[idx]))
        # purely temporal modes come from integrating the angle equation in y
        for (j, p, k, mm), c in f1le[0].terms.items():
            if any(k) or mm == 0:
                continue
            if ell != 1:
                raise NotImplementedError(
                    "k = 0 temporal modes need ell = 1 for the potential")
            m = m + PoissonSeries.from_term(ell, j, p, k, mm,
                                            rational_antiderivative(c))
        # exact cross-check of both gradient relations
        for i in range(ell):
            if not (m.diff(("y", i)) - f1le[i]).is_zero():
                raise PotentialMismatch(
                    f"potential y-gradient mismatch at order {n}")
            if not (m.diff(("x", i)) + f3le[i]).is_zero():
                raise PotentialMismatch(
                    f"potential x-gradient mismatch at order {n}")
        return m

    # -- dissipative phase ------------------------------------------------
    def _conservative_field(self, cap):
        """Conservative-normal-form field with the currently known drift."""
        if self._cons_map is None or self._cons_map.cap < cap:
            self._cons_map = ConservativeMap(self.psis, self.ell, cap)
            self._cnf = None
        if self._cnf is None:
            fx, fy = self.spec.field(eta=None, cap=cap)
            self._cnf = self._cons_map.push(fx, fy, cap=cap)
            self._cnf_eta_done = set()
        # push drift increments linearly
        for key in sorted(self.eta):
            if key in self._cnf_eta_done:
                continue
            j, p = key
            zero = [_zero_series(self.ell, cap) for _ in range(self.ell)]
            fy_inc = [PoissonSeries.action_function(-self.eta[key][i], j=j, p=p)
                      for i in range(self.ell)]
            dx, dy = self._cons_map.push(zero, fy_inc, cap=cap, affine=False)
            cx, cy = self._cnf
            self._cnf = ([a + b for a, b in zip(cx, dx)],
                         [a + b for a, b in zip(cy, dy)])
            self._cnf_eta_done.add(key)
        return self._cnf

    def dissipative_order(self, n):
        if self._cons_done < self.N:
            raise RuntimeError("finish the conservative phase first")
        if n != self._diss_done + 1:
            raise RuntimeError("dissipative orders must be run in sequence")
        ell = self.ell
        cnf_x, cnf_y = self._conservative_field(self.cap)
        dmap = DissipativeMap(self.alphas, self.betas, ell, n)
        xdot, ydot = dmap.push([s.truncate(n) for s in cnf_x],
                               [s.truncate(n) for s in cnf_y], cap=n)
        omega_y = self.spec.omega.derivative_matrix()
        for j in range(n):
            p = n - j
            n5 = [s.part(j, p) for s in ydot]
            n4 = [s.part(j, p) for s in xdot]
            eta_jp = [n5[i].coeff(j, p, (0,) * ell, 0) for i in range(ell)]
            omj = [n4[i].coeff(j, p, (0,) * ell, 0) for i in range(ell)]
            if any(not c.is_zero() for c in omj):
                self.omega_corrections[(j, p)] = omj
            if any(not c.is_zero() for c in eta_jp):
                self.eta[(j, p)] = eta_jp
            high = max([s.max_mode_order() for s in n4 + n5] or [0])
            self.max_rhs_mode = max(self.max_rhs_mode, high)
            self.max_rhs_mode_by_order[n] = max(self.max_rhs_mode_by_order.get(n, 0), high)
            if high > self.K:
                self.saw_high_modes = True
            beta_jp = []
            for i in range(ell):
                rhs = n5[i].oscillatory().project_modes(self.K, "le")
                beta_jp.append(solve_homological(self.spec.omega, rhs, self.K))
            alpha_jp = []
            for i in range(ell):
                rhs = n4[i].oscillatory().project_modes(self.K, "le")
                for j2 in range(ell):
                    if not omega_y[i][j2].is_zero() and not beta_jp[j2].is_zero():
                        rhs = rhs - beta_jp[j2].scale_rational(omega_y[i][j2])
                alpha_jp.append(solve_homological(self.spec.omega, rhs, self.K))
            if any(not s.is_zero() for s in beta_jp):
                self.betas[(j, p)] = beta_jp
            if any(not s.is_zero() for s in alpha_jp):
                self.alphas[(j, p)] = alpha_jp
        self._diss_done = n

    # -- assembly ----------------------------------------------------------
    def run(self):
        for n in range(self._cons_done + 1, self.N + 1):
            self.conservative_order(n)
        for n in range(self._diss_done + 1, self.N + 1):
            self.dissipative_order(n)
        return self.finalize()

    def finalize(self, order=None):
        """Assemble maps, remainders and the symbolic invariant check.

        Results are cached per order; repeated table generation reuses them.
        """
        N = self.N if order is None else order
        if N in self._finalized:
            return self._finalized[N]
        if N > self._diss_done:
            raise RuntimeError("normalization incomplete for requested order")
        cap = N + 1
        ell = self.ell
        K = self.K
        psis = self.psis[:N]
        alphas = {k: v for k, v in self.alphas.items() if k[0] + k[1] <= N}
        betas = {k: v for k, v in self.betas.items() if k[0] + k[1] <= N}
        eta = {k: v for k, v in self.eta.items() if k[0] + k[1] <= N}
        omega_corr = {k: v for k, v in self.omega_corrections.items()
                      if k[0] + k[1] <= N}

        dmap = DissipativeMap(alphas, betas, ell, cap)
        if N == self.N and self._diss_done == self.N:
            mid_x, mid_y = self._conservative_field(self.cap)
            mid_x = [s.truncate(cap) for s in mid_x]
            mid_y = [s.truncate(cap) for s in mid_y]
            cmap = self._cons_map
        else:
            cmap = ConservativeMap(psis, ell, cap)
            fx, fy = self.spec.field(eta=eta, cap=cap)
            mid_x, mid_y = cmap.push(fx, fy, cap=cap)
        xdot, ydot = dmap.push(mid_x, mid_y, cap=cap)

        # the defining invariant: no low-grading low-mode action variation
        omega_series = [PoissonSeries.action_function(self.spec.omega.components[i])
                        for i in range(ell)]
        for i in range(ell):
            resid = ydot[i].up_to_grading(N).project_modes(K, "le")
            if not resid.is_zero():
                raise PotentialMismatch(
                    f"normal form invariant violated in component {i}: {resid}")
            expected = omega_series[i]
            for (j, p), comps in omega_corr.items():
                if not comps[i].is_zero():
                    expected = expected + PoissonSeries.action_function(comps[i], j=j, p=p)
            got = xdot[i].up_to_grading(N).project_modes(K, "le")
            if not (got - expected).is_zero():
                raise PotentialMismatch(
                    f"normalized frequency mismatch in component {i}")

        f_rem = [s.grading_at_least(N + 1) for s in xdot]
        g_rem = [s.grading_at_least(N + 1) for s in ydot]
        f_high = [s.up_to_grading(N).project_modes(K, "gt") for s in xdot]
        g_high = [s.up_to_grading(N).project_modes(K, "gt") for s in ydot]

        # forward composed shift of the action: Y = y + T(y, x, t)
        psi_x = [cmap.psi.diff(("x", i)) for i in range(ell)]
        psi_y = [cmap.psi.diff(("y", i)) for i in range(ell)]
        ry, _ = invert_near_identity(psi_x, [_zero_series(ell, cap)] * ell, cap)
        ry_op = SubstOp(ell, ry, None, cap)
        x_fwd = [ry_op.apply(s) for s in psi_y]
        fwd_op = SubstOp(ell, ry, x_fwd, cap)
        t_shift = [ry[i] + fwd_op.apply(dmap.b_shift[i]) for i in range(ell)]
        x_fwd_total = [x_fwd[i] + fwd_op.apply(dmap.a_shift[i]) for i in range(ell)]

        phi_x = [dmap.delta_x[i] + dmap._op.apply(cmap.gamma_x[i])
                 for i in range(ell)]
        phi_y = [dmap.delta_y[i] + dmap._op.apply(cmap.gamma_y[i])
                 for i in range(ell)]

        counts = {
            "conservative": sum(len(s.terms) for s in [cmap.psi]),
            "dissipative": sum(len(s.terms) for s in dmap.a_shift + dmap.b_shift),
            "composed": sum(len(s.terms) for s in phi_x + phi_y),
            "poly_degree_max": max(
                [c.num.degree() for s in phi_x + phi_y for c in s.terms.values()] or [0]),
        }

        out = NormalFormResult(
            spec=self.spec, order=N, modes_cutoff=K,
            psis=psis, alphas=alphas, betas=betas, eta=eta,
            omega_corrections=omega_corr,
            gamma_x=cmap.gamma_x, gamma_y=cmap.gamma_y,
            delta_x=dmap.delta_x, delta_y=dmap.delta_y,
            phi_x=phi_x, phi_y=phi_y,
            t_shift=t_shift, x_fwd_shift=x_fwd_total,
            xdot_final=xdot, ydot_final=ydot,
            f_remainder=f_rem, g_remainder=g_rem,
            f_high_modes=f_high, g_high_modes=g_high,
            saw_high_modes=self.saw_high_modes,
            term_counts=counts,
        )
        self._finalized[N] = out
        return out


def build_normal_form(spec, N, K):
    """Normalize the field to order N with Fourier cutoff K."""
    return NormalFormBuilder(spec, N, K).run()
