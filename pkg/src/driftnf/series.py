"""Graded Poisson series: finite Fourier sums in angles and time whose
coefficients are exact rational functions of the actions, graded by powers
of the two small parameters.

A term is ``eps^j * mu^p * c(y) * exp(i(k.x + m t))`` and is stored under the
key ``(j, p, k, m)`` with ``k`` an integer tuple of length ``ell``.  Real
series satisfy ``c[j,p,-k,-m] == conj(c[j,p,k,m])``; every constructor and
operation here preserves that symmetry.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import (DimensionMismatch, ExactResonance, NonZeroAverage,
                     PoleInsideDomain)
from .poly import (GR_I, GR_ONE, GR_ZERO, ActionRational, GaussianRational,
                   Poly, _gr)


class FourierMode(NamedTuple):
    k: tuple
    m: int

    @property
    def order(self):
        return sum(abs(c) for c in self.k) + abs(self.m)


class GradedKey(NamedTuple):
    j: int
    p: int
    k: tuple
    m: int

    @property
    def mode(self):
        return FourierMode(self.k, self.m)


def mode_order(key):
    return sum(abs(c) for c in key[2]) + abs(key[3])


class PoissonSeries:
    """Finite map from graded keys to rational-function coefficients."""

    __slots__ = ("ell", "nmax", "terms")

    def __init__(self, ell, nmax=None, terms=None):
        self.ell = ell
        self.nmax = nmax
        self.terms = {}
        if terms:
            for key, c in terms.items():
                self._accumulate(tuple(key[:2]) + (tuple(key[2]), key[3]), c)

    def _accumulate(self, key, c):
        if isinstance(c, (int, Fraction, GaussianRational)):
            c = ActionRational.const(self.ell, c)
        if c.is_zero():
            return
        j, p = key[0], key[1]
        if self.nmax is not None and j + p > self.nmax:
            return
        key = (j, p, tuple(key[2]), key[3])
        prev = self.terms.get(key)
        s = c if prev is None else prev + c
        if s.is_zero():
            self.terms.pop(key, None)
        else:
            self.terms[key] = s

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, ell, nmax=None):
        return cls(ell, nmax)

    @classmethod
    def from_term(cls, ell, j, p, k, m, coeff, nmax=None):
        return cls(ell, nmax, {(j, p, tuple(k), m): coeff})

    @classmethod
    def action_function(cls, coeff, j=0, p=0, nmax=None):
        """Series for an action-only function (mode (0, 0))."""
        ell = coeff.nvars
        return cls.from_term(ell, j, p, (0,) * ell, 0, coeff, nmax=nmax)

    def copy(self):
        out = PoissonSeries(self.ell, self.nmax)
        out.terms = dict(self.terms)
        return out

    # -- basic queries ---------------------------------------------------
    def is_zero(self):
        return not self.terms

    def min_grading(self):
        if not self.terms:
            return None
        return min(k[0] + k[1] for k in self.terms)

    def max_mode_order(self):
        if not self.terms:
            return 0
        return max(mode_order(k) for k in self.terms)

    def gradings(self):
        return sorted({(k[0], k[1]) for k in self.terms})

    def coeff(self, j, p, k, m):
        return self.terms.get((j, p, tuple(k), m), ActionRational.zero(self.ell))

    def __len__(self):
        return len(self.terms)

    def _compat(self, o):
        if not isinstance(o, PoissonSeries):
            raise TypeError("expected a PoissonSeries")
        if self.ell != o.ell:
            raise DimensionMismatch(f"ell mismatch: {self.ell} vs {o.ell}")
        if self.nmax is None:
            return o.nmax
        if o.nmax is None:
            return self.nmax
        return min(self.nmax, o.nmax)

    # -- ring operations ---------------------------------------------------
    def __add__(self, o):
        nmax = self._compat(o)
        out = PoissonSeries(self.ell, nmax)
        for key, c in self.terms.items():
            out._accumulate(key, c)
        for key, c in o.terms.items():
            out._accumulate(key, c)
        return out

    def __neg__(self):
        out = PoissonSeries(self.ell, self.nmax)
        out.terms = {k: -c for k, c in self.terms.items()}
        return out

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c):
        """Multiply by a constant (int/Fraction/GaussianRational)."""
        c = _gr(c)
        if c.is_zero():
            return PoissonSeries(self.ell, self.nmax)
        out = PoissonSeries(self.ell, self.nmax)
        out.terms = {k: v * c for k, v in self.terms.items()}
        return out

    def scale_rational(self, ar):
        """Multiply by an action-only rational function."""
        if ar.is_zero():
            return PoissonSeries(self.ell, self.nmax)
        out = PoissonSeries(self.ell, self.nmax)
        for k, v in self.terms.items():
            out._accumulate(k, v * ar)
        return out

    def mul(self, o, nmax=None):
        """Cauchy product, truncated at total grading ``nmax``.

        An explicit ``nmax`` overrides the operands' own caps: the caller is
        asserting how far the product is wanted.  Without it, the tighter of
        the two caps applies (the O-convention of graded truncation).
        """
        compat_cap = self._compat(o)
        cap = nmax if nmax is not None else compat_cap
        out = PoissonSeries(self.ell, cap)
        for (j1, p1, k1, m1), c1 in self.terms.items():
            for (j2, p2, k2, m2), c2 in o.terms.items():
                j, p = j1 + j2, p1 + p2
                if cap is not None and j + p > cap:
                    continue
                k = tuple(a + b for a, b in zip(k1, k2))
                out._accumulate((j, p, k, m1 + m2), c1 * c2)
        return out

    def __mul__(self, o):
        if isinstance(o, PoissonSeries):
            return self.mul(o)
        return self.scale(o)

    __rmul__ = __mul__

    def shift_grading(self, dj, dp):
        out = PoissonSeries(self.ell, None if self.nmax is None else self.nmax)
        for (j, p, k, m), c in self.terms.items():
            out._accumulate((j + dj, p + dp, k, m), c)
        return out

    def truncate(self, nmax):
        out = PoissonSeries(self.ell, nmax)
        for key, c in self.terms.items():
            out._accumulate(key, c)
        return out

    # -- structure maps ---------------------------------------------------
    def diff(self, var):
        """Derivative; ``var`` is ('y', i), ('x', i) or 't'."""
        out = PoissonSeries(self.ell, self.nmax)
        if var == "t" or var == ("t",):
            for (j, p, k, m), c in self.terms.items():
                if m:
                    out._accumulate((j, p, k, m), c * (GR_I * m))
            return out
        kind, i = var
        if i >= self.ell:
            raise DimensionMismatch(f"variable index {i} out of range for ell={self.ell}")
        if kind == "x":
            for (j, p, k, m), c in self.terms.items():
                if k[i]:
                    out._accumulate((j, p, k, m), c * (GR_I * k[i]))
            return out
        if kind == "y":
            for key, c in self.terms.items():
                out._accumulate(key, c.diff(i))
            return out
        raise ValueError(f"unknown variable {var!r}")

    def average(self):
        """Keep exactly the (k, m) = (0, 0) modes."""
        zero = (0,) * self.ell
        out = PoissonSeries(self.ell, self.nmax)
        for key, c in self.terms.items():
            if key[2] == zero and key[3] == 0:
                out._accumulate(key, c)
        return out

    def oscillatory(self):
        zero = (0,) * self.ell
        out = PoissonSeries(self.ell, self.nmax)
        for key, c in self.terms.items():
            if key[2] != zero or key[3] != 0:
                out._accumulate(key, c)
        return out

    def project_modes(self, K, side="le"):
        """Split by Fourier order: side 'le' keeps |k|+|m| <= K, 'gt' the rest."""
        if K < 0:
            raise ValueError("K must be >= 0")
        keep_le = side in ("le", "<=", "leq")
        out = PoissonSeries(self.ell, self.nmax)
        for key, c in self.terms.items():
            if (mode_order(key) <= K) == keep_le:
                out._accumulate(key, c)
        return out

    def part(self, j, p):
        """Terms of grading exactly (j, p), gradings preserved."""
        out = PoissonSeries(self.ell, self.nmax)
        for key, c in self.terms.items():
            if key[0] == j and key[1] == p:
                out._accumulate(key, c)
        return out

    def up_to_grading(self, n):
        out = PoissonSeries(self.ell, self.nmax)
        for key, c in self.terms.items():
            if key[0] + key[1] <= n:
                out._accumulate(key, c)
        return out

    def grading_at_least(self, n):
        out = PoissonSeries(self.ell, self.nmax)
        for key, c in self.terms.items():
            if key[0] + key[1] >= n:
                out._accumulate(key, c)
        return out

    def drop_gradings(self):
        """Forget the (eps, mu) grading (collapse onto (0, 0))."""
        out = PoissonSeries(self.ell, self.nmax)
        for (j, p, k, m), c in self.terms.items():
            out._accumulate((0, 0, k, m), c)
        return out

    def conj(self):
        out = PoissonSeries(self.ell, self.nmax)
        for (j, p, k, m), c in self.terms.items():
            out._accumulate((j, p, tuple(-a for a in k), -m), c.conj())
        return out

    def is_real(self):
        """Check the conjugate-symmetry invariant exactly."""
        for (j, p, k, m), c in self.terms.items():
            kk = tuple(-a for a in k)
            other = self.terms.get((j, p, kk, -m))
            if other is None or not (other == c.conj()):
                return False
        return True

    # -- substitution -------------------------------------------------
    def substitute(self, dy=None, dx=None, nmax=None):
        """Taylor-expand self(y + dy, x + dx, t) to total grading ``nmax``.

        ``dy``/``dx`` are lists of PoissonSeries (one per component) with no
        grading-(0,0) part; the expansion then terminates.  For repeated
        substitutions with the same shifts build a SubstOp once instead.
        """
        cap = nmax if nmax is not None else self.nmax
        if cap is None:
            raise ValueError("substitute needs a truncation order")
        return SubstOp(self.ell, dy, dx, cap).apply(self)

    # -- evaluation ----------------------------------------------------
    def evaluate(self, y, x, t, eps=1.0, mu=1.0):
        """Numeric evaluation; returns a complex number (real for real series)."""
        y = np.atleast_1d(np.asarray(y, dtype=complex))
        x = np.atleast_1d(np.asarray(x, dtype=float))
        tot = 0j
        for (j, p, k, m), c in self.terms.items():
            phase = sum(ki * xi for ki, xi in zip(k, x)) + m * t
            tot += (eps ** j) * (mu ** p) * c.eval(y) * cmath.exp(1j * phase)
        return tot

    def __eq__(self, o):
        if not isinstance(o, PoissonSeries):
            return NotImplemented
        if self.ell != o.ell:
            return False
        keys = set(self.terms) | set(o.terms)
        zero = ActionRational.zero(self.ell)
        for k in keys:
            if not (self.terms.get(k, zero) == o.terms.get(k, zero)):
                return False
        return True

    def __repr__(self):
        return f"PoissonSeries(ell={self.ell}, terms={len(self.terms)})"

    def __str__(self):
        from .literals import format_series
        return format_series(self)


class SubstOp:
    """A reusable substitution y -> y + dy, x -> x + dx at a fixed grading
    cap; shift powers and exponential factors are computed once and shared
    across every series pushed through it."""

    def __init__(self, ell, dy, dx, cap):
        self.ell = ell
        self.cap = cap
        dy = list(dy) if dy else None
        dx = list(dx) if dx else None
        for ds in (dy or []) + (dx or []):
            if ds.is_zero():
                continue
            if ds.ell != ell:
                raise DimensionMismatch("shift dimension mismatch")
            if ds.min_grading() == 0:
                raise ValueError("substitution shift has a grading-(0,0) part")
        if dy is not None and all(s.is_zero() for s in dy):
            dy = None
        if dx is not None and all(s.is_zero() for s in dx):
            dx = None
        self.dy = dy
        self.dx = dx
        self.one = PoissonSeries.from_term(ell, 0, 0, (0,) * ell, 0,
                                           ActionRational.const(ell, 1), nmax=cap)
        self.dypow = [self._powers(s) for s in dy] if dy else None
        self.dxpow = [self._powers(s) for s in dx] if dx else None
        self._exp_cache = {}
        self._ypiece_cache = {}

    def _powers(self, ds):
        out = [self.one]
        cur = self.one
        for _ in range(self.cap):
            if ds is None or ds.is_zero():
                out.append(PoissonSeries.zero(self.ell, self.cap))
                continue
            cur = cur.mul(ds, self.cap)
            out.append(cur)
            if cur.is_zero():
                break
        while len(out) <= self.cap:
            out.append(PoissonSeries.zero(self.ell, self.cap))
        return out

    def _exp_factor(self, i, ki, budget):
        keyc = (i, ki, budget)
        got = self._exp_cache.get(keyc)
        if got is not None:
            return got
        acc = PoissonSeries.zero(self.ell, budget)
        coef = GR_ONE
        for b in range(budget + 1):
            if b:
                coef = coef * (GR_I * ki) * Fraction(1, b)
            pw = self.dxpow[i][b] if b < len(self.dxpow[i]) else None
            if pw is None or pw.is_zero():
                if b == 0:
                    acc = acc + self.one.truncate(budget).scale(coef)
                continue
            acc = acc + pw.truncate(budget).scale(coef)
        self._exp_cache[keyc] = acc
        return acc

    def _y_piece(self, a, budget):
        """Product of dy powers for a multi-index, capped at budget."""
        keyc = (a, budget)
        got = self._ypiece_cache.get(keyc)
        if got is not None:
            return got
        piece = self.one.truncate(self.cap)
        for i, ai in enumerate(a):
            if ai:
                pw = self.dypow[i][ai]
                if pw.is_zero():
                    piece = PoissonSeries.zero(self.ell, self.cap)
                    break
                piece = piece.mul(pw, budget)
        self._ypiece_cache[keyc] = piece
        return piece

    def apply(self, series):
        cap = self.cap
        ell = self.ell
        if self.dy is None and self.dx is None:
            return series.truncate(cap)
        out = PoissonSeries(ell, cap)
        for (j, p, k, m), coeff in series.terms.items():
            base = j + p
            if base > cap:
                continue
            budget = cap - base
            y_terms = []
            dy = self.dy

            def walk(i, prefix, cfun, room):
                if i == ell:
                    y_terms.append((tuple(prefix), cfun))
                    return
                cur = cfun
                for d in range(room + 1):
                    if d:
                        cur = cur.diff(i) * Fraction(1, d)
                        if cur.is_zero():
                            break
                    if dy is None and d > 0:
                        break
                    walk(i + 1, prefix + [d], cur, room - d)

            walk(0, [], coeff, budget)
            for a, cder in y_terms:
                tot_a = sum(a)
                if dy is None and tot_a:
                    continue
                piece = self._y_piece(a, budget) if tot_a else self.one.truncate(cap)
                if piece.is_zero():
                    continue
                room = budget - tot_a
                if self.dx is not None:
                    for i, ki in enumerate(k):
                        if ki and not self.dx[i].is_zero():
                            piece = piece.mul(self._exp_factor(i, ki, room), budget)
                            if piece.is_zero():
                                break
                if piece.is_zero():
                    continue
                piece = piece.scale_rational(cder)
                for (j2, p2, k2, m2), c2 in piece.terms.items():
                    jj, pp = j + j2, p + p2
                    if jj + pp > cap:
                        continue
                    kk = tuple(a2 + b2 for a2, b2 in zip(k, k2))
                    out._accumulate((jj, pp, kk, m2 + m), c2)
        return out


class FrequencyMap:
    """The frequency vector omega(y): one rational function per component."""

    def __init__(self, components):
        self.components = list(components)
        for c in self.components:
            if not isinstance(c, ActionRational):
                raise TypeError("frequency components must be ActionRational")
        self.ell = self.components[0].nvars
        if any(c.nvars != self.ell for c in self.components):
            raise DimensionMismatch("frequency component arity mismatch")
        if len(self.components) != self.ell:
            raise DimensionMismatch("frequency map must have ell components")

    def divisor(self, k, m):
        """omega(y) . k + m as an exact rational function."""
        acc = ActionRational.const(self.ell, m)
        for ki, comp in zip(k, self.components):
            if ki:
                acc = acc + comp * ki
        return acc

    def derivative_matrix(self):
        """d omega_i / d y_j as a nested list of ActionRational."""
        return [[c.diff(j) for j in range(self.ell)] for c in self.components]

    def eval(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=complex))
        return np.array([c.eval(y) for c in self.components])

    def as_series(self):
        return [PoissonSeries.action_function(c) for c in self.components]


def solve_homological(omega, rhs, K):
    """Solve omega . psi_x + psi_t + rhs = 0 termwise.

    ``rhs`` must have zero average and Fourier support within order K; the
    solution has coefficient i * r / (omega(y).k + m) on each mode and zero
    average.  Raises NonZeroAverage / ExactResonance accordingly.
    """
    if not rhs.average().is_zero():
        raise NonZeroAverage("homological right-hand side has a (0,0) mode")
    out = PoissonSeries(rhs.ell, rhs.nmax)
    divisors = {}
    for (j, p, k, m), c in rhs.terms.items():
        if mode_order((j, p, k, m)) > K:
            raise ValueError(f"rhs mode {k}, {m} exceeds the cutoff K={K}")
        dk = (k, m)
        dv = divisors.get(dk)
        if dv is None:
            dv = omega.divisor(k, m)
            if dv.is_zero():
                raise ExactResonance(f"divisor omega.k+m vanishes for mode k={k}, m={m}")
            divisors[dk] = dv
        out._accumulate((j, p, k, m), (c * GR_I) / dv)
    return out


def homological_residual(omega, psi, rhs):
    """omega . psi_x + psi_t + rhs, which must be exactly zero."""
    acc = rhs.copy()
    acc = acc + psi.diff("t")
    for i in range(psi.ell):
        acc = acc + psi.diff(("x", i)).scale_rational(omega.components[i])
    return acc


# ---------------------------------------------------------------------------
# weighted analytic norm


def _den_root_check(coeffs, y0, r0, guard=1e-9):
    for ar in coeffs:
        for f in ar.den:
            if f.nvars != 1:
                raise NotImplementedError("pole check implemented for one action variable")
            deg = f.degree()
            arr = np.zeros(deg + 1, dtype=complex)
            for expo, c in f.terms.items():
                arr[deg - expo[0]] = complex(c)
            roots = np.roots(arr)
            if roots.size and np.min(np.abs(roots - complex(y0[0]))) <= r0 * (1 + guard):
                raise PoleInsideDomain(
                    f"denominator root within radius {r0} of y0 (factor {f})")


def weighted_norm(series, y0, r0, s0, eps=None, mu=None, rel_tol=1e-6):
    """Weighted analytic norm sup_y sum_km |c_km(y)| e^{(|k|+|m|) s0}.

    The supremum is over the complex disc of radius r0 about y0 (maximum
    modulus principle: boundary sampling with doubling refinement).  Graded
    series require numeric eps/mu, which multiply each term as eps^j mu^p.
    """
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    if series.is_zero():
        return 0.0
    pieces = []  # (scalar weight, ActionRational)
    for (j, p, k, m), c in series.terms.items():
        if (j or p) and (eps is None or mu is None):
            raise ValueError("graded series: supply eps and mu for the norm")
        scalar = (abs(eps) ** j if j else 1.0) * (abs(mu) ** p if p else 1.0)
        w = math.exp(mode_order((j, p, k, m)) * s0)
        pieces.append((scalar * w, c))
    _den_root_check([c for _, c in pieces], y0, r0)
    if series.ell == 1:
        return _norm_disc_1d(pieces, complex(y0[0]), r0, rel_tol)
    return _norm_ball_nd(pieces, y0, r0, rel_tol)


def _compile_rational_1d(ar):
    num_deg = max((e[0] for e in ar.num.terms), default=0)
    num = np.zeros(num_deg + 1, dtype=complex)
    for expo, c in ar.num.terms.items():
        num[num_deg - expo[0]] = complex(c)
    dens = []
    for f, kpow in ar.den.items():
        deg = f.degree()
        arr = np.zeros(deg + 1, dtype=complex)
        for expo, c in f.terms.items():
            arr[deg - expo[0]] = complex(c)
        dens.append((arr, kpow))
    return num, dens


def _norm_disc_1d(pieces, y0, r0, rel_tol):
    compiled = [(w, _compile_rational_1d(c)) for w, c in pieces]

    def total(ys):
        acc = np.zeros_like(ys, dtype=float)
        for w, (num, dens) in compiled:
            vals = np.polyval(num, ys)
            for arr, kpow in dens:
                vals = vals / np.polyval(arr, ys) ** kpow
            acc += w * np.abs(vals)
        return acc

    if r0 == 0.0:
        return float(total(np.array([y0]))[0])
    n = 64
    prev = None
    for _ in range(16):
        theta = np.arange(n) * (2 * math.pi / n)
        ys = y0 + r0 * np.exp(1j * theta)
        cur = float(np.max(total(ys)))
        if prev is not None and abs(cur - prev) <= rel_tol * max(cur, 1e-300):
            return cur
        prev = cur
        n *= 2
    raise RuntimeError("weighted_norm boundary sampling did not converge")


def _norm_ball_nd(pieces, y0, r0, rel_tol):
    # best-effort for ell > 1: deterministic direction sweep on the sphere
    rng = np.random.default_rng(20120401)
    ell = y0.size

    def total(ys):
        acc = 0.0
        for w, c in pieces:
            acc += w * abs(c.eval(ys))
        return acc

    if r0 == 0.0:
        return total(y0.astype(complex))
    best = 0.0
    n = 256
    prev = None
    for _ in range(8):
        for _ in range(n):
            v = rng.normal(size=ell) + 1j * rng.normal(size=ell)
            v /= np.linalg.norm(v)
            best = max(best, total(y0 + r0 * v))
        if prev is not None and abs(best - prev) <= rel_tol * max(best, 1e-300):
            return best
        prev = best
        n *= 2
    return best


def weighted_norm_vector(series_list, y0, r0, s0, eps=None, mu=None, rel_tol=1e-6):
    """Euclidean combination sqrt(sum of squared component norms)."""
    return math.sqrt(sum(weighted_norm(s, y0, r0, s0, eps, mu, rel_tol) ** 2
                         for s in series_list))
