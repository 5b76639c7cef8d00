"""Exact arithmetic layer: Gaussian rationals, multivariate polynomials and
rational functions of the action variables.

Coefficients are complex numbers with exact rational real/imaginary parts
(`GaussianRational`).  Polynomials are sparse exponent-tuple -> coefficient
maps.  Rational functions keep their denominator as a multiset of monic
polynomial factors, which is what the normal-form construction naturally
produces (powers of small divisors); cancellation is by exact division
against each factor, so no general multivariate gcd is ever required.
"""
from __future__ import annotations

from fractions import Fraction

_FR_ZERO = Fraction(0)


from math import gcd as _igcd


class GaussianRational:
    """Complex number with exact rational real and imaginary parts.

    Stored as integers (a, b, d) meaning (a + b i)/d with d > 0 and
    gcd(a, b, d) = 1, so equality and hashing are plain integer work.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, re=0, im=0):
        if isinstance(re, int) and isinstance(im, int):
            self.a, self.b, self.d = re, im, 1
            return
        re = re if isinstance(re, Fraction) else Fraction(re)
        im = im if isinstance(im, Fraction) else Fraction(im)
        d = re.denominator * im.denominator // _igcd(re.denominator, im.denominator)
        self.a = re.numerator * (d // re.denominator)
        self.b = im.numerator * (d // im.denominator)
        self.d = d

    @classmethod
    def _make(cls, a, b, d):
        if d < 0:
            a, b, d = -a, -b, -d
        g = _igcd(_igcd(a, b), d)
        if g > 1:
            a //= g
            b //= g
            d //= g
        out = cls.__new__(cls)
        out.a, out.b, out.d = a, b, d
        return out

    # -- constructors -------------------------------------------------
    @classmethod
    def from_value(cls, v):
        if isinstance(v, GaussianRational):
            return v
        if isinstance(v, complex):
            return cls(Fraction(v.real), Fraction(v.imag))
        return cls(v)

    @property
    def re(self):
        return Fraction(self.a, self.d)

    @property
    def im(self):
        return Fraction(self.b, self.d)

    # -- predicates ----------------------------------------------------
    def is_zero(self):
        return not self.a and not self.b

    def is_real(self):
        return not self.b

    # -- arithmetic ----------------------------------------------------
    def __add__(self, o):
        o = GaussianRational.from_value(o)
        if self.d == o.d:
            return GaussianRational._make(self.a + o.a, self.b + o.b, self.d)
        return GaussianRational._make(self.a * o.d + o.a * self.d,
                                      self.b * o.d + o.b * self.d,
                                      self.d * o.d)

    __radd__ = __add__

    def __neg__(self):
        out = GaussianRational.__new__(GaussianRational)
        out.a, out.b, out.d = -self.a, -self.b, self.d
        return out

    def __sub__(self, o):
        o = GaussianRational.from_value(o)
        if self.d == o.d:
            return GaussianRational._make(self.a - o.a, self.b - o.b, self.d)
        return GaussianRational._make(self.a * o.d - o.a * self.d,
                                      self.b * o.d - o.b * self.d,
                                      self.d * o.d)

    def __rsub__(self, o):
        return GaussianRational.from_value(o) + (-self)

    def __mul__(self, o):
        o = GaussianRational.from_value(o)
        if not self.b and not o.b:
            return GaussianRational._make(self.a * o.a, 0, self.d * o.d)
        return GaussianRational._make(self.a * o.a - self.b * o.b,
                                      self.a * o.b + self.b * o.a,
                                      self.d * o.d)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = GaussianRational.from_value(o)
        n = o.a * o.a + o.b * o.b
        if not n:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational._make((self.a * o.a + self.b * o.b) * o.d,
                                      (self.b * o.a - self.a * o.b) * o.d,
                                      self.d * n)

    def __rtruediv__(self, o):
        return GaussianRational.from_value(o) / self

    def conj(self):
        out = GaussianRational.__new__(GaussianRational)
        out.a, out.b, out.d = self.a, -self.b, self.d
        return out

    # -- comparisons / hashing ------------------------------------------
    def __eq__(self, o):
        if not isinstance(o, GaussianRational):
            try:
                o = GaussianRational.from_value(o)
            except (TypeError, ValueError):
                return NotImplemented
        return self.a == o.a and self.b == o.b and self.d == o.d

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __complex__(self):
        return complex(self.a / self.d, self.b / self.d)

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        if self.re:
            parts.append(str(self.re))
        if self.im:
            s = "i" if self.im == 1 else ("-i" if self.im == -1 else f"{self.im}*i")
            if parts and not s.startswith("-"):
                parts.append("+" + s)
            else:
                parts.append(s)
        return "".join(parts)


GR_ZERO = GaussianRational(0)
GR_ONE = GaussianRational(1)
GR_I = GaussianRational(0, 1)


def _gr(v):
    return v if isinstance(v, GaussianRational) else GaussianRational.from_value(v)


class Poly:
    """Sparse multivariate polynomial over GaussianRational.

    Terms map exponent tuples (one slot per action variable) to nonzero
    coefficients.  The monomial order used for leading terms is graded
    lexicographic.
    """

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars, terms=None):
        self.nvars = nvars
        self.terms = {}
        self._hash = None
        if terms:
            for expo, c in terms.items():
                c = _gr(c)
                if not c.is_zero():
                    self.terms[tuple(expo)] = c

    # -- constructors -------------------------------------------------
    @classmethod
    def const(cls, nvars, c):
        c = _gr(c)
        if c.is_zero():
            return cls(nvars)
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars, i, power=1):
        e = [0] * nvars
        e[i] = power
        return cls(nvars, {tuple(e): GR_ONE})

    @classmethod
    def zero(cls, nvars):
        return cls(nvars)

    # -- predicates ----------------------------------------------------
    def is_zero(self):
        return not self.terms

    def is_const(self):
        return all(all(e == 0 for e in expo) for expo in self.terms)

    def const_value(self):
        return self.terms.get((0,) * self.nvars, GR_ZERO)

    def degree(self):
        """Total degree (-1 for the zero polynomial)."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    # -- arithmetic ----------------------------------------------------
    def _check(self, o):
        if self.nvars != o.nvars:
            raise ValueError("polynomial arity mismatch")

    def __add__(self, o):
        if not isinstance(o, Poly):
            o = Poly.const(self.nvars, o)
        self._check(o)
        terms = dict(self.terms)
        for expo, c in o.terms.items():
            s = terms.get(expo, GR_ZERO) + c
            if s.is_zero():
                terms.pop(expo, None)
            else:
                terms[expo] = s
        out = Poly(self.nvars)
        out.terms = terms
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Poly(self.nvars)
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, o):
        if not isinstance(o, Poly):
            o = Poly.const(self.nvars, o)
        return self + (-o)

    def __rsub__(self, o):
        return Poly.const(self.nvars, o) - self

    def _dense(self):
        deg = self.degree()
        out = [GR_ZERO] * (deg + 1)
        for expo, c in self.terms.items():
            out[expo[0]] = c
        return out

    @staticmethod
    def _from_dense(coeffs):
        out = Poly(1)
        out.terms = {(i,): c for i, c in enumerate(coeffs) if not c.is_zero()}
        return out

    def __mul__(self, o):
        if not isinstance(o, Poly):
            c = _gr(o)
            if c.is_zero():
                return Poly(self.nvars)
            out = Poly(self.nvars)
            out.terms = {e: cc * c for e, cc in self.terms.items()}
            return out
        self._check(o)
        if self.nvars == 1 and self.terms and o.terms:
            a = self._dense()
            b = o._dense()
            c = [GR_ZERO] * (len(a) + len(b) - 1)
            for i, ai in enumerate(a):
                if ai.is_zero():
                    continue
                for j, bj in enumerate(b):
                    if bj.is_zero():
                        continue
                    c[i + j] = c[i + j] + ai * bj
            return Poly._from_dense(c)
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(e, GR_ZERO) + c1 * c2
                if s.is_zero():
                    terms.pop(e, None)
                else:
                    terms[e] = s
        out = Poly(self.nvars)
        out.terms = terms
        return out

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power of Poly")
        out = Poly.const(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __eq__(self, o):
        if not isinstance(o, Poly):
            return NotImplemented
        return self.nvars == o.nvars and self.terms == o.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    # -- calculus / evaluation ------------------------------------------
    def diff(self, i):
        terms = {}
        for expo, c in self.terms.items():
            if expo[i] == 0:
                continue
            e = list(expo)
            k = e[i]
            e[i] -= 1
            terms[tuple(e)] = c * k
        out = Poly(self.nvars)
        out.terms = terms
        return out

    def eval(self, ys):
        """Evaluate at a point (sequence of complex numbers)."""
        tot = 0j
        for expo, c in self.terms.items():
            v = complex(c)
            for e, y in zip(expo, ys):
                if e:
                    v *= y ** e
            tot += v
        return tot

    def conj(self):
        """Coefficient-wise complex conjugate (variables treated as real)."""
        out = Poly(self.nvars)
        out.terms = {e: c.conj() for e, c in self.terms.items()}
        return out

    # -- leading data (graded lex) ----------------------------------------
    @staticmethod
    def _mkey(expo):
        return (sum(expo), expo)

    def lead(self):
        expo = max(self.terms, key=Poly._mkey)
        return expo, self.terms[expo]

    def monic(self):
        """Return (monic polynomial, leading coefficient)."""
        if self.is_zero():
            return self, GR_ONE
        _, lc = self.lead()
        if lc == GR_ONE:
            return self, lc
        out = Poly(self.nvars)
        out.terms = {e: c / lc for e, c in self.terms.items()}
        return out, lc

    def divide_exact(self, d):
        """Return self / d if d divides self exactly, else None."""
        if d.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if self.is_zero():
            return Poly(self.nvars)
        if self.nvars == 1:
            a = self._dense()
            b = d._dense()
            nd = len(b) - 1
            if len(a) - 1 < nd:
                return None
            lead = b[nd]
            q = [GR_ZERO] * (len(a) - nd)
            for i in range(len(a) - 1, nd - 1, -1):
                ai = a[i]
                if ai.is_zero():
                    continue
                qc = ai / lead
                q[i - nd] = qc
                for j in range(nd + 1):
                    if not b[j].is_zero():
                        a[i - nd + j] = a[i - nd + j] - qc * b[j]
            if any(not c.is_zero() for c in a[:nd]):
                return None
            return Poly._from_dense(q)
        rem = self
        qterms = {}
        dlead, dc = d.lead()
        while not rem.is_zero():
            rlead, rc = rem.lead()
            qe = tuple(a - b for a, b in zip(rlead, dlead))
            if any(e < 0 for e in qe):
                return None
            qc = rc / dc
            qterms[qe] = qterms.get(qe, GR_ZERO) + qc
            q1 = Poly(self.nvars, {qe: qc})
            rem = rem - q1 * d
        out = Poly(self.nvars)
        out.terms = {e: c for e, c in qterms.items() if not c.is_zero()}
        return out

    def __repr__(self):
        return f"Poly({self.nvars}, {self.terms!r})"

    def __str__(self):
        from .literals import format_poly
        return format_poly(self)


def poly_gcd_univariate(a, b):
    """Monic gcd of univariate polynomials via the Euclidean algorithm."""
    if a.nvars != 1 or b.nvars != 1:
        raise ValueError("univariate gcd requires nvars == 1")
    while not b.is_zero():
        a, b = b, _poly_rem_univariate(a, b)
    g, _ = a.monic()
    return g


def _poly_rem_univariate(a, b):
    rem = a
    dlead, dc = b.lead()
    dd = dlead[0]
    while not rem.is_zero():
        rlead, rc = rem.lead()
        if rlead[0] < dd:
            break
        q = Poly(1, {(rlead[0] - dd,): rc / dc})
        rem = rem - q * b
    return rem


def poly_xgcd_univariate(a, b):
    """Extended Euclid: returns (g, s, t) with s*a + t*b = g, g monic."""
    zero = Poly.zero(1)
    one = Poly.const(1, 1)
    r0, r1 = a, b
    s0, s1 = one, zero
    t0, t1 = zero, one
    while not r1.is_zero():
        # long division quotient
        q = zero
        rem = r0
        dlead, dc = r1.lead()
        while not rem.is_zero() and rem.lead()[0][0] >= dlead[0]:
            rl, rc = rem.lead()
            term = Poly(1, {(rl[0] - dlead[0],): rc / dc})
            q = q + term
            rem = rem - term * r1
        r0, r1 = r1, rem
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if r0.is_zero():
        return r0, s0, t0
    _, lc = r0.lead()
    inv = GR_ONE / lc
    return r0 * inv, s0 * inv, t0 * inv


_ROOT_CACHE = {}


def _maybe_divisible(num, f):
    """Cheap numeric screen: if f has a root where num is clearly nonzero,
    f cannot divide num.  Conservative (returns True when unsure); the
    exact division afterwards is authoritative."""
    if f.nvars != 1:
        return True
    root = _ROOT_CACHE.get(f)
    if root is None:
        if len(_ROOT_CACHE) > 4096:
            _ROOT_CACHE.clear()
        deg = f.degree()
        try:
            if deg == 1:
                c1 = complex(f.terms.get((1,), GR_ZERO))
                c0 = complex(f.terms.get((0,), GR_ZERO))
                root = -c0 / c1
            else:
                import numpy as _np
                arr = _np.zeros(deg + 1, dtype=complex)
                for expo, c in f.terms.items():
                    arr[deg - expo[0]] = complex(c)
                root = complex(_np.roots(arr)[0])
        except (OverflowError, ZeroDivisionError, ValueError):
            return True
        _ROOT_CACHE[f] = root
    try:
        val = 0j
        scale = 0.0
        for expo, c in num.terms.items():
            term = complex(c) * root ** expo[0]
            val += term
            scale += abs(term)
    except OverflowError:
        return True
    return abs(val) <= 1e-9 * (scale + 1e-300)


class ActionRational:
    """Exact rational function of the action variables.

    Stored as an expanded numerator polynomial over a multiset of monic
    denominator factors ``{factor: power}``.  The constructor cancels each
    factor out of the numerator as far as exact division allows, so the
    representation is canonical whenever the factors are pairwise coprime
    (always the case for the small-divisor factors generated internally).
    """

    __slots__ = ("num", "den", "_expanded")

    def __init__(self, num, den=None):
        if not isinstance(num, Poly):
            raise TypeError("numerator must be a Poly")
        self.num = num
        self.den = {}
        self._expanded = None
        if den:
            scale = GR_ONE
            for f, p in (den.items() if isinstance(den, dict) else den):
                if p == 0 or f.is_const():
                    if f.is_const():
                        c = f.const_value()
                        if c.is_zero():
                            raise ZeroDivisionError("zero denominator factor")
                        for _ in range(p):
                            scale = scale * c
                    continue
                fm, lc = f.monic()
                for _ in range(p):
                    scale = scale * lc
                self.den[fm] = self.den.get(fm, 0) + p
            if scale != GR_ONE:
                self.num = self.num * (GR_ONE / scale)
        self._cancel()

    # -- canonicalisation ------------------------------------------------
    def _cancel(self):
        if self.num.is_zero():
            self.den = {}
            return
        for f in list(self.den):
            fdeg = f.degree()
            while self.den.get(f, 0) > 0:
                if self.num.degree() < fdeg or not _maybe_divisible(self.num, f):
                    break
                q = self.num.divide_exact(f)
                if q is None:
                    break
                self.num = q
                self.den[f] -= 1
            if self.den.get(f) == 0:
                del self.den[f]

    # -- constructors -------------------------------------------------
    @classmethod
    def from_poly(cls, p):
        return cls(p)

    @classmethod
    def const(cls, nvars, c):
        return cls(Poly.const(nvars, c))

    @classmethod
    def zero(cls, nvars):
        return cls(Poly.zero(nvars))

    @property
    def nvars(self):
        return self.num.nvars

    def is_zero(self):
        return self.num.is_zero()

    def is_poly(self):
        return not self.den

    def den_expanded(self):
        if self._expanded is None:
            p = Poly.const(self.nvars, 1)
            for f, k in self.den.items():
                p = p * f ** k
            self._expanded = p
        return self._expanded

    # -- arithmetic ----------------------------------------------------
    def __add__(self, o):
        if not isinstance(o, ActionRational):
            o = ActionRational.const(self.nvars, o)
        if self.den == o.den:
            return ActionRational(self.num + o.num, self.den)
        # lcm of factor multisets
        lcm = dict(self.den)
        for f, k in o.den.items():
            lcm[f] = max(lcm.get(f, 0), k)
        def lift(num, den):
            p = num
            for f, k in lcm.items():
                extra = k - den.get(f, 0)
                if extra:
                    p = p * f ** extra
            return p
        num = lift(self.num, self.den) + lift(o.num, o.den)
        return ActionRational(num, lcm)

    __radd__ = __add__

    def __neg__(self):
        out = ActionRational.__new__(ActionRational)
        out.num = -self.num
        out.den = dict(self.den)
        out._expanded = self._expanded
        return out

    def __sub__(self, o):
        if not isinstance(o, ActionRational):
            o = ActionRational.const(self.nvars, o)
        return self + (-o)

    def __rsub__(self, o):
        return ActionRational.const(self.nvars, o) - self

    def __mul__(self, o):
        if not isinstance(o, ActionRational):
            c = _gr(o)
            out = ActionRational.__new__(ActionRational)
            out.num = self.num * c
            out.den = dict(self.den) if not out.num.is_zero() else {}
            out._expanded = None
            return out
        den = dict(self.den)
        for f, k in o.den.items():
            den[f] = den.get(f, 0) + k
        return ActionRational(self.num * o.num, den)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if not isinstance(o, ActionRational):
            return self * (GR_ONE / _gr(o))
        if o.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        num = self.num * o.den_expanded()
        den = dict(self.den)
        fm, lc = o.num.monic()
        num = num * (GR_ONE / lc)
        if not fm.is_const():
            den[fm] = den.get(fm, 0) + 1
        return ActionRational(num, den)

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power of ActionRational")
        out = ActionRational.const(self.nvars, 1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, o):
        if not isinstance(o, ActionRational):
            if isinstance(o, (int, Fraction, GaussianRational)):
                o = ActionRational.const(self.nvars, o)
            else:
                return NotImplemented
        # cross-multiplication: decidable regardless of factor coprimality
        return (self.num * o.den_expanded()) == (o.num * self.den_expanded())

    def __hash__(self):
        return hash((self.num, frozenset(self.den.items())))

    # -- calculus / evaluation ------------------------------------------
    def diff(self, i):
        """Derivative with respect to action variable i (quotient rule)."""
        num = self.num.diff(i)
        parts = ActionRational(num, self.den)
        for f, k in self.den.items():
            df = f.diff(i)
            if df.is_zero():
                continue
            d = dict(self.den)
            d[f] = d.get(f, 0) + 1
            parts = parts + ActionRational(self.num * df * (-k), d)
        return parts

    def eval(self, ys):
        v = self.num.eval(ys)
        for f, k in self.den.items():
            fv = f.eval(ys)
            if fv == 0:
                raise ZeroDivisionError("pole of rational coefficient")
            v /= fv ** k
        return v

    def conj(self):
        out = ActionRational.__new__(ActionRational)
        out.num = self.num.conj()
        out.den = {}
        out._expanded = None
        scale = GR_ONE
        for f, k in self.den.items():
            fc = f.conj()
            fm, lc = fc.monic()
            for _ in range(k):
                scale = scale * lc
            out.den[fm] = out.den.get(fm, 0) + k
        if scale != GR_ONE:
            out.num = out.num * (GR_ONE / scale)
        return out

    def __repr__(self):
        return f"ActionRational({self.num!r}, {self.den!r})"

    def __str__(self):
        from .literals import format_rational
        return format_rational(self)


def gr_pow(base: GaussianRational, n: int) -> GaussianRational:
    out = GR_ONE
    for _ in range(n):
        out = out * base
    return out


def rational_antiderivative(ar: ActionRational) -> ActionRational:
    """Exact antiderivative of a univariate rational function.

    Uses Hermite-style reduction through the squarefree structure of the
    denominator.  Raises ValueError when the antiderivative is not a
    rational function (nonzero logarithmic part), which in the normal-form
    construction signals broken Hamiltonian bookkeeping.
    """
    if ar.nvars != 1:
        raise NotImplementedError("rational antiderivative implemented for one action variable")
    num = ar.num
    den = ar.den_expanded()
    # polynomial part by long division
    poly_part = Poly.zero(1)
    rem = num
    if den.degree() == 0:
        rem = num * (GR_ONE / den.const_value())
        den = Poly.const(1, 1)
    while not rem.is_zero() and rem.degree() >= den.degree() and den.degree() > 0:
        rl, rc = rem.lead()
        dl, dc = den.lead()
        q = Poly(1, {(rl[0] - dl[0],): rc / dc})
        poly_part = poly_part + q
        rem = rem - q * den
    if den.degree() == 0:
        poly_part = rem
        rem = Poly.zero(1)
    # integrate polynomial part
    iterms = {}
    for expo, c in poly_part.terms.items():
        iterms[(expo[0] + 1,)] = c / (expo[0] + 1)
    result = ActionRational(Poly(1, iterms))
    if rem.is_zero():
        return result
    # proper part rem/den via partial fractions over squarefree factors
    sf = _squarefree_decomposition(den)
    scale = den
    for q, m in sf:
        scale = scale.divide_exact(q ** m)
    # scale is the constant leading factor left over from monic factors
    if scale.degree() != 0:
        raise ValueError("squarefree decomposition incomplete")
    rem = rem * (GR_ONE / scale.const_value())
    for (q, power), a in _partial_fractions(rem, sf):
        result = result + _integrate_num_over_power(a, q, power)
    return result


def _poly_derivative(p):
    return p.diff(0)


def _squarefree_decomposition(p):
    """Yun-style squarefree decomposition: list of (factor, multiplicity)."""
    out = []
    pm, _ = p.monic()
    if pm.degree() <= 0:
        return out
    g = poly_gcd_univariate(pm, _poly_derivative(pm))
    w = pm.divide_exact(g)
    m = 1
    while w.degree() > 0:
        y = poly_gcd_univariate(w, g)
        f = w.divide_exact(y)
        if f.degree() > 0:
            out.append((f, m))
        w = y
        g = g.divide_exact(y)
        m += 1
    return out


def _partial_fractions(num, sf):
    """Split num / prod q^m into [( (q, j), a_j )] with deg a_j < deg q^j.

    sf is the squarefree decomposition. Splitting across coprime moduli uses
    the extended Euclidean algorithm.
    """
    pieces = []
    rest = num
    mods = list(sf)
    for idx, (q, m) in enumerate(mods):
        if rest.is_zero():
            break
        qm = q ** m
        other = Poly.const(1, 1)
        for q2, m2 in mods[idx + 1:]:
            other = other * q2 ** m2
        if other.degree() <= 0:
            a = rest * (GR_ONE / other.const_value())
            pieces.append(((q, m), a))
            rest = Poly.zero(1)
            continue
        _, s, _ = poly_xgcd_univariate(other, qm)
        # 1 = s*other + t*qm with the moduli coprime
        a = _poly_mod(rest * s, qm)
        pieces.append(((q, m), a))
        rest = (rest - a * other).divide_exact(qm)
        if rest is None:
            raise ValueError("partial fraction split failed")
    return pieces


def _poly_divmod(a, b):
    q = Poly.zero(1)
    rem = a
    dl, dc = b.lead()
    while not rem.is_zero() and rem.degree() >= dl[0]:
        rl, rc = rem.lead()
        term = Poly(1, {(rl[0] - dl[0],): rc / dc})
        q = q + term
        rem = rem - term * b
    return q, rem


def _poly_mod(a, b):
    return _poly_divmod(a, b)[1]


def _integrate_num_over_power(a, q, j):
    """∫ a/q^j dy with q squarefree and the fraction proper; log part errors."""
    if a.is_zero():
        return ActionRational.zero(1)
    if j == 1:
        raise ValueError("nonrational antiderivative (logarithmic part)")
    # gcd(q, q') = 1: write a = s*q + t*q' with deg t < deg q
    qd = _poly_derivative(q)
    _, _, t0 = poly_xgcd_univariate(q, qd)
    t = _poly_mod(a * t0, q)
    s = (a - t * qd).divide_exact(q)
    if s is None:
        raise ValueError("Bezout split failed in antiderivative")
    # ∫ t q'/q^j = -t/((j-1) q^{j-1}) + (1/(j-1)) ∫ t'/q^{j-1}
    k = Fraction(1, j - 1)
    lead = ActionRational(t * GaussianRational(-k), {q: j - 1})
    tail_num = _poly_derivative(t) * GaussianRational(k) + s
    if tail_num.is_zero():
        return lead
    return lead + _integrate_num_over_power(tail_num, q, j - 1)
