"""Exact series literals: parse and print.

Two interchangeable surface forms are supported, both exact:

* exponential: ``eps^1 * [ (1/2) / ((y - 1)) ] * exp(i*(2*x - t))``
* real sugar:  ``[ (1) / ((y - 1)) ] * sin(x - t) + cos(2*x)``

``parse_series(format_series(s)) == s`` holds exactly.  Coefficients are
Gaussian rationals (``i`` allowed); decimal floats are rejected to keep the
symbolic layer exact.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .errors import ProblemParseError
from .poly import (GR_I, GR_ONE, ActionRational, GaussianRational, Poly)
from .series import PoissonSeries

_TOKEN_RE = re.compile(r"\s*(\d+|[A-Za-z_][A-Za-z_0-9]*|\*\*|[\^\*\/\+\-\(\)\[\],])")


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ProblemParseError(f"bad character {text[pos]!r} in series literal",
                                    column=pos + 1)
        tok = m.group(1)
        out.append((tok, pos))
        pos = m.end()
    out.append((None, pos))
    return out


class _Parser:
    def __init__(self, text, ell):
        self.text = text
        self.ell = ell
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0]

    def peek2(self):
        return self.toks[self.i + 1][0] if self.i + 1 < len(self.toks) else None

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok[0]

    def expect(self, tok):
        got = self.next()
        if got != tok:
            raise ProblemParseError(f"expected {tok!r}, got {got!r} in {self.text!r}")
        return got

    def fail(self, msg):
        raise ProblemParseError(f"{msg} (near token {self.peek()!r}) in {self.text!r}")

    # ---- variable name handling ----
    def yindex(self, name):
        if name == "y":
            return 0 if self.ell == 1 else None
        m = re.fullmatch(r"y(\d+)", name)
        if m:
            idx = int(m.group(1)) - 1
            if 0 <= idx < self.ell:
                return idx
        return None

    def xindex(self, name):
        if name == "x":
            return 0 if self.ell == 1 else None
        m = re.fullmatch(r"x(\d+)", name)
        if m:
            idx = int(m.group(1)) - 1
            if 0 <= idx < self.ell:
                return idx
        return None

    # ---- series := term (('+'|'-') term)* ----
    def series(self):
        out = PoissonSeries.zero(self.ell)
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.next() == "-" else 1
        out = out + self.term(sign)
        while self.peek() in ("+", "-"):
            sign = -1 if self.next() == "-" else 1
            out = out + self.term(sign)
        if self.peek() is not None:
            self.fail("trailing input")
        return out

    # ---- term := factor ('*' factor)* with optional '/' NUMBER ----
    def term(self, sign):
        j = p = 0
        coeff = ActionRational.const(self.ell, sign)
        mode = None  # (k, m)
        while True:
            tok = self.peek()
            if tok == "eps" or tok == "mu":
                self.next()
                n = 1
                if self.peek() == "^":
                    self.next()
                    n = int(self.expect_number())
                if tok == "eps":
                    j += n
                else:
                    p += n
            elif tok == "[":
                self.next()
                coeff = coeff * self.rational()
                self.expect("]")
            elif tok == "i":
                self.next()
                coeff = coeff * GR_I
            elif tok in ("sin", "cos", "exp"):
                if mode is not None:
                    self.fail("two trigonometric factors in one term")
                mode = self.trig(tok)
                coeff = coeff * mode[2] if mode[2] is not None else coeff
            elif tok is not None and tok.isdigit():
                num = Fraction(int(self.next()))
                if self.peek() == "/":
                    self.next()
                    num /= int(self.expect_number())
                if self.peek() == "^":
                    self.next()
                    num = num ** int(self.expect_number())
                coeff = coeff * GaussianRational(num)
            elif tok == "(":
                # bare polynomial factor
                self.next()
                coeff = coeff * ActionRational(self.polyexpr())
                self.expect(")")
            else:
                yi = self.yindex(tok) if tok else None
                if yi is not None:
                    self.next()
                    n = 1
                    if self.peek() == "^":
                        self.next()
                        n = int(self.expect_number())
                    coeff = coeff * ActionRational(Poly.var(self.ell, yi, n))
                else:
                    self.fail("expected a factor")
            if self.peek() == "*":
                self.next()
                continue
            break
        out = PoissonSeries.zero(self.ell)
        if mode is None:
            k, m = (0,) * self.ell, 0
            out = out + PoissonSeries.from_term(self.ell, j, p, k, m, coeff)
        else:
            kind, (k, m), _ = mode
            if kind == "exp":
                out = out + PoissonSeries.from_term(self.ell, j, p, k, m, coeff)
            else:
                half = coeff * GaussianRational(Fraction(1, 2))
                mk = tuple(-a for a in k)
                if kind == "cos":
                    out = out + PoissonSeries.from_term(self.ell, j, p, k, m, half)
                    out = out + PoissonSeries.from_term(self.ell, j, p, mk, -m, half)
                else:  # sin = (e^{i th} - e^{-i th}) / 2i
                    c = half * (-GR_I)
                    out = out + PoissonSeries.from_term(self.ell, j, p, k, m, c)
                    out = out + PoissonSeries.from_term(self.ell, j, p, mk, -m, -c)
        return out

    def expect_number(self):
        tok = self.next()
        if tok is None or not tok.isdigit():
            self.fail("expected a number")
        return tok

    # ---- trig := ('sin'|'cos')'(' lincomb ')' | 'exp' '(' 'i' '*' '(' lincomb ')' ')'
    def trig(self, kind):
        self.expect(kind)
        self.expect("(")
        if kind == "exp":
            self.expect("i")
            self.expect("*")
            self.expect("(")
            km = self.lincomb()
            self.expect(")")
            self.expect(")")
            return ("exp", km, None)
        km = self.lincomb()
        self.expect(")")
        return (kind, km, None)

    def lincomb(self):
        k = [0] * self.ell
        m = 0
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.next() == "-" else 1
        while True:
            n = 1
            tok = self.peek()
            if tok is not None and tok.isdigit():
                n = int(self.next())
                if self.peek() == "*":
                    self.next()
            tok = self.next()
            if tok == "t":
                m += sign * n
            else:
                xi = self.xindex(tok) if tok else None
                if xi is None:
                    self.fail("expected an angle or t in phase")
                k[xi] += sign * n
            if self.peek() in ("+", "-"):
                sign = -1 if self.next() == "-" else 1
                continue
            break
        return (tuple(k), m)

    # ---- rational := polyexpr ['/' denominator] ----
    def rational(self):
        num = self.polyatomchain()
        if self.peek() == "/":
            self.next()
            den = self.denominator()
            return ActionRational(num, den)
        return ActionRational(num)

    def polyatomchain(self):
        # product of atoms forming the numerator, usually a single ( ... )
        p = self.polyatom()
        while self.peek() == "*":
            self.next()
            p = p * self.polyatom()
        return p

    def denominator(self):
        factors = list(self.denfactor())
        while self.peek() == "*":
            self.next()
            factors.extend(self.denfactor())
        return factors

    def denfactor(self):
        """One denominator factor; parenthesised groups keep their structure."""
        if self.peek() == "(":
            mark = self.i
            self.next()
            try:
                inner = self.denominator()
                self.expect(")")
            except ProblemParseError:
                # not a factor chain: plain polynomial sum in parentheses
                self.i = mark
                f = self.polyatom()
                n = 1
                if self.peek() == "^":
                    self.next()
                    n = int(self.expect_number())
                return [(f, n)]
            n = 1
            if self.peek() == "^":
                self.next()
                n = int(self.expect_number())
            return [(f, k * n) for f, k in inner]
        f = self.polyterm_single()
        n = 1
        if self.peek() == "^":
            self.next()
            n = int(self.expect_number())
        return [(f, n)]

    def polyatom(self):
        tok = self.peek()
        if tok == "(":
            self.next()
            p = self.polyexpr()
            self.expect(")")
            if self.peek() == "^":
                self.next()
                p = p ** int(self.expect_number())
            return p
        return self.polyterm_single()

    # ---- polynomial expression grammar: + - * ^ over y-vars, numbers, i ----
    def polyexpr(self):
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.next() == "-" else 1
        p = self.polyterm() * sign
        while self.peek() in ("+", "-"):
            sign = -1 if self.next() == "-" else 1
            p = p + self.polyterm() * sign
        return p

    def polyterm(self):
        p = self.polyfactor()
        while self.peek() == "*" or (self.peek() == "/" and self.peek2() is not None
                                     and self.peek2().isdigit()):
            if self.next() == "*":
                p = p * self.polyfactor()
            else:
                p = p * GaussianRational(Fraction(1, int(self.expect_number())))
        return p

    def polyfactor(self):
        tok = self.peek()
        if tok == "(":
            self.next()
            p = self.polyexpr()
            self.expect(")")
            if self.peek() == "^":
                self.next()
                p = p ** int(self.expect_number())
            return p
        return self.polyterm_single()

    def polyterm_single(self):
        tok = self.next()
        if tok is None:
            self.fail("unexpected end of polynomial")
        if tok.isdigit():
            num = Fraction(int(tok))
            if self.peek() == "/":
                self.next()
                num /= int(self.expect_number())
            p = Poly.const(self.ell, GaussianRational(num))
        elif tok == "i":
            p = Poly.const(self.ell, GR_I)
        else:
            yi = self.yindex(tok)
            if yi is None:
                self.fail(f"unknown symbol {tok!r} in polynomial")
            p = Poly.var(self.ell, yi)
        if self.peek() == "^":
            self.next()
            p = p ** int(self.expect_number())
        return p


def parse_series(text, ell=1):
    """Parse a series literal into a PoissonSeries."""
    return _Parser(text, ell).series()


def parse_rational(text, ell=1):
    """Parse a rational-function literal like ``(1 - 2*y)/((y - 1)*(y))``."""
    p = _Parser(text, ell)
    r = p.rational()
    if p.peek() is not None:
        p.fail("trailing input after rational")
    return r


# ---------------------------------------------------------------------------
# printing


def _fmt_fraction(fr):
    return str(fr)


def _fmt_gaussian(c, need_parens=True):
    if c.im == 0:
        s = _fmt_fraction(c.re)
        return s
    if c.re == 0:
        if c.im == 1:
            return "i"
        if c.im == -1:
            return "-i"
        return f"{_fmt_fraction(c.im)}*i"
    s = f"{_fmt_fraction(c.re)}"
    s += f" + {_fmt_fraction(c.im)}*i" if c.im > 0 else f" - {_fmt_fraction(-c.im)}*i"
    return f"({s})" if need_parens else s


def _var_name(prefix, i, ell):
    return prefix if ell == 1 else f"{prefix}{i + 1}"


def format_poly(p):
    if p.is_zero():
        return "0"
    bits = []
    for expo in sorted(p.terms, key=lambda e: (-sum(e), tuple(-x for x in e))):
        c = p.terms[expo]
        mono = "*".join(
            _var_name("y", i, p.nvars) + (f"^{e}" if e > 1 else "")
            for i, e in enumerate(expo) if e)
        if not mono:
            bits.append(_fmt_gaussian(c, need_parens=False))
        elif c == GR_ONE:
            bits.append(mono)
        elif c == GaussianRational(-1):
            bits.append(f"-{mono}")
        else:
            bits.append(f"{_fmt_gaussian(c)}*{mono}")
    out = bits[0]
    for b in bits[1:]:
        out += f" - {b[1:]}" if b.startswith("-") else f" + {b}"
    return out


def format_rational(ar):
    num = f"({format_poly(ar.num)})"
    if not ar.den:
        return num
    dbits = []
    for f in sorted(ar.den, key=lambda f: (f.degree(), format_poly(f))):
        k = ar.den[f]
        dbits.append(f"({format_poly(f)})" + (f"^{k}" if k > 1 else ""))
    return num + "/" + "*".join(dbits)


def _fmt_phase(k, m, ell):
    bits = []
    for i, ki in enumerate(k):
        if ki:
            name = _var_name("x", i, ell)
            bits.append((ki, name))
    if m:
        bits.append((m, "t"))
    out = ""
    for coef, name in bits:
        mag = abs(coef)
        piece = name if mag == 1 else f"{mag}*{name}"
        if not out:
            out = piece if coef > 0 else f"-{piece}"
        else:
            out += f" + {piece}" if coef > 0 else f" - {piece}"
    return out


def _sort_key(key):
    j, p, k, m = key
    return (j + p, j, sum(abs(a) for a in k) + abs(m), tuple(-a for a in k), -m)


def format_series(series, sugar=True):
    """Print a series; ``sugar`` uses sin/cos for conjugate mode pairs."""
    if series.is_zero():
        return "0"
    if sugar and series.is_real():
        return _format_series_real(series)
    bits = []
    for key in sorted(series.terms, key=_sort_key):
        j, p, k, m = key
        c = series.terms[key]
        factors = []
        if j:
            factors.append(f"eps^{j}" if j > 1 else "eps")
        if p:
            factors.append(f"mu^{p}" if p > 1 else "mu")
        factors.append(f"[ {format_rational(c)} ]")
        if any(k) or m:
            factors.append(f"exp(i*({_fmt_phase(k, m, series.ell)}))")
        bits.append(" * ".join(factors))
    return " + ".join(bits)


def _format_series_real(series):
    from .poly import GR_I
    seen = set()
    bits = []
    half = GaussianRational(Fraction(1, 2))
    for key in sorted(series.terms, key=_sort_key):
        if key in seen:
            continue
        j, p, k, m = key
        c = series.terms[key]
        zero_mode = not any(k) and m == 0
        if zero_mode:
            entry = _one_real_entry(j, p, None, c, None, series.ell)
            bits.append(entry)
            seen.add(key)
            continue
        neg = (j, p, tuple(-a for a in k), -m)
        # pick the representative whose first nonzero phase entry is positive
        phase = list(k) + [m]
        first = next(v for v in phase if v)
        if first < 0:
            continue  # partner will handle it
        seen.add(key)
        seen.add(neg)
        cbar = series.terms[neg]
        a = c + cbar            # cos coefficient
        b = (c - cbar) * GR_I   # sin coefficient
        entry = _one_real_entry(j, p, (k, m), a, b, series.ell)
        bits.append(entry)
    out = ""
    for b in bits:
        if not b:
            continue
        if not out:
            out = b
        else:
            out += f" - {b[1:]}" if b.startswith("-") else f" + {b}"
    return out or "0"


def _one_real_entry(j, p, mode, a, b, ell):
    prefix = []
    if j:
        prefix.append(f"eps^{j}" if j > 1 else "eps")
    if p:
        prefix.append(f"mu^{p}" if p > 1 else "mu")
    pieces = []
    if mode is None:
        pieces.append(f"[ {format_rational(a)} ]")
    else:
        k, m = mode
        phase = _fmt_phase(k, m, ell)
        if not a.is_zero():
            pieces.append(f"[ {format_rational(a)} ] * cos({phase})")
        if not b.is_zero():
            pieces.append(f"[ {format_rational(b)} ] * sin({phase})")
    out = []
    for piece in pieces:
        out.append(" * ".join(prefix + [piece]) if prefix else piece)
    return " + ".join(out)
