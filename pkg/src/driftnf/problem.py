"""Problem files: plain-text description of a vector field, its analyticity
domain and run settings.  Series use the exact literal grammar; numeric
entries accept arithmetic expressions with sqrt() and pi.

    dimension = 1
    omega = [ (y) ]
    h10 = -cos(x - t) - cos(x)
    f01 = -sin(x - t) - sin(x)
    g01 = -[ (y) ]
    domain { y0 = (sqrt(5) + 1)/2 ... }
    run { N = 2 ... }
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .bounds import DomainParams
from .errors import ProblemParseError
from .literals import format_rational, format_series, parse_rational, parse_series
from .series import FrequencyMap, PoissonSeries
from .transform import VectorFieldSpec

_NUM_TOKEN = re.compile(r"\s*(\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
                        r"|\d+(?:[eE][+-]?\d+)?|sqrt|pi|[()+\-*/])")


def eval_numeric(text, line=None):
    """Evaluate a numeric expression: + - * / ( ) sqrt pi and literals."""
    pos = 0
    toks = []
    while pos < len(text):
        m = _NUM_TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ProblemParseError(f"bad numeric expression {text!r}", line=line)
        toks.append(m.group(1))
        pos = m.end()
    toks.append(None)
    idx = [0]

    def peek():
        return toks[idx[0]]

    def take():
        t = toks[idx[0]]
        idx[0] += 1
        return t

    def atom():
        t = take()
        if t == "(":
            v = expr()
            if take() != ")":
                raise ProblemParseError(f"unbalanced parens in {text!r}", line=line)
            return v
        if t == "sqrt":
            if take() != "(":
                raise ProblemParseError(f"sqrt needs parentheses in {text!r}", line=line)
            v = expr()
            if take() != ")":
                raise ProblemParseError(f"unbalanced parens in {text!r}", line=line)
            return math.sqrt(v)
        if t == "pi":
            return math.pi
        if t == "-":
            return -atom()
        if t == "+":
            return atom()
        try:
            return float(t)
        except (TypeError, ValueError):
            raise ProblemParseError(f"expected a number in {text!r}", line=line)

    def term():
        v = atom()
        while peek() in ("*", "/"):
            if take() == "*":
                v *= atom()
            else:
                v /= atom()
        return v

    def expr():
        v = term()
        while peek() in ("+", "-"):
            if take() == "+":
                v += term()
            else:
                v -= term()
        return v

    v = expr()
    if peek() is not None:
        raise ProblemParseError(f"trailing input in numeric expression {text!r}",
                                line=line)
    return v


_DOMAIN_KEYS = {"y0", "x0", "r0", "s0", "delta0", "rtilde0", "rtilde0p",
                "R0", "S0", "K", "eps0", "mu0", "tau0", "a", "r2"}
_RUN_KEYS = {"N", "K", "tau0", "eps", "mu", "Y0", "X0", "dt", "T", "stride"}


@dataclass
class ProblemFile:
    name: str
    ell: int
    omega: FrequencyMap
    h10: PoissonSeries
    f01: list
    g01: list
    domain: DomainParams | None = None
    run: dict = field(default_factory=dict)

    def spec(self):
        return VectorFieldSpec(self.omega, self.h10, self.f01, self.g01)

    def dump_canonical(self):
        lines = [f"# {self.name}", f"dimension = {self.ell}"]
        for i in range(self.ell):
            tag = "omega" if self.ell == 1 else f"omega{i + 1}"
            lines.append(f"{tag} = [ {format_rational(self.omega.components[i])} ]")
        lines.append(f"h10 = {format_series(self.h10)}")
        for i in range(self.ell):
            tag = "" if self.ell == 1 else f"_{i + 1}"
            lines.append(f"f01{tag} = {format_series(self.f01[i])}")
            lines.append(f"g01{tag} = {format_series(self.g01[i])}")
        if self.domain is not None:
            d = self.domain
            lines.append("domain {")
            for key in ("y0", "x0", "r0", "s0", "delta0", "rtilde0", "rtilde0p",
                        "R0", "S0"):
                lines.append(f"  {key} = {getattr(d, key)!r}")
            lines.append(f"  K = {d.K}")
            if d.eps0:
                lines.append(f"  eps0 = {d.eps0!r}")
            if d.mu0:
                lines.append(f"  mu0 = {d.mu0!r}")
            if d.tau0:
                lines.append(f"  tau0 = {d.tau0!r}")
            if d.a is not None:
                lines.append(f"  a = {d.a!r}")
            lines.append(f"  r2 = {d.r2}" if isinstance(d.r2, str)
                         else f"  r2 = {d.r2!r}")
            lines.append("}")
        if self.run:
            lines.append("run {")
            for k, v in self.run.items():
                lines.append(f"  {k} = {v!r}")
            lines.append("}")
        return "\n".join(lines) + "\n"


def parse_problem(text, name="problem"):
    """Parse a problem file; raises ProblemParseError with line numbers."""
    ell = None
    series_raw = {}
    domain_raw = {}
    run_raw = {}
    block = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.endswith("{"):
            tag = line[:-1].strip()
            if tag not in ("domain", "run"):
                raise ProblemParseError(f"unknown block {tag!r}", line=lineno)
            if block is not None:
                raise ProblemParseError("nested blocks are not allowed", line=lineno)
            block = tag
            continue
        if line == "}":
            if block is None:
                raise ProblemParseError("unmatched closing brace", line=lineno)
            block = None
            continue
        if "=" not in line:
            raise ProblemParseError(f"expected key = value, got {line!r}", line=lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        if block == "domain":
            if key not in _DOMAIN_KEYS:
                raise ProblemParseError(f"unknown domain key {key!r}", line=lineno)
            domain_raw[key] = (val, lineno)
        elif block == "run":
            if key not in _RUN_KEYS:
                raise ProblemParseError(f"unknown run key {key!r}", line=lineno)
            run_raw[key] = (val, lineno)
        else:
            if key == "dimension":
                ell = int(val)
            else:
                series_raw[key] = (val, lineno)
    if block is not None:
        raise ProblemParseError("unterminated block")
    if ell is None:
        ell = 1

    def parse_ser(key, required=True):
        if ell == 1:
            keys = [key]
        else:
            keys = [f"{key}_{i + 1}" for i in range(ell)]
        out = []
        for kk in keys:
            if kk not in series_raw:
                if required:
                    raise ProblemParseError(f"missing series {kk!r}")
                out.append(PoissonSeries.zero(ell))
                continue
            val, lineno = series_raw.pop(kk)
            try:
                out.append(parse_series(val, ell=ell))
            except ProblemParseError as e:
                raise ProblemParseError(f"in series {kk!r}: {e}", line=lineno)
        return out

    omega_comps = []
    for i in range(ell):
        kk = "omega" if ell == 1 else f"omega{i + 1}"
        if kk not in series_raw:
            raise ProblemParseError(f"missing frequency component {kk!r}")
        val, lineno = series_raw.pop(kk)
        try:
            text_val = val.strip()
            if text_val.startswith("[") and text_val.endswith("]"):
                text_val = text_val[1:-1].strip()
            omega_comps.append(parse_rational(text_val, ell=ell))
        except ProblemParseError as e:
            raise ProblemParseError(f"in frequency {kk!r}: {e}", line=lineno)
    omega = FrequencyMap(omega_comps)

    h10 = parse_ser("h10")[0]
    f01 = parse_ser("f01", required=False)
    g01 = parse_ser("g01", required=False)
    if series_raw:
        leftover = sorted(series_raw)[0]
        raise ProblemParseError(f"unknown series key {leftover!r}",
                                line=series_raw[leftover][1])

    domain = None
    if domain_raw:
        kwargs = {}
        for key, (val, lineno) in domain_raw.items():
            if key == "K":
                kwargs[key] = int(val)
            elif key == "r2":
                kwargs[key] = val if val in ("cp", "r1") else eval_numeric(val, lineno)
            else:
                kwargs[key] = eval_numeric(val, lineno)
        try:
            domain = DomainParams(**kwargs)
        except (TypeError, ValueError) as e:
            raise ProblemParseError(f"bad domain block: {e}")

    run = {}
    for key, (val, lineno) in run_raw.items():
        if key in ("N", "K", "stride"):
            run[key] = int(val)
        else:
            run[key] = eval_numeric(val, lineno)

    return ProblemFile(name=name, ell=ell, omega=omega, h10=h10,
                       f01=f01, g01=g01, domain=domain, run=run)


def load_problem(path):
    with open(path) as fh:
        text = fh.read()
    import os
    return parse_problem(text, name=os.path.splitext(os.path.basename(path))[0])
