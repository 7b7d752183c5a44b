"""Exact arithmetic for the cardinal tags Omega and Lambda.

A :class:`CardinalScalar` is a finite complex-rational coefficient times a
product of powers ``base^(a*Omega + b)``.  Bases are positive integers, the
distinguished symbol ``pi``, the tag ``Lambda`` itself, polynomials in Lambda
with unit constant term, or (rarely) other exact complex constants.  The
normal form is unique, so structural equality is value equality for every
expression this package produces.

Omega and Lambda are never related to each other numerically.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ResidualLambda, Unsupported, ZeroBase
from .exact import ONE, QI, ZERO, LPoly, render_fraction


# ---------------------------------------------------------------------------
# exponents
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class OmegaLinear:
    """``omega_coeff * Omega + const_coeff`` with exact rational coefficients."""

    omega_coeff: Fraction = Fraction(0)
    const_coeff: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "omega_coeff", Fraction(self.omega_coeff))
        object.__setattr__(self, "const_coeff", Fraction(self.const_coeff))

    @classmethod
    def of(cls, x) -> "OmegaLinear":
        if isinstance(x, OmegaLinear):
            return x
        return cls(0, Fraction(x))

    def is_zero(self) -> bool:
        return self.omega_coeff == 0 and self.const_coeff == 0

    def is_const(self) -> bool:
        return self.omega_coeff == 0

    def __add__(self, other):
        o = OmegaLinear.of(other)
        return OmegaLinear(self.omega_coeff + o.omega_coeff, self.const_coeff + o.const_coeff)

    __radd__ = __add__

    def __neg__(self):
        return OmegaLinear(-self.omega_coeff, -self.const_coeff)

    def __sub__(self, other):
        return self + (-OmegaLinear.of(other))

    def __rsub__(self, other):
        return OmegaLinear.of(other) - self

    def __mul__(self, other):
        o = OmegaLinear.of(other)
        if not self.is_const() and not o.is_const():
            raise Unsupported("exponent would be quadratic in Omega")
        return OmegaLinear(
            self.omega_coeff * o.const_coeff + o.omega_coeff * self.const_coeff,
            self.const_coeff * o.const_coeff,
        )

    __rmul__ = __mul__

    def at(self, omega_value) -> Fraction:
        return self.omega_coeff * Fraction(omega_value) + self.const_coeff

    def render(self) -> str:
        parts = []
        a, b = self.omega_coeff, self.const_coeff
        if a != 0:
            num, den = a.numerator, a.denominator
            head = "Omega" if abs(num) == 1 else f"{abs(num)}*Omega"
            if den != 1:
                head += f"/{den}"
            parts.append(("-" if num < 0 else "") + head)
        if b != 0 or not parts:
            text = render_fraction(b)
            if parts and not text.startswith("-"):
                text = "+" + text
            parts.append(text)
        return "".join(parts)

    def __repr__(self):
        return f"OmegaLinear({self.render()})"


OMEGA = OmegaLinear(1, 0)


# ---------------------------------------------------------------------------
# rational functions of Lambda
# ---------------------------------------------------------------------------
class LambdaRational:
    """Reduced ratio of Lambda-polynomials with a monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = num if isinstance(num, LPoly) else LPoly.const(num)
        den = LPoly.const(1) if den is None else (den if isinstance(den, LPoly) else LPoly.const(den))
        if den.is_zero():
            raise ZeroDivisionError("LambdaRational with zero denominator")
        if num.is_zero():
            num, den = LPoly(), LPoly.const(1)
        else:
            g = num.gcd(den)
            if g.degree > 0:
                num, _ = num.divmod(g)
                den, _ = den.divmod(g)
            lead = den.lead
            num, den = num * (ONE / lead), den * (ONE / lead)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("LambdaRational is immutable")

    @classmethod
    def of(cls, x) -> "LambdaRational":
        if isinstance(x, LambdaRational):
            return x
        if isinstance(x, LPoly):
            return cls(x)
        return cls(LPoly.const(QI.of(x)))

    @classmethod
    def lam(cls) -> "LambdaRational":
        return cls(LPoly.var())

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def const_value(self) -> QI:
        if not self.is_const():
            raise ResidualLambda(f"{self.render()} still depends on Lambda")
        return self.num.at0() / self.den.at0()

    def __add__(self, other):
        o = LambdaRational.of(other)
        return LambdaRational(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return LambdaRational(-self.num, self.den)

    def __sub__(self, other):
        return self + (-LambdaRational.of(other))

    def __rsub__(self, other):
        return LambdaRational.of(other) - self

    def __mul__(self, other):
        o = LambdaRational.of(other)
        return LambdaRational(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = LambdaRational.of(other)
        if o.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return LambdaRational(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return LambdaRational.of(other) / self

    def conjugate(self) -> "LambdaRational":
        return LambdaRational(self.num.conjugate(), self.den.conjugate())

    def limit(self) -> QI:
        """Value as Lambda -> infinity; only finite limits are supported."""
        if self.num.is_zero():
            return ZERO
        if self.num.degree > self.den.degree:
            raise Unsupported(f"{self.render()} diverges as Lambda -> infinity")
        if self.num.degree < self.den.degree:
            return ZERO
        return self.num.lead / self.den.lead

    def __eq__(self, other):
        if isinstance(other, LambdaRational):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction, QI)):
            return self == LambdaRational.of(other)
        return NotImplemented

    def __hash__(self):
        if self.is_const():
            return hash(self.const_value())
        return hash((self.num, self.den))

    def render(self) -> str:
        if self.den == LPoly.const(1):
            return self.num.render()
        return f"({self.num.render()})/({self.den.render()})"

    def __repr__(self):
        return f"LambdaRational({self.render()})"


# ---------------------------------------------------------------------------
# bases
# ---------------------------------------------------------------------------
_KIND_RANK = {"int": 0, "const": 1, "pi": 2, "lambda": 3, "poly": 4}


@dataclass(frozen=True)
class Base:
    """A normalized base.  ``value`` is an int, QI or LPoly depending on kind."""

    kind: str
    value: object = None

    def sort_key(self):
        if self.kind == "int":
            return (0, self.value, "")
        return (_KIND_RANK[self.kind], 0, self.render())

    def render(self) -> str:
        if self.kind == "int":
            return str(self.value)
        if self.kind == "const":
            text = self.value.render()
            return text if text.startswith("(") else f"({text})"
        if self.kind == "pi":
            return "pi"
        if self.kind == "lambda":
            return "Lambda"
        return f"({self.value.render()})"

    def is_simple(self) -> bool:
        return self.kind in ("int", "pi", "lambda")


PI = Base("pi")
LAMBDA = Base("lambda")


def _factor_int(n: int) -> dict:
    out = {}
    d = 2
    while d * d <= n and d < 100000:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _unit_constant(p: LPoly):
    """Split ``p`` as ``c * Lambda^k * q`` with ``q(0) = 1``."""
    k = p.low_order()
    q = p.shift_down(k)
    c = q.at0()
    return c, k, q * (ONE / c)


def _decompose(x, e: OmegaLinear):
    """Yield normalized (Base, exponent) pairs for ``x ** e``."""
    if isinstance(x, Base):
        yield x, e
        return
    if isinstance(x, LambdaRational):
        if x.is_zero():
            yield from _decompose(ZERO, e)
            return
        cn, kn, qn = _unit_constant(x.num)
        cd, kd, qd = _unit_constant(x.den)
        yield from _decompose(cn / cd, e)
        if kn != kd:
            yield LAMBDA, e * (kn - kd)
        if qn.degree > 0:
            yield Base("poly", qn), e
        if qd.degree > 0:
            yield Base("poly", qd), -e
        return
    if isinstance(x, LPoly):
        yield from _decompose(LambdaRational(x), e)
        return
    c = QI.of(x)
    if c == 1:
        return
    if c.is_zero():
        if e.is_const() and e.const_coeff > 0:
            raise _ZeroValue()
        raise ZeroBase(f"zero base raised to {e.render()}")
    if c.is_positive_real():
        for p, m in _factor_int(c.re.numerator).items():
            yield Base("int", p), e * m
        for p, m in _factor_int(c.re.denominator).items():
            yield Base("int", p), e * (-m)
        return
    yield Base("const", c), e


class _ZeroValue(Exception):
    pass


def _refine_polys(acc: dict) -> None:
    """Rewrite polynomial bases into a pairwise coprime set (in place)."""
    changed = True
    while changed:
        changed = False
        polys = sorted((b for b in acc if b.kind == "poly"), key=Base.sort_key)
        for i in range(len(polys)):
            for j in range(i + 1, len(polys)):
                bi, bj = polys[i], polys[j]
                g = bi.value.gcd(bj.value)
                if g.degree < 1:
                    continue
                g = g * (ONE / g.at0())
                ei, ej = acc.pop(bi), acc.pop(bj)
                for q, ex in ((g, ei + ej), (bi.value.divmod(g)[0], ei), (bj.value.divmod(g)[0], ej)):
                    if q.degree > 0:
                        key = Base("poly", q * (ONE / q.at0()))
                        acc[key] = acc.get(key, OmegaLinear()) + ex
                changed = True
                break
            if changed:
                break


def _normalize(coefficient, items):
    coefficient = QI.of(coefficient)
    acc: dict = {}
    try:
        for x, e in items:
            e = OmegaLinear.of(e)
            if e.is_zero():
                continue
            for b, ex in _decompose(x, e):
                acc[b] = acc.get(b, OmegaLinear()) + ex
    except _ZeroValue:
        return ZERO, ()
    if coefficient.is_zero():
        return ZERO, ()
    _refine_polys(acc)
    out = []
    for b, e in acc.items():
        if e.is_zero():
            continue
        if b.kind == "int":
            whole = math.floor(e.const_coeff)
            if whole:
                coefficient = coefficient * QI(Fraction(b.value) ** whole)
                e = e - whole
        elif b.kind == "const" and e.is_const() and e.const_coeff.denominator == 1:
            coefficient = coefficient * b.value ** int(e.const_coeff)
            continue
        if not e.is_zero():
            out.append((b, e))
    out.sort(key=lambda be: be[0].sort_key())
    return coefficient, tuple(out)


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------
class CardinalScalar:
    """Immutable normalized product ``coefficient * prod(base^exponent)``."""

    __slots__ = ("coefficient", "factors")

    def __init__(self, coefficient=1, factors=()):
        c, fs = _normalize(coefficient, factors)
        object.__setattr__(self, "coefficient", c)
        object.__setattr__(self, "factors", fs)

    def __setattr__(self, name, value):
        raise AttributeError("CardinalScalar is immutable")

    @classmethod
    def power_of(cls, base, exponent) -> "CardinalScalar":
        """``base ** exponent`` for a constant, LambdaRational, LPoly or Base."""
        return cls(1, ((base, OmegaLinear.of(exponent)),))

    @classmethod
    def pi(cls, exponent) -> "CardinalScalar":
        return cls.power_of(PI, exponent)

    @classmethod
    def lam(cls, exponent) -> "CardinalScalar":
        return cls.power_of(LAMBDA, exponent)

    def __mul__(self, other):
        if not isinstance(other, CardinalScalar):
            other = CardinalScalar(other)
        return cs_mul(self, other)

    __rmul__ = __mul__

    def power(self, e) -> "CardinalScalar":
        e = OmegaLinear.of(e)
        items = [(self.coefficient, e)] + [(b, x * e) for b, x in self.factors]
        return CardinalScalar(1, items)

    def inverse(self) -> "CardinalScalar":
        return self.power(-1)

    def __truediv__(self, other):
        if not isinstance(other, CardinalScalar):
            other = CardinalScalar(other)
        return self * other.inverse()

    def is_zero(self) -> bool:
        return self.coefficient.is_zero()

    def is_one(self) -> bool:
        return self.coefficient == 1 and not self.factors

    def has_lambda(self) -> bool:
        return any(b.kind in ("lambda", "poly") for b, _ in self.factors)

    def has_omega(self) -> bool:
        return any(not e.is_const() for _, e in self.factors)

    def as_rational(self) -> LambdaRational:
        """Convert to a LambdaRational when every exponent is a constant integer."""
        out = LambdaRational.of(self.coefficient)
        for b, e in self.factors:
            if not e.is_const() or e.const_coeff.denominator != 1 or b.kind == "pi":
                raise Unsupported(f"{self.render()} is not a rational function of Lambda")
            k = int(e.const_coeff)
            if b.kind == "int":
                v = LambdaRational.of(b.value)
            elif b.kind == "const":
                v = LambdaRational.of(b.value)
            elif b.kind == "lambda":
                v = LambdaRational.lam()
            else:
                v = LambdaRational(b.value)
            for _ in range(abs(k)):
                out = out * v if k > 0 else out / v
        return out

    def __eq__(self, other):
        if isinstance(other, CardinalScalar):
            return self.coefficient == other.coefficient and self.factors == other.factors
        if isinstance(other, (int, Fraction, QI)):
            return self == CardinalScalar(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.coefficient, self.factors))

    def render(self) -> str:
        return render_scalar(self)

    __str__ = render

    def __repr__(self):
        return f"CardinalScalar({self.render()})"


def cs_mul(a: CardinalScalar, b: CardinalScalar) -> CardinalScalar:
    """Normalized product; equal bases merge by summing exponents."""
    return CardinalScalar(a.coefficient * b.coefficient, a.factors + b.factors)


# ---------------------------------------------------------------------------
# limit procedure and summation
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class LimitResult:
    """Outcome of substituting Lambda = 1/eps and letting eps -> 0.

    ``value`` is the leading coefficient; when ``lambda_power`` is nonzero the
    expression still behaves like ``value * Lambda^lambda_power``.
    """

    value: CardinalScalar
    residual_tags: frozenset = field(default_factory=frozenset)
    finite: bool = True
    lambda_power: OmegaLinear = field(default_factory=OmegaLinear)

    def render(self) -> str:
        text = self.value.render()
        if not self.lambda_power.is_zero():
            text += f" * Lambda^({self.lambda_power.render()})"
        return text


def limit_lambda(e: CardinalScalar) -> LimitResult:
    """Evaluate the Lambda -> infinity limit to leading order."""
    eps_power = OmegaLinear()
    items = []
    for b, x in e.factors:
        if b.kind == "lambda":
            eps_power = eps_power - x
        elif b.kind == "poly":
            # p(1/eps) = eps^-d * (lead + O(eps))
            eps_power = eps_power - x * b.value.degree
            items.append((b.value.lead, x))
        else:
            items.append((b, x))
    value = CardinalScalar(e.coefficient, items)
    tags = set()
    if value.has_omega() or not eps_power.is_const():
        tags.add("Omega")
    if not eps_power.is_zero() and not value.is_zero():
        tags.add("Lambda")
        return LimitResult(value, frozenset(tags), False, -eps_power)
    return LimitResult(value, frozenset(tags), not tags)


def limit_rational(r: LambdaRational) -> QI:
    return LambdaRational.of(r).limit()


def sum_pochhammer_series(a, x) -> CardinalScalar:
    """Closed form of sum_N (a)_N x^N / N! = (1 - x)^(-a)."""
    a = OmegaLinear.of(a)
    x = LambdaRational.of(x)
    return CardinalScalar.power_of(LambdaRational.of(1) - x, -a)


def instantiate(e, omega_value: int) -> complex:
    """Numeric value with Omega := omega_value; exact parts are combined first."""
    if isinstance(e, LimitResult):
        if "Lambda" in e.residual_tags:
            raise ResidualLambda(f"{e.render()} still carries Lambda")
        e = e.value
    if e.has_lambda():
        raise ResidualLambda(f"{e.render()} still carries Lambda; apply limit_lambda first")
    exact = e.coefficient
    floats = []
    for b, x in e.factors:
        power = x.at(omega_value)
        if b.kind == "int":
            whole = math.floor(power)
            exact = exact * QI(Fraction(b.value) ** whole)
            rest = power - whole
            if rest:
                floats.append(float(b.value) ** float(rest))
        elif b.kind == "pi":
            floats.append(math.pi ** float(power))
        elif power.denominator == 1:
            exact = exact * b.value ** int(power)
        else:
            floats.append(complex(b.value) ** float(power))
    out = complex(exact)
    for f in floats:
        out = out * f
    return out


# ---------------------------------------------------------------------------
# canonical text
# ---------------------------------------------------------------------------
def _render_const_exponent(b: Fraction) -> str:
    if b.denominator == 1 and b >= 0:
        return "" if b == 1 else f"^{b.numerator}"
    return f"^({render_fraction(b)})"


def render_scalar(s: CardinalScalar) -> str:
    if s.is_zero():
        return "0"
    groups: dict = {}
    consts = []
    for b, e in s.factors:
        if e.omega_coeff != 0:
            groups.setdefault(e.omega_coeff, []).append(b)
        if e.const_coeff != 0:
            consts.append((b, e.const_coeff))
    parts = []
    if s.coefficient != 1 or not s.factors:
        parts.append(s.coefficient.render())
    for a in sorted(groups, reverse=True):
        bases = groups[a]
        exp = OmegaLinear(a, 0).render()
        if len(bases) == 1 and (bases[0].is_simple() or bases[0].kind in ("poly", "const")):
            parts.append(f"{bases[0].render()}^({exp})")
        else:
            parts.append(f"({'*'.join(b.render() for b in bases)})^({exp})")
    for b, c in consts:
        parts.append(f"{b.render()}{_render_const_exponent(c)}")
    return " * ".join(parts)


_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|(pi|Lambda|Omega|i)\b|([()^*/+\-]))")


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"unexpected character at {pos} in {text!r}")
        out.append(m.group(1) or m.group(2) or m.group(3))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


class _ScalarParser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ValueError(f"expected {expected!r}, found {tok!r}")
        self.i += 1
        return tok

    def done(self):
        if self.peek() is not None:
            raise ValueError(f"trailing token {self.peek()!r}")

    # value grammar: CardinalScalar everywhere, sums through LambdaRational
    def expr(self):
        val = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            lhs_r, rhs_r = val.as_rational(), rhs.as_rational()
            val = _from_rational(lhs_r + rhs_r if op == "+" else lhs_r - rhs_r)
        return val

    def term(self):
        val = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            val = val * rhs if op == "*" else val / rhs
        return val

    def unary(self):
        if self.peek() == "-":
            self.take()
            return CardinalScalar(-1) * self.unary()
        return self.power()

    def power(self):
        val = self.primary()
        if self.peek() == "^":
            self.take()
            if self.peek() == "(":
                self.take()
                e = self.oexpr()
                self.take(")")
            else:
                e = OmegaLinear.of(Fraction(self.take()))
            val = val.power(e)
        return val

    def primary(self):
        tok = self.take()
        if tok == "(":
            val = self.expr()
            self.take(")")
            return val
        if tok == "pi":
            return CardinalScalar.pi(1)
        if tok == "Lambda":
            return CardinalScalar.lam(1)
        if tok == "i":
            return CardinalScalar(QI(0, 1))
        if tok[0].isdigit():
            return CardinalScalar(Fraction(tok))
        raise ValueError(f"unexpected token {tok!r}")

    # exponent grammar: linear in Omega
    def oexpr(self):
        val = self.oterm()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.oterm()
            val = val + rhs if op == "+" else val - rhs
        return val

    def oterm(self):
        val = self.ounary()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.ounary()
            if op == "*":
                val = val * rhs
            else:
                if not rhs.is_const() or rhs.const_coeff == 0:
                    raise ValueError("exponent division by non-constant")
                val = val * OmegaLinear.of(1 / rhs.const_coeff)
        return val

    def ounary(self):
        if self.peek() == "-":
            self.take()
            return -self.ounary()
        tok = self.take()
        if tok == "(":
            val = self.oexpr()
            self.take(")")
            return val
        if tok == "Omega":
            return OMEGA
        if tok[0].isdigit():
            return OmegaLinear.of(Fraction(tok))
        raise ValueError(f"unexpected exponent token {tok!r}")


def _from_rational(r: LambdaRational) -> CardinalScalar:
    return CardinalScalar(1, ((r, OmegaLinear.of(1)),))


def parse_scalar(text: str) -> CardinalScalar:
    """Inverse of :func:`render_scalar`."""
    p = _ScalarParser(text)
    val = p.expr()
    p.done()
    return val


def parse_exponent(text: str) -> OmegaLinear:
    p = _ScalarParser(text)
    val = p.oexpr()
    p.done()
    return val
