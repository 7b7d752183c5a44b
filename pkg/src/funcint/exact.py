"""Exact Gaussian-rational numbers and univariate polynomials over them.

Everything here is immutable and hashable so it can key dictionaries in the
symbolic layers above.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    raise TypeError(f"cannot convert {x!r} to an exact rational")


def render_fraction(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class QI:
    """A complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, name, value):
        raise AttributeError("QI is immutable")

    @classmethod
    def of(cls, x) -> "QI":
        if isinstance(x, QI):
            return x
        if isinstance(x, complex):
            return cls(_frac(x.real), _frac(x.imag))
        return cls(x)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = QI.of(other)
        return QI(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = QI.of(other)
        return QI(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return QI.of(other) - self

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __mul__(self, other):
        o = QI.of(other)
        return QI(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = QI.of(other)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by exact zero")
        return self * QI(o.re / n, -o.im / n)

    def __rtruediv__(self, other):
        return QI.of(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("QI only supports integer powers")
        if k < 0:
            return QI(1) / (self ** (-k))
        out = QI(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "QI":
        return QI(self.re, -self.im)

    # predicates -----------------------------------------------------------
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def is_positive_real(self) -> bool:
        return self.im == 0 and self.re > 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, QI):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"QI({self.render()})"

    def render(self) -> str:
        """Canonical text, e.g. ``3/2``, ``i``, ``(1/2+3*i)``."""
        if self.im == 0:
            return render_fraction(self.re)
        if self.im == 1:
            im = "i"
        elif self.im == -1:
            im = "-i"
        else:
            im = f"{render_fraction(self.im)}*i"
        if self.re == 0:
            return im if not im.startswith("-") else im
        sign = "" if im.startswith("-") else "+"
        return f"({render_fraction(self.re)}{sign}{im})"


ZERO = QI(0)
ONE = QI(1)
IMAG = QI(0, 1)


class LPoly:
    """Polynomial in the cardinal tag Lambda with QI coefficients (ascending)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [QI.of(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("LPoly is immutable")

    @classmethod
    def const(cls, c) -> "LPoly":
        return cls((c,))

    @classmethod
    def var(cls) -> "LPoly":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_const(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def lead(self) -> QI:
        return self.coeffs[-1] if self.coeffs else ZERO

    def at0(self) -> QI:
        return self.coeffs[0] if self.coeffs else ZERO

    def low_order(self) -> int:
        """Multiplicity of the root at Lambda = 0."""
        for k, c in enumerate(self.coeffs):
            if not c.is_zero():
                return k
        raise ValueError("zero polynomial has no low order")

    def __add__(self, other):
        o = other if isinstance(other, LPoly) else LPoly.const(other)
        n = max(len(self.coeffs), len(o.coeffs))
        a = self.coeffs + (ZERO,) * (n - len(self.coeffs))
        b = o.coeffs + (ZERO,) * (n - len(o.coeffs))
        return LPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return LPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        o = other if isinstance(other, LPoly) else LPoly.const(other)
        return self + (-o)

    def __rsub__(self, other):
        return LPoly.const(other) - self

    def __mul__(self, other):
        if not isinstance(other, LPoly):
            c = QI.of(other)
            return LPoly(x * c for x in self.coeffs)
        if self.is_zero() or other.is_zero():
            return LPoly()
        out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return LPoly(out)

    __rmul__ = __mul__

    def shift_down(self, k: int) -> "LPoly":
        """Divide by Lambda**k (caller guarantees exactness)."""
        return LPoly(self.coeffs[k:])

    def divmod(self, other: "LPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [ZERO] * max(len(rem) - len(other.coeffs) + 1, 0)
        lead = other.lead
        for k in range(len(q) - 1, -1, -1):
            c = rem[k + other.degree] / lead
            q[k] = c
            if c.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                rem[k + j] = rem[k + j] - c * b
        return LPoly(q), LPoly(rem[: other.degree] if other.degree > 0 else ())

    def monic(self) -> "LPoly":
        return self * (ONE / self.lead)

    def gcd(self, other: "LPoly") -> "LPoly":
        a, b = self, other
        while not b.is_zero():
            _, r = a.divmod(b)
            a, b = b, r
        return a.monic() if not a.is_zero() else a

    def conjugate(self) -> "LPoly":
        return LPoly(c.conjugate() for c in self.coeffs)

    def evaluate(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + (complex(c) if not isinstance(x, QI) else c)
        return acc

    def __eq__(self, other):
        if isinstance(other, LPoly):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(("LPoly", self.coeffs))

    def __repr__(self):
        return f"LPoly({self.render()})"

    def render(self, symbol: str = "Lambda") -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            if k == 0:
                body = c.render()
            else:
                mono = symbol if k == 1 else f"{symbol}^{k}"
                if c == 1:
                    body = mono
                elif c == -1:
                    body = f"-{mono}"
                else:
                    body = f"{c.render()}*{mono}"
            parts.append(body)
        text = parts[0]
        for p in parts[1:]:
            text += p if p.startswith("-") else "+" + p
        return text
