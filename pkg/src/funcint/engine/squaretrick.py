"""Anisotropic complex Gaussian via the square of the integral.

The integral is multiplied by a copy of itself in a second variable, and the
pair (a0, a1) is rotated to

    a0 = (a + b)/sqrt(2),    a1 = i (b - a)/sqrt(2).

The rotation is unitary, so the Jacobian is 1, and the a'.L.a' coupling
becomes a cross term between a and b.  Integrating a (isotropic) and then b
(isotropic with the Schur complement kernel) gives the square; the result
is its square root.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import Unsupported
from ..exact import QI
from .canonical import QuadraticForm, reduce_polynomial
from .closedform import ClosedForm, evaluate
from .dsl import Measure
from .symbolic import ScalarPoly, VecExpr

I = QI(0, 1)
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class SquareTrickTrace:
    doubled: ScalarPoly
    rotated: ScalarPoly
    jacobian: QI
    names: tuple
    first: QuadraticForm
    square: ClosedForm
    result: ClosedForm

    def lines(self) -> list:
        a0, a1, a, b = self.names
        return [
            f"square:   exp({self.doubled.render()}) D[{a0}] D[{a1}]",
            f"rotate:   {a0} = ({a} + {b})/sqrt(2), {a1} = i*({b} - {a})/sqrt(2), |det| = {abs_text(self.jacobian)}",
            f"rotated:  exp({self.rotated.render()}) D[{a}] D[{b}]",
            f"squared:  {self.square.render()}",
            f"result:   {self.result.render()}",
        ]

    def render(self) -> str:
        return "\n".join(self.lines())


def abs_text(z: QI) -> str:
    n = z.re * z.re + z.im * z.im
    return "1" if n == 1 else f"sqrt({n})"


def _fresh(base: str, taken: set) -> str:
    name = base
    while name in taken:
        name += "_"
    taken.add(name)
    return name


def _rename(poly: ScalarPoly, var: str, new: str) -> ScalarPoly:
    return poly.subs({}, {var: VecExpr.atom(new)})


def rotation_determinant() -> QI:
    """det of (1/sqrt 2) [[1, 1], [-i, i]]; the 1/2 is the square of 1/sqrt(2)."""
    return (QI(1) * I - QI(1) * (-I)) * QI(HALF)


def square_trick_expand(qf: QuadraticForm) -> SquareTrickTrace:
    if qf.flavor != "complex":
        raise Unsupported("the square trick needs a complex integration variable")
    if not (qf.w1c.is_zero() and qf.w2.is_zero()) or qf.remaining or not qf.constant.is_zero():
        raise Unsupported("the square trick handles the unshifted single-variable form only")
    var = qf.variable
    taken = set(qf.source.vector_names())
    a0, a1 = _fresh(var + "0", taken), _fresh(var + "1", taken)
    a, b = _fresh(var + "a", taken), _fresh(var + "b", taken)
    doubled = _rename(qf.source, var, a0) + _rename(qf.source, var, a1)
    alpha, beta = VecExpr.atom(a), VecExpr.atom(b)
    # every monomial is quadratic, so the two 1/sqrt(2) factors give one 1/2
    rotated = doubled.subs({}, {a0: alpha + beta, a1: (beta - alpha).scale(I)}).scale(QI(HALF))
    rotated = rotated.drop_vanishing()
    first = reduce_polynomial(rotated, Measure(a, qf.circle), (Measure(b, qf.circle),), qf.kinds)
    square = evaluate(first)
    root = square.sqrt()
    result = ClosedForm(root.prefactor, root.dets, root.exp, evaluate(qf, general=True).assumptions)
    return SquareTrickTrace(doubled, rotated, rotation_determinant(), (a0, a1, a, b), first, square, result)
