"""Closed-form results and their evaluation from a quadratic form."""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction

from .. import cardinal
from ..cardinal import OMEGA, CardinalScalar, LambdaRational, OmegaLinear, limit_lambda
from ..errors import AssumptionUnsatisfied, NotPositiveDefinite, NotSelfAdjoint
from ..exact import QI, render_fraction
from ..kernelalg import determinant, require_positive_definite
from .canonical import QuadraticForm, reduce_polynomial
from .numeric import Evaluator, common_grid
from .symbolic import Exponent, KAtom, KExpr, KInv, inv

QUARTER = Fraction(1, 4)
HALF = Fraction(1, 2)

PROPERTIES = ("symmetric", "antisymmetric", "self_adjoint", "positive_definite")


@dataclass(frozen=True)
class Assumption:
    prop: str
    expr: KExpr

    def render(self) -> str:
        return f"{self.prop}({self.expr.render()})"

    def subs(self, kmap) -> "Assumption":
        return Assumption(self.prop, self.expr.subs(kmap))

    def is_trivial(self) -> bool:
        e = self.expr
        if e.is_zero():
            return self.prop != "positive_definite"
        if not e.is_identity_multiple():
            return False
        c = e.terms[0][1]
        if self.prop == "symmetric":
            return True
        if self.prop == "self_adjoint":
            return c.is_real()
        if self.prop == "positive_definite":
            return c.is_positive_real()
        return False


def kind_assumptions(atoms) -> list:
    out = []
    for a in atoms:
        if a.kind != "general":
            out.append(Assumption(a.kind, KExpr.of_factor(KAtom(a.name, kind=a.kind, real=a.real))))
    return out


# ---------------------------------------------------------------------------
# determinant normal form
# ---------------------------------------------------------------------------
def _det_items(e: KExpr, power: Fraction):
    """det(e)^power as (cardinal prefactor, [(kernel, power)])."""
    if e.is_zero():
        raise ZeroDivisionError("determinant of the zero kernel")
    c, f = e.normalized()
    pref = CardinalScalar.power_of(c, OmegaLinear(power, 0)) if c != 1 else CardinalScalar(1)
    if f.is_identity_multiple():
        return pref, []
    if len(f.terms) == 1:
        word = f.terms[0][0]
        items = []
        for factor in word:
            if isinstance(factor, KInv):
                p, sub = _det_items(factor.expr, -power)
            else:
                p, sub = _det_items_atom(factor, power)
            pref = pref * p
            items.extend(sub)
        return pref, items
    t = f.transpose()
    ct, ft = t.normalized()
    if ft.key() < f.key():
        pref = pref * (CardinalScalar.power_of(ct, OmegaLinear(power, 0)) if ct != 1 else CardinalScalar(1))
        return pref, [(ft, power)]
    return pref, [(f, power)]


def _det_items_atom(a: KAtom, power):
    # det(K^T) = det(K); conjugates keep their own determinant
    if a.trans:
        a = KAtom(a.name, a.conj, False, a.kind, a.real)
    return CardinalScalar(1), [(KExpr.of_factor(a), power)]


class ClosedForm:
    """prefactor * prod det(E)^p * exp(exponent), plus the assumptions it needs."""

    __slots__ = ("prefactor", "dets", "exp", "exponent", "assumptions")

    def __init__(self, prefactor=None, dets=(), exponent=None, assumptions=()):
        """``exponent`` is an Exponent (grouped display form) or a ScalarPoly."""
        pref = prefactor if prefactor is not None else CardinalScalar(1)
        merged: dict = {}
        for e, p in dets:
            extra, items = _det_items(e, Fraction(p))
            pref = pref * extra
            for k, q in items:
                merged[k] = merged.get(k, Fraction(0)) + q
        dets_n = tuple(sorted(((k, p) for k, p in merged.items() if p != 0), key=lambda kp: kp[0].key()))
        expo = Exponent.of(exponent)
        seen = {}
        for a in assumptions:
            if not a.is_trivial():
                seen[a.render()] = a
        object.__setattr__(self, "prefactor", pref)
        object.__setattr__(self, "dets", dets_n)
        object.__setattr__(self, "exp", expo)
        object.__setattr__(self, "exponent", expo.expanded())
        object.__setattr__(self, "assumptions", tuple(seen[k] for k in sorted(seen)))

    def __setattr__(self, name, value):
        raise AttributeError("ClosedForm is immutable")

    # algebra -------------------------------------------------------------
    def __mul__(self, other: "ClosedForm") -> "ClosedForm":
        return ClosedForm(
            self.prefactor * other.prefactor,
            self.dets + other.dets,
            self.exp + other.exp,
            self.assumptions + other.assumptions,
        )

    def power(self, e) -> "ClosedForm":
        e = Fraction(e)
        return ClosedForm(
            self.prefactor.power(OmegaLinear(0, e)),
            tuple((k, p * e) for k, p in self.dets),
            self.exp.scale(QI(e)),
            self.assumptions,
        )

    def sqrt(self) -> "ClosedForm":
        return self.power(HALF)

    def subs(self, kernels: dict | None = None, vectors: dict | None = None) -> "ClosedForm":
        kmap = kernels or {}
        return ClosedForm(
            self.prefactor,
            tuple((k.subs(kmap), p) for k, p in self.dets),
            self.exp.subs(kmap, vectors or {}),
            tuple(a.subs(kmap) for a in self.assumptions),
        )

    def times_det(self, e: KExpr, power) -> "ClosedForm":
        return self * ClosedForm(dets=((e, Fraction(power)),))

    def limit(self):
        """(closed form after Lambda -> infinity, LimitResult of the prefactor)."""
        lim = limit_lambda(self.prefactor)
        expo = self.exp.map_coefficients(lambda c: LambdaRational.of(c.limit()))
        return ClosedForm(lim.value, self.dets, expo, self.assumptions), lim

    def residual_tags(self) -> list:
        return sorted(limit_lambda(self.prefactor).residual_tags)

    def has_lambda(self) -> bool:
        return self.prefactor.has_lambda() or any(not c.is_const() for _, c in self.exponent.terms)

    # identity ------------------------------------------------------------
    def value_key(self):
        return (self.prefactor, self.dets, self.exponent)

    def __eq__(self, other):
        return (
            isinstance(other, ClosedForm)
            and self.value_key() == other.value_key()
            and self.assumptions == other.assumptions
        )

    def __hash__(self):
        return hash(self.value_key())

    def render(self) -> str:
        parts = []
        if not self.prefactor.is_one() or (not self.dets and self.exponent.is_zero()):
            parts.append(self.prefactor.render())
        for k, p in self.dets:
            parts.append(f"det({k.render()})^({render_fraction(p)})")
        if not self.exponent.is_zero():
            parts.append(f"exp({self.exp.render()})")
        return " * ".join(parts)

    __str__ = render

    def __repr__(self):
        return f"ClosedForm({self.render()})"

    def render_assumptions(self) -> list:
        return [a.render() for a in self.assumptions]

    def to_dict(self) -> dict:
        return {
            "closed_form": self.render(),
            "assumptions": self.render_assumptions(),
            "residual_tags": self.residual_tags(),
        }


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------
def _measure_factor(qf: QuadraticForm, modes: OmegaLinear) -> CardinalScalar:
    """(2 pi)^(-modes) for circle measures."""
    if not qf.circle:
        return CardinalScalar(1)
    return CardinalScalar.power_of(2, -modes) * CardinalScalar.pi(-modes)


def schur_complement(K: KExpr, L: KExpr, Lc: KExpr) -> KExpr:
    """K - L . inv(K') . L'"""
    return K - (L @ inv(K.conj()) @ Lc)


def _evaluate_one(qf: QuadraticForm, general: bool) -> ClosedForm:
    kinds = kind_assumptions(qf.source.kernel_atoms())
    half_omega = OMEGA * Fraction(1, 2)
    if qf.unused:
        # integral of 1 is the zeroth moment of the measure
        pref = (CardinalScalar.power_of(2, half_omega) * CardinalScalar.pi(half_omega)
                * CardinalScalar.lam(half_omega) * _measure_factor(qf, OMEGA))
        return ClosedForm(pref, (), qf.constant, kinds)
    K = qf.K
    if qf.flavor == "real":
        pref = CardinalScalar.pi(half_omega) * _measure_factor(qf, OMEGA)
        expo = Exponent.of(qf.constant) + Exponent.quad(QUARTER, qf.f, inv(K), qf.f)
        return ClosedForm(pref, ((K, -HALF),), expo, kinds + [Assumption("positive_definite", K)])
    pref = CardinalScalar.pi(OMEGA) * _measure_factor(qf, OMEGA)
    if qf.L.is_zero() and not general:
        expo = Exponent.of(qf.constant) + Exponent.quad(HALF, qf.w1c, inv(K), qf.w2)
        return ClosedForm(pref, ((K, Fraction(-1)),), expo, kinds + [Assumption("positive_definite", K)])
    Kc_inv = inv(K.conj())
    S = schur_complement(K, qf.L, qf.Lc)
    left = qf.w1c - qf.w2.apply((Kc_inv @ qf.Lc).transpose())
    right = qf.w2 - qf.w1c.apply(qf.L @ Kc_inv)
    expo = (
        Exponent.of(qf.constant)
        + Exponent.quad(QUARTER, qf.w1c, inv(K), qf.w2)
        + Exponent.quad(QUARTER, left, inv(S), right)
    )
    assumptions = kinds + [
        Assumption("positive_definite", K),
        Assumption("symmetric", qf.L),
        Assumption("positive_definite", S),
    ]
    return ClosedForm(pref, ((K, -HALF), (S, -HALF)), expo, assumptions)


def evaluate(qf: QuadraticForm, general: bool = False) -> ClosedForm:
    """Closed form of the integral; later variables are integrated in order.

    ``general`` forces the anisotropic complex formula even when L = 0.
    """
    cf = _evaluate_one(qf, general)
    if not qf.remaining:
        return cf
    nxt = reduce_polynomial(cf.exponent, qf.remaining[0], qf.remaining[1:], qf.kinds)
    rest = evaluate(nxt, general)
    return rest * ClosedForm(cf.prefactor, cf.dets, None, cf.assumptions)


# ---------------------------------------------------------------------------
# numeric instantiation
# ---------------------------------------------------------------------------
def check_assumption(a: Assumption, ev: Evaluator) -> None:
    k = ev.kernel(a.expr)
    ok = True
    cause = ""
    if a.prop == "symmetric":
        ok = k.is_symmetric()
    elif a.prop == "antisymmetric":
        ok = k.is_antisymmetric()
    elif a.prop == "self_adjoint":
        ok = k.is_self_adjoint()
    elif a.prop == "positive_definite":
        try:
            require_positive_definite(k, a.expr.render())
        except (NotPositiveDefinite, NotSelfAdjoint) as exc:
            ok = False
            cause = f": {type(exc).__name__}: {exc}"
    if not ok:
        err = AssumptionUnsatisfied(f"{a.render()} does not hold for the bound values{cause}")
        err.assumption = a.render()
        raise err


def _det_power(d: complex, p: Fraction) -> complex:
    if d == 0:
        raise NotPositiveDefinite("determinant is zero", 0.0)
    return cmath.exp(float(p) * cmath.log(d))


def instantiate_closed_form(cf: ClosedForm, bindings: dict, omega_value: int | None = None,
                            check_assumptions: bool = True) -> complex:
    """Numeric value with Omega := D and every symbol bound."""
    grid = common_grid(bindings, omega_value)
    ev = Evaluator(bindings, grid)
    if check_assumptions:
        for a in cf.assumptions:
            check_assumption(a, ev)
    value = complex(cardinal.instantiate(cf.prefactor, grid.dim))
    for k, p in cf.dets:
        value *= _det_power(determinant(ev.kernel(k)), p)
    expo = 0j
    for m, c in cf.exponent.terms:
        expo += complex(c.const_value()) * ev.monomial(m)
    return value * cmath.exp(expo)

