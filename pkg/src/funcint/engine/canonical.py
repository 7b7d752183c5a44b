"""Reduction of a parsed integrand to a Gaussian quadratic form."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..cardinal import LambdaRational
from ..errors import MixedFlavor, NotGaussian
from ..exact import QI
from .dsl import IntegrandAST, Measure, parse
from .symbolic import (
    KINDS,
    Bilinear,
    KExpr,
    ScalarPoly,
    ScalarSym,
    VecExpr,
    make_atom,
)

HALF = QI(Fraction(1, 2))


def infer_kinds(ast: IntegrandAST, declared: dict | None = None) -> dict:
    """Kernel kinds from how each kernel sits between integration variables.

    Real variable:    q.X.q            -> symmetric
    Complex variable: a'.X.a, a.X.a'   -> self_adjoint
                      a'.X.a', a.X.a   -> symmetric
    Conflicting evidence gives "general"; declarations always win.
    """
    declared = dict(declared or {})
    for name, kind in declared.items():
        if kind not in KINDS:
            raise ValueError(f"unknown kernel kind {kind!r} for {name}")
    variables = set(ast.variables())
    complex_vars = {v for v in variables if ast.is_complex(v)}
    votes: dict = {}
    for t in ast.terms:
        ch = t.chain
        for a in ch[1:-1]:
            votes.setdefault(a.name, set())
        if len(ch) != 3 or ch[0].name not in variables or ch[2].name != ch[0].name:
            continue
        x = ch[1].name
        if ch[0].name in complex_vars:
            kind = "self_adjoint" if ch[0].conj != ch[2].conj else "symmetric"
        else:
            kind = "symmetric"
        votes[x].add(kind)
    kinds = {}
    for name, v in votes.items():
        kinds[name] = v.pop() if len(v) == 1 else "general"
    kinds.update(declared)
    return kinds


def source_polynomial(ast: IntegrandAST, kinds: dict) -> ScalarPoly:
    """Exponent of the integrand as an exact polynomial in the symbols."""
    variables = set(ast.variables())
    out = ScalarPoly()
    for t in ast.terms:
        ch = t.chain
        c = LambdaRational.of(t.coeff)
        if not ch:
            out = out + ScalarPoly.constant(c)
            continue
        if len(ch) == 1:
            if ch[0].name in variables:
                raise NotGaussian(f"integration variable {ch[0].name!r} must be contracted (line {t.span[0]}, column {t.span[1]})")
            out = out + ScalarPoly.monomial(ScalarSym(ch[0].name, ch[0].conj), c)
            continue
        for a in ch[1:-1]:
            if a.name in variables:
                raise NotGaussian(
                    f"term of degree > 2 in {a.name!r} (line {a.span[0]}, column {a.span[1]})"
                )
        mid = KExpr.identity()
        for a in ch[1:-1]:
            mid = mid @ make_atom(a.name, kinds.get(a.name, "general"), conj=a.conj)
        u = VecExpr.atom(ch[0].name, ch[0].conj)
        v = VecExpr.atom(ch[-1].name, ch[-1].conj)
        out = out + ScalarPoly.bilinear(u, mid, v).scale(c)
    return out


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """Gaussian integrand reduced with respect to one integration variable.

    Real:    exp(-q.K.q + q.f + c)
    Complex: exp(-2 a'.K.a - a'.L.a' - a.L'.a - w1c.a - a'.w2 + c)

    ``w1c`` is the full coefficient vector of ``a`` (w1' in the integrand).
    ``constant`` may still contain later integration variables.
    """

    variable: str
    flavor: str
    circle: bool
    K: KExpr
    L: KExpr = field(default_factory=KExpr)
    Lc: KExpr = field(default_factory=KExpr)
    f: VecExpr = field(default_factory=VecExpr)
    w1c: VecExpr = field(default_factory=VecExpr)
    w2: VecExpr = field(default_factory=VecExpr)
    constant: ScalarPoly = field(default_factory=ScalarPoly)
    residue: KExpr = field(default_factory=KExpr)
    unused: bool = False
    remaining: tuple = ()
    source: ScalarPoly = field(default_factory=ScalarPoly)
    kinds: dict = field(default_factory=dict)

    @property
    def is_complex(self) -> bool:
        return self.flavor == "complex"

    def key(self):
        """Structural identity used in equality tests."""
        return (
            self.variable, self.flavor, self.circle, self.K, self.L, self.Lc,
            self.f, self.w1c, self.w2, self.constant, self.unused,
            tuple((m.variable, m.circle) for m in self.remaining),
        )

    def __eq__(self, other):
        return isinstance(other, QuadraticForm) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def summary(self) -> dict:
        out = {"variable": self.variable, "flavor": self.flavor, "K": self.K.render()}
        if self.is_complex:
            out.update(L=self.L.render(), w1c=self.w1c.render(), w2=self.w2.render())
        else:
            out.update(f=self.f.render(), antisymmetric_residue=self.residue.render())
        out["constant"] = self.constant.render()
        return out


def _const(c: LambdaRational, where: str) -> QI:
    if not c.is_const():
        raise NotGaussian(f"coefficient of {where} depends on Lambda")
    return c.const_value()


def _word_expr(word) -> KExpr:
    return KExpr({word: 1})


def reduce_polynomial(poly: ScalarPoly, measure: Measure, remaining=(), kinds=None) -> QuadraticForm:
    """Collect quadratic, linear and constant parts in one variable."""
    var = measure.variable
    if var not in poly.vector_names():
        return QuadraticForm(var, "real", measure.circle, KExpr.identity(), constant=poly,
                             unused=True, remaining=tuple(remaining), source=poly, kinds=dict(kinds or {}))
    flavor = "complex" if any(
        isinstance(m, Bilinear) and any(x.name == var and x.conj for x in m.variables()) for m, _ in poly.terms
    ) else "real"
    A = KExpr()
    K = KExpr()
    L = KExpr()
    Lc = KExpr()
    f = VecExpr()
    w1c = VecExpr()
    w2 = VecExpr()
    rest = {}
    for m, c in poly.terms:
        if isinstance(m, ScalarSym) or var not in (m.left.name, m.right.name):
            rest[m] = c
            continue
        cq = _const(c, m.render())
        W = _word_expr(m.word)
        x, y = m.left, m.right
        if x.name == var and y.name == var:
            if flavor == "real":
                A = A - W.scale(cq)
            elif x.conj and not y.conj:
                K = K - W.scale(cq * HALF)
            elif y.conj and not x.conj:
                K = K - W.transpose().scale(cq * HALF)
            elif x.conj and y.conj:
                L = L - W.sym().scale(cq)
            else:
                Lc = Lc - W.sym().scale(cq)
            continue
        # linear: bring the variable to the left, other vector on the right
        if x.name == var:
            v = VecExpr({(m.word, y): cq})
            side = x
        else:
            v = VecExpr({((), x): cq}).apply(W.transpose())
            side = y
        if flavor == "real":
            f = f + v
        elif side.conj:
            w2 = w2 - v
        else:
            w1c = w1c - v
    constant = ScalarPoly(rest)
    residue = KExpr()
    if flavor == "real":
        K = A.sym()
        residue = A.antisym() if K != A else KExpr()
        if K.is_zero():
            raise NotGaussian(f"no quadratic term in {var!r}")
    else:
        if K.is_zero():
            raise NotGaussian(f"no a'.K.a term in {var!r}")
        if Lc != L.conj():
            raise MixedFlavor(
                f"the a'.L.a' and a.L'.a terms in {var!r} are not conjugates: L={L.render()}, L'={Lc.render()}"
            )
    return QuadraticForm(
        var, flavor, measure.circle, K, L, Lc, f, w1c, w2, constant, residue,
        False, tuple(remaining), poly, dict(kinds or {}),
    )


def canonicalize(ast, kinds: dict | None = None) -> QuadraticForm:
    """Parse if needed, infer kernel kinds, and reduce in the first variable."""
    if isinstance(ast, str):
        ast = parse(ast)
    kinds = infer_kinds(ast, kinds)
    poly = source_polynomial(ast, kinds)
    return reduce_polynomial(poly, ast.measures[0], ast.measures[1:], kinds)
