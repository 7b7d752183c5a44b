"""Symbolic kernels, shift vectors and exponent polynomials.

Kernel expressions are finite sums of words (diamond products of kernel
factors) with exact complex coefficients.  The empty word is the identity
kernel.  A factor is either a named kernel atom or the inverse of another
kernel expression.  Atoms carry a kind that fixes how transposition acts:

    symmetric      K^T = K
    antisymmetric  K^T = -K
    self_adjoint   K^T = K'
    general        K^T kept as a flag
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..cardinal import LambdaRational
from ..exact import ONE, QI

KINDS = ("symmetric", "antisymmetric", "self_adjoint", "general")


# ---------------------------------------------------------------------------
# kernel factors
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class KAtom:
    name: str
    conj: bool = False
    trans: bool = False
    kind: str = field(default="general", compare=False)
    real: bool = field(default=False, compare=False)

    def render(self) -> str:
        return self.name + ("'" if self.conj else "") + ("^T" if self.trans else "")


@dataclass(frozen=True)
class KInv:
    expr: "KExpr"

    def render(self) -> str:
        return f"inv({self.expr.render()})"


def make_atom(name, kind="general", real=False, conj=False, trans=False) -> "KExpr":
    """Atom in normal form, returned as a one-term expression (sign may flip)."""
    if kind not in KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}")
    sign = 1
    if trans:
        if kind == "symmetric":
            trans = False
        elif kind == "antisymmetric":
            trans = False
            sign = -1
        elif kind == "self_adjoint":
            trans = False
            conj = not conj
    if real:
        conj = False
    return KExpr({(KAtom(name, conj, trans, kind, real),): QI(sign)})


def word_render(word) -> str:
    return " . ".join(f.render() for f in word)


def word_key(word):
    return (len(word), word_render(word))


def _cancels(a, b) -> bool:
    if isinstance(b, KInv) and b.expr.is_single_factor(a):
        return True
    if isinstance(a, KInv) and a.expr.is_single_factor(b):
        return True
    return False


def simplify_word(word) -> tuple:
    out = []
    for f in word:
        if out and _cancels(out[-1], f):
            out.pop()
        else:
            out.append(f)
    return tuple(out)


# ---------------------------------------------------------------------------
# kernel expressions
# ---------------------------------------------------------------------------
class KExpr:
    """Immutable sum of words with QI coefficients."""

    __slots__ = ("terms", "_key")

    def __init__(self, terms=None):
        acc: dict = {}
        for word, c in (terms or {}).items():
            c = QI.of(c)
            w = simplify_word(tuple(word))
            acc[w] = acc.get(w, QI(0)) + c
        items = sorted(((w, c) for w, c in acc.items() if not c.is_zero()), key=lambda wc: word_key(wc[0]))
        object.__setattr__(self, "terms", tuple(items))
        object.__setattr__(self, "_key", None)

    def __setattr__(self, name, value):
        raise AttributeError("KExpr is immutable")

    # constructors --------------------------------------------------------
    @classmethod
    def identity(cls, c=1) -> "KExpr":
        return cls({(): c})

    @classmethod
    def zero(cls) -> "KExpr":
        return cls()

    @classmethod
    def of_factor(cls, f, c=1) -> "KExpr":
        return cls({(f,): c})

    # predicates ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_identity_multiple(self) -> bool:
        return len(self.terms) == 1 and self.terms[0][0] == ()

    def is_single_factor(self, f) -> bool:
        return len(self.terms) == 1 and self.terms[0][0] == (f,) and self.terms[0][1] == 1

    def atoms(self) -> set:
        out = set()
        for word, _ in self.terms:
            for f in word:
                if isinstance(f, KAtom):
                    out.add(f)
                else:
                    out |= f.expr.atoms()
        return out

    # arithmetic ----------------------------------------------------------
    def as_dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other: "KExpr") -> "KExpr":
        d = self.as_dict()
        for w, c in other.terms:
            d[w] = d.get(w, QI(0)) + c
        return KExpr(d)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other: "KExpr") -> "KExpr":
        return self + (-other)

    def scale(self, c) -> "KExpr":
        c = QI.of(c)
        return KExpr({w: x * c for w, x in self.terms})

    def __matmul__(self, other: "KExpr") -> "KExpr":
        """Diamond product, fully expanded."""
        d: dict = {}
        for w1, c1 in self.terms:
            for w2, c2 in other.terms:
                w = simplify_word(w1 + w2)
                d[w] = d.get(w, QI(0)) + c1 * c2
        return KExpr(d)

    def transpose(self) -> "KExpr":
        out = KExpr()
        for w, c in self.terms:
            out = out + word_transpose(w).scale(c)
        return out

    def conj(self) -> "KExpr":
        out = KExpr()
        for w, c in self.terms:
            out = out + word_conj(w).scale(c.conjugate())
        return out

    def sym(self) -> "KExpr":
        t = self.transpose()
        if t == self:
            return self
        return (self + t).scale(QI(Fraction(1, 2)))

    def antisym(self) -> "KExpr":
        return (self - self.transpose()).scale(QI(Fraction(1, 2)))

    def subs(self, kmap: dict) -> "KExpr":
        if not kmap:
            return self
        out = KExpr()
        for w, c in self.terms:
            acc = KExpr.identity()
            for f in w:
                acc = acc @ factor_subs(f, kmap)
            out = out + acc.scale(c)
        return out

    def lead_coefficient(self) -> QI:
        return self.terms[0][1] if self.terms else QI(0)

    def normalized(self):
        """(c, E/c) with the first term's coefficient pulled out."""
        c = self.lead_coefficient()
        if c.is_zero():
            return QI(0), self
        return c, self.scale(ONE / c)

    # identity ------------------------------------------------------------
    def key(self) -> str:
        k = self._key
        if k is None:
            k = self.render()
            object.__setattr__(self, "_key", k)
        return k

    def __eq__(self, other):
        return isinstance(other, KExpr) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        return f"KExpr({self.render()})"

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.terms:
            body = word_render(w) if w else ""
            parts.append(_signed_term(c, body))
        return _join_signed(parts)


def _signed_term(c: QI, body: str) -> str:
    """Render ``c * body``; an empty body renders the bare coefficient."""
    if not body:
        return c.render()
    if c == 1:
        return body
    if c == -1:
        return "-" + body
    return f"{c.render()} * {body}"


def _join_signed(parts) -> str:
    text = parts[0]
    for p in parts[1:]:
        text += " - " + p[1:] if p.startswith("-") else " + " + p
    return text


def inv(e: KExpr) -> KExpr:
    """Symbolic inverse with the obvious simplifications."""
    if e.is_zero():
        raise ZeroDivisionError("inverse of the zero kernel")
    if len(e.terms) == 1:
        word, c = e.terms[0]
        out = KExpr.identity(ONE / c)
        for f in reversed(word):
            if isinstance(f, KInv):
                out = out @ f.expr
            else:
                out = out @ KExpr.of_factor(KInv(KExpr.of_factor(f)))
        return out
    c, base = e.normalized()
    return KExpr.of_factor(KInv(base), ONE / c)


def factor_transpose(f) -> KExpr:
    if isinstance(f, KAtom):
        return make_atom(f.name, f.kind, f.real, f.conj, not f.trans)
    return inv(f.expr.transpose())


def factor_conj(f) -> KExpr:
    if isinstance(f, KAtom):
        return make_atom(f.name, f.kind, f.real, not f.conj, f.trans)
    return inv(f.expr.conj())


def factor_subs(f, kmap: dict) -> KExpr:
    if isinstance(f, KAtom):
        if f.name not in kmap:
            return KExpr.of_factor(f)
        r = kmap[f.name]
        if f.trans:
            r = r.transpose()
        if f.conj:
            r = r.conj()
        return r
    return inv(f.expr.subs(kmap))


def word_transpose(word) -> KExpr:
    out = KExpr.identity()
    for f in reversed(word):
        out = out @ factor_transpose(f)
    return out


def word_conj(word) -> KExpr:
    out = KExpr.identity()
    for f in word:
        out = out @ factor_conj(f)
    return out


# ---------------------------------------------------------------------------
# vectors
# ---------------------------------------------------------------------------
@dataclass(frozen=True, order=True)
class VAtom:
    name: str
    conj: bool = False

    def render(self) -> str:
        return self.name + ("'" if self.conj else "")

    def conjugate(self) -> "VAtom":
        return VAtom(self.name, not self.conj)


class VecExpr:
    """Sum of ``c * word . atom`` terms."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        acc: dict = {}
        for (word, atom), c in (terms or {}).items():
            c = QI.of(c)
            key = (simplify_word(tuple(word)), atom)
            acc[key] = acc.get(key, QI(0)) + c
        items = sorted(
            ((k, c) for k, c in acc.items() if not c.is_zero()),
            key=lambda kc: (len(kc[0][0]), kc[0][1].render(), word_render(kc[0][0])),
        )
        object.__setattr__(self, "terms", tuple(items))

    def __setattr__(self, name, value):
        raise AttributeError("VecExpr is immutable")

    @classmethod
    def atom(cls, name, conj=False, c=1) -> "VecExpr":
        return cls({((), VAtom(name, conj)): c})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "VecExpr") -> "VecExpr":
        d = dict(self.terms)
        for k, c in other.terms:
            d[k] = d.get(k, QI(0)) + c
        return VecExpr(d)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "VecExpr":
        c = QI.of(c)
        return VecExpr({k: x * c for k, x in self.terms})

    def apply(self, m: KExpr) -> "VecExpr":
        """m . v"""
        d: dict = {}
        for (word, atom), c in self.terms:
            for w, mc in (m @ KExpr({word: 1})).terms:
                d[(w, atom)] = d.get((w, atom), QI(0)) + c * mc
        return VecExpr(d)

    def conj(self) -> "VecExpr":
        d: dict = {}
        for (word, atom), c in self.terms:
            for w, wc in word_conj(word).terms:
                key = (w, atom.conjugate())
                d[key] = d.get(key, QI(0)) + c.conjugate() * wc
        return VecExpr(d)

    def subs(self, kmap: dict, vmap: dict) -> "VecExpr":
        out = VecExpr()
        for (word, atom), c in self.terms:
            m = KExpr({word: 1}).subs(kmap)
            if atom.name in vmap:
                base = vmap[atom.name]
                if atom.conj:
                    base = base.conj()
            else:
                base = VecExpr({((), atom): 1})
            out = out + base.apply(m).scale(c)
        return out

    def atoms(self) -> set:
        return {atom for (_, atom), _ in self.terms}

    def __eq__(self, other):
        return isinstance(other, VecExpr) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (word, atom), c in self.terms:
            body = " . ".join([f.render() for f in word] + [atom.render()])
            parts.append(_signed_term(c, body))
        return _join_signed(parts)

    def __repr__(self):
        return f"VecExpr({self.render()})"


# ---------------------------------------------------------------------------
# scalar monomials and exponent polynomials
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Bilinear:
    """left . word . right"""

    left: VAtom
    word: tuple
    right: VAtom

    def render(self) -> str:
        return " . ".join([self.left.render()] + [f.render() for f in self.word] + [self.right.render()])

    def sort_key(self):
        return (1, self.render())

    def variables(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class ScalarSym:
    """Named scalar constant; the empty name is the unit monomial."""

    name: str = ""
    conj: bool = False

    def render(self) -> str:
        return self.name + ("'" if self.conj else "") if self.name else "1"

    def sort_key(self):
        return (0, self.render())

    def variables(self):
        return ()


UNIT = ScalarSym()


def canonical_bilinear(left: VAtom, word, right: VAtom):
    """Pick the orientation of ``left . word . right`` with the smaller key.

    Returns (monomial, sign).  An orientation equal to its own transpose with
    sign -1 is returned unchanged; ``ScalarPoly.drop_vanishing`` removes it.
    """
    word = simplify_word(tuple(word))
    m = Bilinear(left, word, right)
    t = word_transpose(word)
    if len(t.terms) != 1:
        return m, QI(1)
    tw, sign = t.terms[0]
    mt = Bilinear(right, tw, left)
    if mt.render() < m.render():
        return mt, sign
    return m, QI(1)


def _lr(x) -> LambdaRational:
    return LambdaRational.of(x)


class ScalarPoly:
    """Sum of monomials with rational-in-Lambda coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        acc: dict = {}
        for m, c in (terms or {}).items():
            c = _lr(c)
            acc[m] = acc.get(m, _lr(0)) + c
        items = sorted(((m, c) for m, c in acc.items() if not c.is_zero()), key=lambda mc: mc[0].sort_key())
        object.__setattr__(self, "terms", tuple(items))

    def __setattr__(self, name, value):
        raise AttributeError("ScalarPoly is immutable")

    @classmethod
    def constant(cls, c) -> "ScalarPoly":
        return cls({UNIT: c})

    @classmethod
    def monomial(cls, m, c=1) -> "ScalarPoly":
        return cls({m: c})

    @classmethod
    def bilinear(cls, u: VecExpr, m: KExpr, v: VecExpr) -> "ScalarPoly":
        """Expand u . m . v into canonical monomials."""
        d: dict = {}
        for (wu, xu), cu in u.terms:
            left = word_transpose(wu)
            for (wv, xv), cv in v.terms:
                mid = left @ m @ KExpr({wv: 1})
                for w, cw in mid.terms:
                    mono, sign = canonical_bilinear(xu, w, xv)
                    d[mono] = d.get(mono, _lr(0)) + _lr(cu * cv * cw * sign)
        return cls(d)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "ScalarPoly") -> "ScalarPoly":
        d = dict(self.terms)
        for m, c in other.terms:
            d[m] = d.get(m, _lr(0)) + c
        return ScalarPoly(d)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "ScalarPoly":
        c = _lr(c)
        return ScalarPoly({m: x * c for m, x in self.terms})

    def map_coefficients(self, fn) -> "ScalarPoly":
        return ScalarPoly({m: fn(c) for m, c in self.terms})

    def drop_vanishing(self) -> "ScalarPoly":
        """Remove monomials that equal minus their own transpose."""
        d = {}
        for m, c in self.terms:
            if isinstance(m, Bilinear) and _self_antisymmetric(m):
                continue
            d[m] = c
        return ScalarPoly(d)

    def subs(self, kmap: dict | None = None, vmap: dict | None = None) -> "ScalarPoly":
        kmap = kmap or {}
        vmap = vmap or {}
        out = ScalarPoly()
        for m, c in self.terms:
            if isinstance(m, ScalarSym):
                out = out + ScalarPoly({m: c})
                continue
            u = VecExpr({((), m.left): 1}).subs(kmap, vmap)
            v = VecExpr({((), m.right): 1}).subs(kmap, vmap)
            mid = KExpr({m.word: 1}).subs(kmap)
            out = out + ScalarPoly.bilinear(u, mid, v).scale(c)
        return out

    def vector_names(self) -> set:
        out = set()
        for m, _ in self.terms:
            for v in m.variables():
                out.add(v.name)
        return out

    def kernel_atoms(self) -> set:
        out = set()
        for m, _ in self.terms:
            if isinstance(m, Bilinear):
                out |= KExpr({m.word: 1}).atoms()
        return out

    def __eq__(self, other):
        return isinstance(other, ScalarPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.terms:
            body = "" if m == UNIT else m.render()
            if c.is_const():
                parts.append(_signed_term(c.const_value(), body))
            else:
                text = c.render()
                parts.append(text if not body else f"{text} * {body}")
        return _join_signed(parts)

    def __repr__(self):
        return f"ScalarPoly({self.render()})"


def _self_antisymmetric(m: Bilinear) -> bool:
    if m.left != m.right:
        return False
    t = word_transpose(m.word)
    return len(t.terms) == 1 and t.terms[0][0] == m.word and t.terms[0][1] == -1


# ---------------------------------------------------------------------------
# grouped exponents (display form that keeps u . M . v factored)
# ---------------------------------------------------------------------------
def render_row(u: VecExpr) -> str:
    """Render ``u`` as a row vector: c * word . x  ->  c * x . word^T."""
    if not u.terms:
        return "0"
    parts = []
    for (word, atom), c in u.terms:
        t = word_transpose(word)
        if len(t.terms) == 1:
            tw, sign = t.terms[0]
            body = " . ".join([atom.render()] + [f.render() for f in tw])
            parts.append(_signed_term(c * sign, body))
        else:
            body = " . ".join([f.render() for f in word] + [atom.render()])
            parts.append(_signed_term(c, body))
    return _join_signed(parts)


def _wrap(text: str, multi: bool) -> str:
    return f"({text})" if multi else text


@dataclass(frozen=True)
class QuadGroup:
    left: VecExpr
    mid: KExpr
    right: VecExpr

    def expand(self) -> ScalarPoly:
        return ScalarPoly.bilinear(self.left, self.mid, self.right)

    def render(self) -> str:
        parts = [_wrap(render_row(self.left), len(self.left.terms) > 1)]
        if not (self.mid.is_identity_multiple() and self.mid.terms[0][1] == 1):
            parts.append(_wrap(self.mid.render(), len(self.mid.terms) > 1))
        parts.append(_wrap(self.right.render(), len(self.right.terms) > 1))
        return " . ".join(parts)

    def orient_key(self):
        lead = self.left.terms[0][1] if self.left.terms else QI(0)
        return (not lead.is_positive_real(), self.render())

    def oriented(self) -> "QuadGroup":
        t = QuadGroup(self.right, self.mid.transpose(), self.left)
        return t if t.orient_key() < self.orient_key() else self

    def sort_key(self):
        return (len(self.left.terms) + len(self.right.terms), self.render())


class Exponent:
    """Sum of coefficient * QuadGroup plus a plain polynomial remainder."""

    __slots__ = ("groups", "rest")

    def __init__(self, groups=(), rest=None):
        acc: dict = {}
        for c, g in groups:
            if g.left.is_zero() or g.right.is_zero() or g.mid.is_zero():
                continue
            if g.expand().drop_vanishing().is_zero():
                continue
            g = g.oriented()
            acc[g] = acc.get(g, _lr(0)) + _lr(c)
        items = sorted(((c, g) for g, c in acc.items() if not c.is_zero()), key=lambda cg: cg[1].sort_key())
        object.__setattr__(self, "groups", tuple(items))
        object.__setattr__(self, "rest", (rest if rest is not None else ScalarPoly()).drop_vanishing())

    def __setattr__(self, name, value):
        raise AttributeError("Exponent is immutable")

    @classmethod
    def of(cls, x) -> "Exponent":
        if isinstance(x, Exponent):
            return x
        if x is None:
            return cls()
        return cls((), x)

    @classmethod
    def quad(cls, c, left: VecExpr, mid: KExpr, right: VecExpr) -> "Exponent":
        return cls(((c, QuadGroup(left, mid, right)),))

    def expanded(self) -> ScalarPoly:
        out = self.rest
        for c, g in self.groups:
            out = out + g.expand().scale(c)
        return out.drop_vanishing()

    def is_zero(self) -> bool:
        return self.expanded().is_zero()

    def __add__(self, other) -> "Exponent":
        other = Exponent.of(other)
        return Exponent(self.groups + other.groups, self.rest + other.rest)

    def scale(self, c) -> "Exponent":
        return Exponent(tuple((x * _lr(c), g) for x, g in self.groups), self.rest.scale(c))

    def subs(self, kmap=None, vmap=None) -> "Exponent":
        kmap = kmap or {}
        vmap = vmap or {}
        groups = tuple(
            (c, QuadGroup(g.left.subs(kmap, vmap), g.mid.subs(kmap), g.right.subs(kmap, vmap)))
            for c, g in self.groups
        )
        return Exponent(groups, self.rest.subs(kmap, vmap))

    def map_coefficients(self, fn) -> "Exponent":
        return Exponent(tuple((fn(c), g) for c, g in self.groups), self.rest.map_coefficients(fn))

    def render(self) -> str:
        parts = []
        if not self.rest.is_zero():
            parts.append(self.rest.render())
        for c, g in self.groups:
            body = g.render()
            if c.is_const():
                parts.append(_signed_term(c.const_value(), body))
            else:
                parts.append(f"{c.render()} * {body}")
        if not parts:
            return "0"
        return _join_signed(parts)
