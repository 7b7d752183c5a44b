"""Parser for the integrand language.

    integral := "int" "exp" "(" sum ")" measure+
    sum      := ["+"|"-"] term (("+"|"-") term)*
    term     := [coeff "*"] chain | coeff
    chain    := atom ("." atom)*
    atom     := IDENT ["'"]
    coeff    := NUMBER ["/" NUMBER] | "i" | NUMBER "*" "i"
    measure  := "D[" IDENT "]" | "Dc[" IDENT "]"

``.`` is the diamond contraction and a postfix ``'`` conjugates.  ``i`` is
reserved for the imaginary unit.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import DSLSyntaxError, UnknownToken
from ..exact import QI

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<num>\d+(?:\.\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>[()\[\].'*/+\-])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, punct, eof
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise UnknownToken(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(Token(kind, chunk, line, col))
        for ch in chunk:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Atom:
    name: str
    conj: bool = False
    span: tuple = field(default=(1, 1), compare=False)

    def render(self) -> str:
        return self.name + ("'" if self.conj else "")


@dataclass(frozen=True)
class Term:
    coeff: QI
    chain: tuple
    span: tuple = field(default=(1, 1), compare=False)

    def render_body(self) -> str:
        """Text of the term without its leading sign."""
        c = -self.coeff if self.is_negative() else self.coeff
        chain = ".".join(a.render() for a in self.chain)
        if not chain:
            return _coeff_text(c)
        if c == 1:
            return chain
        return f"{_coeff_text(c)}*{chain}"

    def is_negative(self) -> bool:
        c = self.coeff
        return c.re < 0 if c.re != 0 else c.im < 0


def _coeff_text(c: QI) -> str:
    if c.is_real():
        return c.render()
    if c.re == 0:
        return "i" if c.im == 1 else f"{c.im}*i"  # Fraction str is "a/b"
    raise ValueError("mixed complex coefficients have no DSL spelling")


@dataclass(frozen=True)
class Measure:
    variable: str
    circle: bool = False
    span: tuple = field(default=(1, 1), compare=False)

    def render(self) -> str:
        return f"{'Dc' if self.circle else 'D'}[{self.variable}]"


@dataclass(frozen=True)
class IntegrandAST:
    terms: tuple
    measures: tuple

    def variables(self) -> tuple:
        return tuple(m.variable for m in self.measures)

    def body_names(self) -> set:
        return {a.name for t in self.terms for a in t.chain}

    def unused_variables(self) -> tuple:
        used = self.body_names()
        return tuple(v for v in self.variables() if v not in used)

    def is_complex(self, variable: str) -> bool:
        return any(a.name == variable and a.conj for t in self.terms for a in t.chain)

    def render(self) -> str:
        parts = []
        for k, t in enumerate(self.terms):
            body = t.render_body()
            if k == 0:
                parts.append(("-" if t.is_negative() else "") + body)
            else:
                parts.append((" - " if t.is_negative() else " + ") + body)
        return f"int exp({''.join(parts)}) " + " ".join(m.render() for m in self.measures)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------
class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.open_paren = None

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k=1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def fail(self, message, tok=None):
        tok = tok or self.tok
        if tok.kind == "eof" and self.open_paren is not None:
            o = self.open_paren
            raise DSLSyntaxError(f"unclosed parenthesis opened at line {o.line}, column {o.column}", tok.line, tok.column)
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise DSLSyntaxError(f"{message}, found {found}", tok.line, tok.column)

    def expect(self, text, message=None):
        if self.tok.text != text or self.tok.kind == "eof":
            self.fail(message or f"expected {text!r}")
        return self.advance()

    def integral(self) -> IntegrandAST:
        self.expect_ident("int")
        self.expect_ident("exp")
        self.open_paren = self.expect("(")
        terms = self.sum()
        self.expect(")", "expected '+', '-' or ')'")
        self.open_paren = None
        measures = [self.measure()]
        while self.tok.kind != "eof":
            measures.append(self.measure())
        seen = set()
        for m in measures:
            if m.variable in seen:
                raise DSLSyntaxError(f"variable {m.variable!r} is integrated twice", *m.span)
            seen.add(m.variable)
        return IntegrandAST(tuple(terms), tuple(measures))

    def expect_ident(self, word):
        if self.tok.kind != "ident" or self.tok.text != word:
            self.fail(f"expected {word!r}")
        return self.advance()

    def sum(self) -> list:
        sign = 1
        if self.tok.text in "+-" and self.tok.kind == "punct":
            sign = -1 if self.advance().text == "-" else 1
        terms = [self.term(sign)]
        while self.tok.kind == "punct" and self.tok.text in ("+", "-"):
            sign = -1 if self.advance().text == "-" else 1
            terms.append(self.term(sign))
        return terms

    def term(self, sign: int) -> Term:
        start = self.tok
        coeff = None
        if self.tok.kind == "num" or self.is_imag(self.tok):
            coeff = self.coeff()
            if self.tok.text == "*" and self.tok.kind == "punct":
                self.advance()
                if self.tok.kind != "ident" or self.is_imag(self.tok):
                    self.fail("expected a symbol after '*'")
            else:
                return Term(coeff * sign, (), (start.line, start.column))
        if self.tok.kind != "ident":
            self.fail("expected a term")
        chain = self.chain()
        return Term((coeff if coeff is not None else QI(1)) * sign, tuple(chain), (start.line, start.column))

    @staticmethod
    def is_imag(tok: Token) -> bool:
        return tok.kind == "ident" and tok.text == "i"

    def number(self) -> Fraction:
        return Fraction(self.advance().text)

    def coeff(self) -> QI:
        if self.is_imag(self.tok):
            self.advance()
            return QI(0, 1)
        value = self.number()
        if self.tok.text == "/" and self.tok.kind == "punct":
            self.advance()
            if self.tok.kind != "num":
                self.fail("expected a number after '/'")
            den = self.number()
            if den == 0:
                self.fail("division by zero", self.tokens[self.pos - 1])
            value = value / den
        if self.tok.text == "*" and self.is_imag(self.peek()):
            self.advance()
            self.advance()
            return QI(0, value)
        return QI(value)

    def chain(self) -> list:
        atoms = [self.atom()]
        while self.tok.kind == "punct" and self.tok.text == ".":
            self.advance()
            atoms.append(self.atom())
        return atoms

    def atom(self) -> Atom:
        tok = self.tok
        if tok.kind != "ident":
            self.fail("expected a symbol")
        if self.is_imag(tok):
            self.fail("'i' is the imaginary unit and cannot name a symbol")
        self.advance()
        conj = False
        if self.tok.kind == "punct" and self.tok.text == "'":
            self.advance()
            conj = True
        return Atom(tok.text, conj, (tok.line, tok.column))

    def measure(self) -> Measure:
        tok = self.tok
        if tok.kind != "ident" or tok.text not in ("D", "Dc"):
            self.fail("expected a measure D[x] or Dc[x]")
        self.advance()
        self.expect("[")
        var = self.tok
        if var.kind != "ident" or self.is_imag(var):
            self.fail("expected an integration variable")
        self.advance()
        self.expect("]")
        return Measure(var.text, tok.text == "Dc", (tok.line, tok.column))


def parse(text: str) -> IntegrandAST:
    """Parse integrand text; errors carry line and column."""
    return _Parser(text).integral()
