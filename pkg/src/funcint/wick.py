"""Wick-pairing combinatorics for the moments of the functional measure.

Identity kernels ``1(k_a, k_b)`` are edges of a :class:`ContractionGraph`;
integrating a wave vector fuses its two edges, and every closed loop that is
consumed contributes one factor of Omega.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .cardinal import PI, CardinalScalar, LambdaRational, OmegaLinear
from .errors import CapExceeded, DegreeMismatch, OddOrder

DEFAULT_PAIRING_CAP = 12


# ---------------------------------------------------------------------------
# pairings
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Pairing:
    pairs: tuple

    def __post_init__(self):
        pairs = tuple(sorted(tuple(sorted(p)) for p in self.pairs))
        object.__setattr__(self, "pairs", pairs)
        seen = [i for p in pairs for i in p]
        if sorted(seen) != list(range(1, len(seen) + 1)):
            raise ValueError(f"{pairs} does not partition 1..{len(seen)}")

    @property
    def n(self) -> int:
        return len(self.pairs)

    def render(self) -> str:
        return "{" + ",".join(f"({a},{b})" for a, b in self.pairs) + "}"

    __str__ = render


def _check_even(two_n: int) -> None:
    if two_n % 2:
        raise OddOrder(f"order {two_n} is odd; odd moments vanish")


def count_pairings(two_n: int) -> int:
    """Number of perfect matchings of ``two_n`` items, (2n)!/(2^n n!)."""
    _check_even(two_n)
    if two_n < 0:
        raise ValueError("order must be non-negative")
    n = two_n // 2
    return math.factorial(two_n) // (2**n * math.factorial(n))


def _matchings(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i, partner in enumerate(rest):
        for tail in _matchings(rest[:i] + rest[i + 1 :]):
            yield [(first, partner)] + tail


def enumerate_pairings(two_n: int, cap: int = DEFAULT_PAIRING_CAP) -> list:
    """All pairings of 1..two_n in lexicographic order."""
    _check_even(two_n)
    if two_n > cap:
        raise CapExceeded(f"refusing to enumerate pairings of {two_n} > {cap} items")
    return [Pairing(tuple(m)) for m in _matchings(list(range(1, two_n + 1)))]


# ---------------------------------------------------------------------------
# contraction graphs
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ContractionGraph:
    vertices: tuple
    edges: tuple
    integrated: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(sorted(tuple(sorted(e)) for e in self.edges)))
        object.__setattr__(self, "integrated", frozenset(self.integrated))
        known = set(self.vertices)
        for a, b in self.edges:
            if a not in known or b not in known:
                raise ValueError(f"edge ({a},{b}) uses an undeclared vertex")
        if not self.integrated <= known:
            raise ValueError("integrated vertices must be declared")


def contract(g: ContractionGraph, order: Sequence | None = None):
    """Eliminate every integrated vertex; returns (loops, residual graph).

    ``order`` fixes the elimination sequence (default: sorted labels).  The
    result does not depend on it.
    """
    edges = [list(e) for e in g.edges]
    loops = 0
    todo = list(order) if order is not None else sorted(g.integrated)
    if set(todo) != set(g.integrated) or len(todo) != len(g.integrated):
        raise ValueError("elimination order must list each integrated vertex once")
    for v in todo:
        incident = [i for i, e in enumerate(edges) if v in e]
        degree = sum(e.count(v) for e in edges)
        if degree != 2:
            raise DegreeMismatch(f"vertex {v!r} has degree {degree}, expected 2")
        if len(incident) == 1:
            # self-loop 1(k,k): integrates to Omega
            edges.pop(incident[0])
            loops += 1
            continue
        i, j = incident
        a = edges[i][0] if edges[i][1] == v else edges[i][1]
        b = edges[j][0] if edges[j][1] == v else edges[j][1]
        for k in sorted((i, j), reverse=True):
            edges.pop(k)
        edges.append([a, b])
    rest = tuple(x for x in g.vertices if x not in g.integrated)
    return loops, ContractionGraph(rest, tuple(tuple(e) for e in edges), frozenset())


# ---------------------------------------------------------------------------
# polynomials in Omega
# ---------------------------------------------------------------------------
class OmegaPolynomial:
    """Finitely supported polynomial in Omega with exact rational coefficients."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients=None):
        items = {int(k): Fraction(v) for k, v in (coefficients or {}).items() if v != 0}
        object.__setattr__(self, "coefficients", dict(sorted(items.items())))

    def __setattr__(self, name, value):
        raise AttributeError("OmegaPolynomial is immutable")

    @classmethod
    def linear(cls, shift) -> "OmegaPolynomial":
        """Omega + shift."""
        return cls({1: 1, 0: shift})

    def __add__(self, other):
        out = dict(self.coefficients)
        for k, v in other.coefficients.items():
            out[k] = out.get(k, 0) + v
        return OmegaPolynomial(out)

    def __mul__(self, other):
        if not isinstance(other, OmegaPolynomial):
            return OmegaPolynomial({k: v * other for k, v in self.coefficients.items()})
        out: dict = {}
        for i, a in self.coefficients.items():
            for j, b in other.coefficients.items():
                out[i + j] = out.get(i + j, 0) + a * b
        return OmegaPolynomial(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, OmegaPolynomial):
            return self.coefficients == other.coefficients
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.coefficients.items()))

    @property
    def degree(self) -> int:
        return max(self.coefficients, default=0)

    def evaluate(self, omega):
        return sum(v * omega**k for k, v in self.coefficients.items())

    def render(self) -> str:
        if not self.coefficients:
            return "0"
        parts = []
        for k in sorted(self.coefficients, reverse=True):
            v = self.coefficients[k]
            mono = "" if k == 0 else ("Omega" if k == 1 else f"Omega^{k}")
            mag = abs(v)
            num = str(mag) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            if not mono:
                body = num
            elif mag == 1:
                body = mono
            else:
                body = f"{num}*{mono}"
            parts.append(("-" if v < 0 else "+", body))
        sign, body = parts[0]
        text = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    __str__ = render

    def __repr__(self):
        return f"OmegaPolynomial({self.render()})"


ONE_POLY = OmegaPolynomial({0: 1})


def _rising(start: int, count: int) -> OmegaPolynomial:
    """prod_{m=0}^{count-1} (Omega + start + 2m)."""
    out = ONE_POLY
    for m in range(count):
        out = out * OmegaPolynomial.linear(start + 2 * m)
    return out


def s_polynomial(N: int) -> OmegaPolynomial:
    """S_2N = Omega (Omega+2) ... (Omega+2N-2)."""
    if N < 0:
        raise ValueError("N must be non-negative")
    return _rising(0, N)


def _base_edges(N: int):
    return [(2 * m - 1, 2 * m) for m in range(1, N + 1)]


def s_polynomial_bruteforce(N: int, cap: int = 5) -> OmegaPolynomial:
    """S_2N by contracting every pairing against the base identity kernels."""
    if N > cap:
        raise CapExceeded(f"N={N} exceeds brute-force cap {cap}")
    if N == 0:
        return ONE_POLY
    counts: dict = {}
    verts = tuple(range(1, 2 * N + 1))
    for p in enumerate_pairings(2 * N):
        g = ContractionGraph(verts, p.pairs + tuple(_base_edges(N)), frozenset(verts))
        loops, residual = contract(g)
        assert not residual.edges
        counts[loops] = counts.get(loops, 0) + 1
    return OmegaPolynomial(counts)


def t_reduction(N: int, R: int) -> OmegaPolynomial:
    """Scalar factor relating T_{2N,2R} to T_{0,2R}: prod_{m=R+1}^{N+R} (Omega+2m-2)."""
    if N < 0 or R < 0:
        raise ValueError("N and R must be non-negative")
    return _rising(2 * R, N)


def t_reduction_bruteforce(N: int, R: int, cap: int = DEFAULT_PAIRING_CAP) -> dict:
    """Contract all pairings of 2N+2R items, integrating only k_1..k_2N.

    Returns a map residual-edge-tuple -> OmegaPolynomial coefficient.
    """
    total = 2 * N + 2 * R
    if total > cap:
        raise CapExceeded(f"{total} items exceed cap {cap}")
    verts = tuple(range(1, total + 1))
    integrated = frozenset(range(1, 2 * N + 1))
    out: dict = {}
    for p in enumerate_pairings(total) if total else [Pairing(())]:
        g = ContractionGraph(verts, p.pairs + tuple(_base_edges(N)), integrated)
        loops, residual = contract(g)
        key = residual.edges
        out[key] = out.get(key, OmegaPolynomial()) + OmegaPolynomial({loops: 1})
    return out


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class MomentTensor:
    """M_2n = prefactor * sum over pairings of prod 1(k_r, k_s)."""

    order: int
    prefactor: CardinalScalar
    terms: tuple

    def is_zero(self) -> bool:
        return not self.terms

    def render_terms(self) -> list:
        return [" ".join(f"1(k{a},k{b})" for a, b in p.pairs) for p in self.terms]


def measure_moment(two_n: int, cap: int = DEFAULT_PAIRING_CAP) -> MomentTensor:
    if two_n < 0:
        raise ValueError("order must be non-negative")
    if two_n % 2:
        return MomentTensor(two_n, CardinalScalar(0), ())
    n = two_n // 2
    two_pi_lambda = LambdaRational.lam() * 2
    prefactor = CardinalScalar(
        1,
        (
            (two_pi_lambda, OmegaLinear(Fraction(1, 2))),
            (PI, OmegaLinear(Fraction(1, 2))),
            (LambdaRational.lam(), OmegaLinear.of(n)),
        ),
    )
    terms = tuple(enumerate_pairings(two_n, cap)) if n else (Pairing(()),)
    return MomentTensor(two_n, prefactor, terms)


def probability_moment(n: int, f_norm: float) -> float:
    """m_2n[f] = rho(2n)/2^n * ||f||^(2n) for the normalized Gaussian."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if f_norm <= 0:
        raise ValueError("f_norm must be positive")
    if n == 0:
        return 1.0
    return count_pairings(2 * n) / 2**n * f_norm ** (2 * n)


@dataclass
class CarlemanReport:
    f_norm: float
    n_max: int
    terms: np.ndarray
    stirling_bounds: np.ndarray
    lower_bounds: np.ndarray
    partial_sum: float
    bound_sum: float
    termwise_ok: bool
    stirling_ok: bool

    def summary(self) -> dict:
        return {
            "f_norm": self.f_norm,
            "n_max": self.n_max,
            "partial_sum": self.partial_sum,
            "bound_sum": self.bound_sum,
            "termwise_ok": self.termwise_ok,
        }


def carleman_check(f_norm: float, n_max: int) -> CarlemanReport:
    """Terms m_2n^(-1/2n) against the 1/(2||f|| sqrt n) lower bound, in log space."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if f_norm <= 0:
        raise ValueError("f_norm must be positive")
    n = np.arange(1, n_max + 1, dtype=float)
    log_ratio = (gammaln(n + 1) - gammaln(2 * n + 1)) / (2 * n)
    scale = 2.0 / f_norm
    terms = scale * np.exp(log_ratio)
    stirling = (1.0 / f_norm) * np.exp(-np.log(2.0) / (4 * n)) / np.sqrt(n)
    bounds = (0.5 / f_norm) / np.sqrt(n)
    ok = bool(np.all(terms > bounds))
    return CarlemanReport(
        f_norm=f_norm,
        n_max=n_max,
        terms=terms,
        stirling_bounds=stirling,
        lower_bounds=bounds,
        partial_sum=float(np.sum(terms)),
        bound_sum=float(np.sum(bounds)),
        termwise_ok=ok,
        stirling_ok=bool(np.all(terms > stirling) and np.all(stirling > bounds)),
    )


def pochhammer_poly(a: Iterable, N: int) -> OmegaPolynomial:
    """(a)_N as an Omega-polynomial for a = (omega_coeff, const)."""
    oc, c = a
    out = ONE_POLY
    for m in range(N):
        out = out * OmegaPolynomial({1: oc, 0: c + m})
    return out
