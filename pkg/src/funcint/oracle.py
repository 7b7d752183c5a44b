"""Finite-dimensional ground truth for the closed forms.

Everything here works directly on the exponent polynomial of a parsed
integrand: integration variables are written in real coordinates

    q = W^(-1/2) x                      (real variable, D coordinates)
    a = W^(-1/2) (x_q + i x_p)/sqrt(2)  (complex variable, 2D coordinates)

so the diamond pairing becomes an ordinary dot product and the measure is
dx.  The exponent is then -x.A.x + b.x + c with complex symmetric A, and the
integral is the textbook pi^(n/2) det(A)^(-1/2) exp(b.A^-1.b/4 + c).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .engine.canonical import QuadraticForm, canonicalize
from .engine.catalog import CATALOG
from .engine.closedform import evaluate, instantiate_closed_form
from .engine.symbolic import Bilinear, ScalarSym
from .errors import CapExceeded, EnvelopeFailure, FuncIntError, MissingBinding, NotPositiveDefinite, Unsupported
from .kernelalg import DiscreteKernel, FieldVector, QuadratureGrid

GENERATOR_ID = "numpy.Philox4x64-10"
CHUNK = 10_000
DELTA = 0.1
L_SCALE = 0.3
MOMENT_CAP = 4
MEASURE_CONVENTION = (
    "D[q] = prod_i dq~_i with q~_i = sqrt(w_i) q_i; "
    "complex a = (q + i p)/sqrt(2) with D[a] = D[q] D[p]; Dc adds (2 pi)^(-D)"
)


# ---------------------------------------------------------------------------
# exponent as a quadratic function of real coordinates
# ---------------------------------------------------------------------------
def _variables(qf: QuadraticForm):
    measures = [(qf.variable, qf.circle)] + [(m.variable, m.circle) for m in qf.remaining]
    conj_names = {
        x.name for m, _ in qf.source.terms if isinstance(m, Bilinear) for x in m.variables() if x.conj
    }
    return [(name, circle, name in conj_names) for name, circle in measures]


def _atom_matrix(bindings: dict, a) -> np.ndarray:
    k = bindings.get(a.name)
    if not isinstance(k, DiscreteKernel):
        raise MissingBinding(f"no kernel bound to {a.name!r}")
    m = k.entries
    if a.conj:
        m = m.conj()
    if a.trans:
        m = m.T
    return m


def _word_matrix(bindings: dict, word, w: np.ndarray) -> np.ndarray:
    # chains from the parser hold atoms only; the empty word is diag(1/w)
    if not word:
        return np.diag(1.0 / w)
    m = _atom_matrix(bindings, word[0])
    for a in word[1:]:
        m = m @ np.diag(w) @ _atom_matrix(bindings, a)
    return m


@dataclass
class RealGaussian:
    """exp(-x.A.x + b.x + c) over R^n, times ``measure`` from circle variables."""

    A: np.ndarray
    b: np.ndarray
    c: complex
    measure: float = 1.0

    @property
    def n(self) -> int:
        return self.A.shape[0]


def gaussian_of(qf: QuadraticForm, bindings: dict, D: int) -> RealGaussian:
    grid = _grid(bindings, D)
    w = grid.w
    variables = _variables(qf)
    if any(name not in qf.source.vector_names() for name, _, _ in variables):
        raise Unsupported("an unused integration variable has no finite value")
    # coordinate maps: each variable is P @ x
    offsets = {}
    n = 0
    for name, _, cplx in variables:
        offsets[name] = (n, cplx)
        n += 2 * D if cplx else D
    inv_sqrt_w = 1.0 / np.sqrt(w)

    def coords(atom):
        """(P, const) with atom value = P @ x + const."""
        if atom.name in offsets:
            start, cplx = offsets[atom.name]
            P = np.zeros((D, n), dtype=complex)
            if cplx:
                s = 1 / math.sqrt(2)
                P[:, start:start + D] = np.diag(inv_sqrt_w * s)
                P[:, start + D:start + 2 * D] = np.diag(inv_sqrt_w * s * (-1j if atom.conj else 1j))
            else:
                P[:, start:start + D] = np.diag(inv_sqrt_w)
            return P, np.zeros(D, dtype=complex)
        v = bindings.get(atom.name)
        if not isinstance(v, FieldVector):
            raise MissingBinding(f"no vector bound to {atom.name!r}")
        x = v.values.conj() if atom.conj else v.values
        return np.zeros((D, n), dtype=complex), np.asarray(x, dtype=complex)

    Q = np.zeros((n, n), dtype=complex)
    b = np.zeros(n, dtype=complex)
    c = 0j
    for m, coef in qf.source.terms:
        if not coef.is_const():
            raise Unsupported(f"coefficient of {m.render()} depends on Lambda")
        k = complex(coef.const_value())
        if isinstance(m, ScalarSym):
            if not m.name:
                c += k
                continue
            if m.name not in bindings:
                raise MissingBinding(f"no scalar bound to {m.name!r}")
            s = complex(bindings[m.name])
            c += k * (s.conjugate() if m.conj else s)
            continue
        Pu, cu = coords(m.left)
        Pv, cv = coords(m.right)
        M = np.diag(w) @ _word_matrix(bindings, m.word, w) @ np.diag(w)
        Q += k * (Pu.T @ M @ Pv)
        b += k * (Pu.T @ M @ cv + Pv.T @ M.T @ cu)
        c += k * (cu @ M @ cv)
    A = -(Q + Q.T) / 2
    measure = 1.0
    for _, circle, _ in variables:
        if circle:
            measure *= (2 * math.pi) ** (-D)
    return RealGaussian(A, b, c, measure)


def _grid(bindings: dict, D: int) -> QuadratureGrid:
    for v in bindings.values():
        if isinstance(v, (DiscreteKernel, FieldVector)):
            if v.grid.dim != D:
                raise MissingBinding(f"bindings have dimension {v.grid.dim}, requested {D}")
            return v.grid
    return QuadratureGrid.uniform(D)


def _require_envelope(A: np.ndarray, error=NotPositiveDefinite):
    re = A.real
    lam = np.linalg.eigvalsh((re + re.T) / 2)
    if lam[0] <= 1e-12 * max(1.0, abs(lam[-1])):
        if error is NotPositiveDefinite:
            raise NotPositiveDefinite(f"real part of the quadratic form has eigenvalue {lam[0]:.6g}", float(lam[0]))
        raise error(f"real part of the quadratic form has eigenvalue {lam[0]:.6g}; no Gaussian envelope")
    return re


def gaussian_integral(g: RealGaussian) -> complex:
    _require_envelope(g.A)
    lam = np.linalg.eigvals(g.A)
    # Re A > 0 keeps every eigenvalue in the right half-plane; principal roots are continuous there
    root = np.prod(np.sqrt(lam.astype(complex)))
    quad = g.b @ np.linalg.solve(g.A, g.b) / 4
    return complex(math.pi ** (g.n / 2) / root * np.exp(quad + g.c) * g.measure)


def analytic_finite_integral(qf: QuadraticForm, bindings: dict, D: int) -> complex:
    return gaussian_integral(gaussian_of(qf, bindings, D))


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------
def chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


class _Accumulator:
    """Running mean and variance relative to the first sample (exact for constant data)."""

    def __init__(self):
        self.n = 0
        self.ref = None
        self.s1 = 0j
        self.s2 = 0.0

    def add(self, x: np.ndarray):
        if self.ref is None:
            self.ref = x[0]
        d = x - self.ref
        self.n += len(x)
        self.s1 += d.sum()
        self.s2 += float(np.sum(np.abs(d) ** 2))

    def result(self):
        mean = self.ref + self.s1 / self.n
        if self.n < 2:
            return complex(mean), 0.0
        var = (self.s2 - abs(self.s1) ** 2 / self.n) / (self.n - 1)
        return complex(mean), math.sqrt(max(var, 0.0) / self.n)


def _chunks(samples: int):
    k = 0
    while samples > 0:
        yield k, min(CHUNK, samples)
        samples -= CHUNK
        k += 1


def mc_integral(qf: QuadraticForm, bindings: dict, D: int, samples: int, seed: int):
    """Importance sampling from N(0, (2 Re A)^-1); returns (estimate, stderr)."""
    g = gaussian_of(qf, bindings, D)
    re = _require_envelope(g.A, EnvelopeFailure)
    cov = np.linalg.inv(2 * re)
    chol = np.linalg.cholesky((cov + cov.T) / 2)
    sign, logdet = np.linalg.slogdet(re)
    norm = math.pi ** (g.n / 2) * math.exp(-0.5 * logdet) * g.measure
    extra = g.A - re
    acc = _Accumulator()
    for k, size in _chunks(samples):
        z = chunk_generator(seed, k).standard_normal((size, g.n))
        x = z @ chol.T
        expo = -np.einsum("si,ij,sj->s", x, extra, x) + x @ g.b + g.c
        acc.add(norm * np.exp(expo))
    return acc.result()


def mc_probability_moment(n: int, f: FieldVector, D: int, samples: int, seed: int):
    """E[(q.f)^(2n)] under the density proportional to exp(-q.q)."""
    if n > MOMENT_CAP:
        raise CapExceeded(f"moment order n={n} exceeds the cap {MOMENT_CAP}")
    if n == 0:
        return 1.0, 0.0
    if f.grid.dim != D:
        raise MissingBinding(f"vector has dimension {f.grid.dim}, requested {D}")
    w = f.grid.w
    # q.f = sum_i sqrt(w_i) f_i x_i with x ~ N(0, 1/2)
    proj = np.sqrt(w) * f.values
    acc = _Accumulator()
    for k, size in _chunks(samples):
        x = chunk_generator(seed, k).standard_normal((size, D)) * math.sqrt(0.5)
        acc.add((x @ proj) ** (2 * n))
    mean, err = acc.result()
    return (mean.real if f.is_real() else mean), err


# ---------------------------------------------------------------------------
# random bindings
# ---------------------------------------------------------------------------
def _binding_rng(seed: int, D: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, D])))


def _from_symmetric_form(grid: QuadratureGrid, m: np.ndarray) -> DiscreteKernel:
    s = 1 / np.sqrt(grid.w)
    return DiscreteKernel(grid, s[:, None] * m * s[None, :])


def _kernel_roles(qf: QuadraticForm) -> dict:
    """name -> 'spd' | 'hpd' | 'coupling' from where each kernel sits."""
    variables = {name: cplx for name, _, cplx in _variables(qf)}
    roles = {}
    for m, _ in qf.source.terms:
        if not isinstance(m, Bilinear):
            continue
        for a in m.word:
            l, r = m.left, m.right
            quad = l.name == r.name and l.name in variables
            if quad and variables[l.name] and l.conj == r.conj:
                role = "coupling"
            elif quad and variables[l.name]:
                role = "hpd"
            elif any(variables.get(x.name) for x in (l, r)):
                role = roles.get(a.name, "hpd")
            else:
                role = roles.get(a.name, "spd")
            roles.setdefault(a.name, role)
    return roles


def random_bindings(qf: QuadraticForm, D: int, seed: int) -> dict:
    """Kernels and vectors that satisfy the catalog assumptions at dimension D."""
    rng = _binding_rng(seed, D)
    grid = QuadratureGrid(rng.uniform(0.5, 2.0, D))
    variables = {name: cplx for name, _, cplx in _variables(qf)}
    is_complex = any(variables.values())
    roles = _kernel_roles(qf)
    out: dict = {}
    base = None
    for name in sorted(n for n, r in roles.items() if r != "coupling"):
        if roles[name] == "hpd":
            B = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
            m = B @ B.conj().T / D + DELTA * np.eye(D)
        else:
            A = rng.standard_normal((D, D))
            m = A @ A.T / D + DELTA * np.eye(D)
        out[name] = _from_symmetric_form(grid, m)
        base = m if base is None else base
    for name in sorted(n for n, r in roles.items() if r == "coupling"):
        C = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
        C = (C + C.T) / 2
        floor = np.linalg.eigvalsh(base)[0] if base is not None else 1.0
        C = C * (L_SCALE * floor / np.linalg.norm(C, 2))
        out[name] = _from_symmetric_form(grid, C)
    vectors = sorted(qf.source.vector_names() - set(variables))
    for name in vectors:
        v = rng.standard_normal(D)
        if is_complex:
            v = v + 1j * rng.standard_normal(D)
        out[name] = FieldVector(grid, v * 0.25 / math.sqrt(D))
    return out


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------
@dataclass
class VerificationCase:
    name: str
    dsl: str
    dims: tuple = (1, 2, 4)
    tol: float = 1e-8
    mc_samples: int = 0
    seed: int = 42
    bindings: dict | None = None
    kinds: dict = field(default_factory=dict)

    @classmethod
    def builtin(cls, name: str, **kw) -> "VerificationCase":
        case = CATALOG[name.upper()]
        return cls(case.name, case.dsl, **kw)


@dataclass
class VerificationReport:
    case: str
    dsl: str
    closed_form: str | None
    assumptions: list
    residual_tags: list
    rows: list
    config: dict

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(r["pass"] for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "dsl": self.dsl,
            "closed_form": self.closed_form,
            "assumptions": self.assumptions,
            "residual_tags": self.residual_tags,
            "rows": self.rows,
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def encode_number(z):
    """Real numbers as floats, complex ones as [re, im]; non-finite as null."""
    if z is None:
        return None
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        return None
    return z.real if z.imag == 0 else [z.real, z.imag]


def _error_text(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _row(dim, engine=None, analytic=None, mc=None, stderr=None, rel_err=None, ok=False, error=None) -> dict:
    return {
        "dim": dim,
        "engine": encode_number(engine),
        "analytic": encode_number(analytic),
        "mc": encode_number(mc),
        "mc_stderr": stderr,
        "rel_err": rel_err,
        "pass": ok,
        "error": error,
    }


def run_case(vc: VerificationCase) -> VerificationReport:
    config = {
        "seed": vc.seed,
        "samples": vc.mc_samples,
        "tol": vc.tol,
        "generator_id": GENERATOR_ID,
        "measure_convention": MEASURE_CONVENTION,
    }
    try:
        qf = canonicalize(vc.dsl, vc.kinds)
        cf = evaluate(qf)
    except (FuncIntError, ValueError) as exc:
        rows = [_row(d, error=_error_text(exc)) for d in vc.dims]
        return VerificationReport(vc.name, vc.dsl, None, [], [], rows, config)
    rows = []
    for D in vc.dims:
        try:
            bindings = vc.bindings if vc.bindings is not None else random_bindings(qf, D, vc.seed)
            engine = instantiate_closed_form(cf, bindings, D)
            analytic = analytic_finite_integral(qf, bindings, D)
            rel = abs(engine - analytic) / abs(analytic)
            ok = rel <= vc.tol
            mc = err = None
            if vc.mc_samples > 0:
                mc, err = mc_integral(qf, bindings, D, vc.mc_samples, vc.seed)
                # the tolerance term absorbs rounding when the sampler is exact (err == 0)
                ok = ok and abs(engine - mc) <= 4 * err + vc.tol * abs(engine)
            rows.append(_row(D, engine, analytic, mc, err, float(rel), bool(ok)))
        except (FuncIntError, np.linalg.LinAlgError) as exc:
            rows.append(_row(D, error=_error_text(exc)))
    return VerificationReport(
        vc.name, vc.dsl, cf.render(), cf.render_assumptions(), cf.residual_tags(), rows, config
    )
