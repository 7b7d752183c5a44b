"""Finite-dimensional stand-ins for fields and kernels under the diamond contraction.

A grid of ``D`` nodes with positive weights ``w`` discretizes d^3k/(2pi)^3, so

    u . v          = sum_i w_i u_i v_i
    (K . q)_i      = sum_j K_ij w_j q_j
    identity_ij    = delta_ij / w_i

Spectra, determinants, inverses and square roots all refer to the weighted
operator ``K W``, never to the raw entry matrix.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConvergenceFailure, GridMismatch, NotPositiveDefinite, NotSelfAdjoint

SYMMETRY_TOL = 1e-12
PD_RELATIVE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    weights: tuple

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if not w or any(not x > 0 for x in w):
            raise ValueError("quadrature weights must be strictly positive")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, dim: int, weight: float = 1.0) -> "QuadratureGrid":
        return cls((weight,) * dim)

    @property
    def dim(self) -> int:
        return len(self.weights)

    @property
    def w(self) -> np.ndarray:
        return np.asarray(self.weights)

    def __eq__(self, other):
        return isinstance(other, QuadratureGrid) and self.weights == other.weights

    def __hash__(self):
        return hash(self.weights)


@dataclass(frozen=True, eq=False)
class FieldVector:
    grid: QuadratureGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).reshape(-1)
        if v.shape[0] != self.grid.dim:
            raise GridMismatch(f"vector of length {v.shape[0]} on a grid of dim {self.grid.dim}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0))

    def conj(self) -> "FieldVector":
        return FieldVector(self.grid, self.values.conj())


@dataclass(frozen=True, eq=False)
class DiscreteKernel:
    grid: QuadratureGrid
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("kernel entries must be a square matrix")
        if m.shape[0] != self.grid.dim:
            raise GridMismatch(f"kernel of size {m.shape[0]} on a grid of dim {self.grid.dim}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def identity(cls, grid: QuadratureGrid) -> "DiscreteKernel":
        return cls(grid, np.diag(1.0 / grid.w))

    @classmethod
    def from_operator(cls, grid: QuadratureGrid, op: np.ndarray) -> "DiscreteKernel":
        """Kernel whose diamond action is the matrix ``op`` (entries = op W^-1)."""
        return cls(grid, np.asarray(op) / grid.w[None, :])

    def operator(self) -> np.ndarray:
        """Matrix of q -> K . q, i.e. K W."""
        return self.entries * self.grid.w[None, :]

    def symmetric_form(self) -> np.ndarray:
        """W^1/2 K W^1/2, the kernel in weighted coordinates."""
        s = np.sqrt(self.grid.w)
        return s[:, None] * self.entries * s[None, :]

    def transpose(self) -> "DiscreteKernel":
        return DiscreteKernel(self.grid, self.entries.T)

    def conj(self) -> "DiscreteKernel":
        return DiscreteKernel(self.grid, self.entries.conj())

    def __add__(self, other):
        _same_grid(self.grid, other.grid)
        return DiscreteKernel(self.grid, self.entries + other.entries)

    def __sub__(self, other):
        _same_grid(self.grid, other.grid)
        return DiscreteKernel(self.grid, self.entries - other.entries)

    def scale(self, c) -> "DiscreteKernel":
        return DiscreteKernel(self.grid, complex(c) * self.entries)

    def _scale_ref(self) -> float:
        return max(float(np.max(np.abs(self.symmetric_form()))), 1e-300)

    def is_symmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        m = self.symmetric_form()
        return bool(np.max(np.abs(m - m.T)) <= tol * self._scale_ref())

    def is_antisymmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        m = self.symmetric_form()
        return bool(np.max(np.abs(m + m.T)) <= tol * self._scale_ref())

    def is_self_adjoint(self, tol: float = SYMMETRY_TOL) -> bool:
        m = self.symmetric_form()
        return bool(np.max(np.abs(m - m.conj().T)) <= tol * self._scale_ref())

    def is_real(self) -> bool:
        return bool(np.all(self.entries.imag == 0))

    def is_positive_definite(self) -> bool:
        if not self.is_self_adjoint():
            return False
        ev = np.linalg.eigvalsh(_hermitian_part(self.symmetric_form()))
        return bool(ev[0] > PD_RELATIVE_TOL * max(abs(ev[-1]), 1e-300))


def _same_grid(a: QuadratureGrid, b: QuadratureGrid) -> None:
    if a != b:
        raise GridMismatch("operands live on different grids")


def _hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


# ---------------------------------------------------------------------------
# contraction and products
# ---------------------------------------------------------------------------
def diamond(u: FieldVector, v: FieldVector) -> complex:
    """u . v = sum_i w_i u_i v_i (bilinear, no conjugation)."""
    _same_grid(u.grid, v.grid)
    return complex(np.sum(u.grid.w * (u.values * v.values)))


def apply(k: DiscreteKernel, v: FieldVector) -> FieldVector:
    _same_grid(k.grid, v.grid)
    return FieldVector(k.grid, k.entries @ (k.grid.w * v.values))


def compose(a: DiscreteKernel, b: DiscreteKernel) -> DiscreteKernel:
    """(A . B)_ij = sum_k A_ik w_k B_kj."""
    _same_grid(a.grid, b.grid)
    return DiscreteKernel(a.grid, a.entries @ (a.grid.w[:, None] * b.entries))


def bilinear(u: FieldVector, k: DiscreteKernel, v: FieldVector) -> complex:
    """u . K . v"""
    return diamond(u, apply(k, v))


def determinant(k: DiscreteKernel) -> complex:
    """Product of diamond eigenvalues for any kernel (LU based)."""
    sign, logdet = np.linalg.slogdet(k.operator())
    return complex(sign * np.exp(logdet))


def inverse(k: DiscreteKernel) -> DiscreteKernel:
    """Diamond inverse of any nonsingular kernel: W^-1 K^-1 W^-1."""
    w = k.grid.w
    try:
        raw = np.linalg.inv(k.entries)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"kernel is singular: {exc}", 0.0) from exc
    return DiscreteKernel(k.grid, raw / w[:, None] / w[None, :])


# ---------------------------------------------------------------------------
# even/odd split
# ---------------------------------------------------------------------------
def split_even_odd(k: DiscreteKernel):
    """K = K_e + i K_o with K_e real symmetric and K_o real antisymmetric."""
    if not k.is_self_adjoint():
        raise NotSelfAdjoint("K_e/K_o split needs a self-adjoint kernel")
    m = k.entries
    ke = 0.5 * (m + m.conj())
    ko = -0.5j * (m - m.conj())
    return DiscreteKernel(k.grid, ke.real), DiscreteKernel(k.grid, ko.real)


# ---------------------------------------------------------------------------
# spectral operations
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    grid: QuadratureGrid
    eigenvalues: np.ndarray
    eigenvectors: tuple  # FieldVectors, orthonormal: conj(phi_m) . phi_n = delta_mn

    def reconstruct(self, fn=None) -> DiscreteKernel:
        """sum_n fn(kappa_n) phi_n phi_n^dagger as a kernel."""
        vals = self.eigenvalues if fn is None else fn(self.eigenvalues)
        phi = np.stack([v.values for v in self.eigenvectors], axis=1)
        return DiscreteKernel(self.grid, (phi * vals[None, :]) @ phi.conj().T)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    j = int(np.argmax(np.abs(v)))  # argmax keeps the first of tied magnitudes
    return v * (abs(v[j]) / v[j])


def mercer(k: DiscreteKernel) -> SpectralDecomposition:
    """Eigenpairs of the weighted operator, eigenvalues descending."""
    if not k.is_self_adjoint():
        raise NotSelfAdjoint("Mercer decomposition needs a self-adjoint kernel")
    m = _hermitian_part(k.symmetric_form())
    try:
        vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    s = np.sqrt(k.grid.w)
    phis = []
    for idx in order:
        phi = _fix_phase(vecs[:, idx] / s)
        if k.is_real():
            phi = phi.real
        phis.append(FieldVector(k.grid, phi))
    return SpectralDecomposition(k.grid, vals, tuple(phis))


def require_positive_definite(k: DiscreteKernel, name: str = "K") -> SpectralDecomposition:
    dec = mercer(k)
    top = max(abs(dec.eigenvalues[0]), 1e-300)
    low = dec.eigenvalues[-1]
    if not low > PD_RELATIVE_TOL * top:
        raise NotPositiveDefinite(f"{name} is not positive-definite: eigenvalue {low:.6g}", float(low))
    return dec


def spectral_apply(k: DiscreteKernel, fn: str):
    """det, inverse or sqrt of a self-adjoint positive-definite kernel."""
    dec = require_positive_definite(k)
    if fn == "det":
        return float(np.prod(dec.eigenvalues))
    if fn == "inverse":
        return dec.reconstruct(lambda x: 1.0 / x)
    if fn == "sqrt":
        return dec.reconstruct(np.sqrt)
    raise ValueError(f"unknown spectral function {fn!r}")


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------
def _parse_cell(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    return complex(t)


def _format_cell(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return repr(z.real)
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def read_csv_rows(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    return np.array([[_parse_cell(c) for c in r] for r in rows], dtype=complex)


def kernel_from_csv(text: str, grid: QuadratureGrid | None = None) -> DiscreteKernel:
    m = read_csv_rows(text)
    grid = grid or QuadratureGrid.uniform(m.shape[0])
    return DiscreteKernel(grid, m)


def vector_from_csv(text: str, grid: QuadratureGrid | None = None) -> FieldVector:
    v = read_csv_rows(text).reshape(-1)
    grid = grid or QuadratureGrid.uniform(v.shape[0])
    return FieldVector(grid, v)


def to_csv(obj) -> str:
    m = obj.entries if isinstance(obj, DiscreteKernel) else obj.values[None, :]
    return "\n".join(",".join(_format_cell(z) for z in row) for row in m) + "\n"


def _encode_entries(a: np.ndarray):
    if np.all(a.imag == 0):
        return a.real.tolist()
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _decode_entries(data, ndim: int) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.ndim == ndim + 1:
        return a[..., 0] + 1j * a[..., 1]
    return a.astype(complex)


def to_json(obj) -> str:
    grid = obj.grid
    if isinstance(obj, DiscreteKernel):
        payload = {"dim": grid.dim, "weights": list(grid.weights), "entries": _encode_entries(obj.entries)}
    else:
        payload = {"dim": grid.dim, "weights": list(grid.weights), "values": _encode_entries(obj.values)}
    return json.dumps(payload)


def from_json(text: str):
    data = json.loads(text)
    grid = QuadratureGrid(tuple(data["weights"]))
    if grid.dim != data["dim"]:
        raise GridMismatch("dim does not match the weights list")
    if "entries" in data:
        return DiscreteKernel(grid, _decode_entries(data["entries"], 2))
    return FieldVector(grid, _decode_entries(data["values"], 1))


def load(path, grid: QuadratureGrid | None = None):
    """Load a kernel or vector from a .json container or a .csv file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return from_json(text)
    m = read_csv_rows(text)
    if m.shape[0] == 1 or m.shape[1] == 1:
        v = m.reshape(-1)
        return FieldVector(grid or QuadratureGrid.uniform(v.shape[0]), v)
    return DiscreteKernel(grid or QuadratureGrid.uniform(m.shape[0]), m)
