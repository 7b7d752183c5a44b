"""Numeric values of symbolic kernels, vectors and monomials on bound data."""
from __future__ import annotations

import numpy as np

from ..errors import GridMismatch, MissingBinding
from ..kernelalg import DiscreteKernel, FieldVector, QuadratureGrid, compose, inverse
from .symbolic import Bilinear, KAtom, KExpr, ScalarSym, VAtom, VecExpr


def common_grid(bindings: dict, omega_value: int | None = None) -> QuadratureGrid:
    grids = {b.grid for b in bindings.values() if isinstance(b, (DiscreteKernel, FieldVector))}
    if len(grids) > 1:
        raise GridMismatch("bindings live on different grids")
    if grids:
        grid = grids.pop()
        if omega_value is not None and grid.dim != omega_value:
            raise GridMismatch(f"bindings have dimension {grid.dim}, requested {omega_value}")
        return grid
    if omega_value is None:
        raise MissingBinding("no bindings and no dimension given")
    return QuadratureGrid.uniform(omega_value)


class Evaluator:
    """Caches numeric kernels for one set of bindings."""

    def __init__(self, bindings: dict, grid: QuadratureGrid):
        self.bindings = bindings
        self.grid = grid
        self._kernels: dict = {}

    def _lookup(self, name, want):
        if name not in self.bindings:
            raise MissingBinding(f"no binding for {name!r}")
        value = self.bindings[name]
        if want is not None and not isinstance(value, want):
            raise MissingBinding(f"binding for {name!r} has the wrong type ({type(value).__name__})")
        return value

    def atom(self, a: KAtom) -> DiscreteKernel:
        k = self._lookup(a.name, DiscreteKernel)
        m = k.entries
        if a.conj:
            m = m.conj()
        if a.trans:
            m = m.T
        return DiscreteKernel(self.grid, m)

    def factor(self, f) -> DiscreteKernel:
        if isinstance(f, KAtom):
            return self.atom(f)
        return inverse(self.kernel(f.expr))

    def word(self, word) -> DiscreteKernel:
        if not word:
            return DiscreteKernel.identity(self.grid)
        out = self.factor(word[0])
        for f in word[1:]:
            out = compose(out, self.factor(f))
        return out

    def kernel(self, e: KExpr) -> DiscreteKernel:
        hit = self._kernels.get(e)
        if hit is not None:
            return hit
        m = np.zeros((self.grid.dim, self.grid.dim), dtype=complex)
        for w, c in e.terms:
            m = m + complex(c) * self.word(w).entries
        k = DiscreteKernel(self.grid, m)
        self._kernels[e] = k
        return k

    def vatom(self, v: VAtom) -> np.ndarray:
        x = self._lookup(v.name, FieldVector).values
        return x.conj() if v.conj else x

    def vector(self, v: VecExpr) -> np.ndarray:
        out = np.zeros(self.grid.dim, dtype=complex)
        w = self.grid.w
        for (word, atom), c in v.terms:
            k = self.word(word)
            out = out + complex(c) * (k.entries @ (w * self.vatom(atom)))
        return out

    def monomial(self, m) -> complex:
        if isinstance(m, ScalarSym):
            if not m.name:
                return 1.0
            x = complex(self._lookup(m.name, None))
            return x.conjugate() if m.conj else x
        assert isinstance(m, Bilinear)
        w = self.grid.w
        k = self.word(m.word)
        right = k.entries @ (w * self.vatom(m.right))
        return complex(np.sum(w * self.vatom(m.left) * right))
