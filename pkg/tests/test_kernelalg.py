import numpy as np
import pytest

from funcint.errors import GridMismatch, NotPositiveDefinite, NotSelfAdjoint
from funcint.kernelalg import (
    DiscreteKernel,
    FieldVector,
    QuadratureGrid,
    apply,
    bilinear,
    compose,
    determinant,
    diamond,
    from_json,
    inverse,
    kernel_from_csv,
    load,
    mercer,
    spectral_apply,
    split_even_odd,
    to_csv,
    to_json,
    vector_from_csv,
)


def random_grid(rng, D):
    return QuadratureGrid(rng.uniform(0.5, 2.0, D))


def random_spd(rng, grid):
    D = grid.dim
    A = rng.standard_normal((D, D))
    s = 1 / np.sqrt(grid.w)
    return DiscreteKernel(grid, s[:, None] * (A @ A.T / D + 0.1 * np.eye(D)) * s[None, :])


def random_hpd(rng, grid):
    D = grid.dim
    B = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
    s = 1 / np.sqrt(grid.w)
    return DiscreteKernel(grid, s[:, None] * (B @ B.conj().T / D + 0.1 * np.eye(D)) * s[None, :])


def test_grid_rejects_bad_weights():
    with pytest.raises(ValueError):
        QuadratureGrid([1.0, 0.0])


def test_diamond_examples():
    g = QuadratureGrid.uniform(2)
    assert diamond(FieldVector(g, [1, 2]), FieldVector(g, [3, 4])) == 11
    rng = np.random.default_rng(0)
    g = random_grid(rng, 5)
    q = FieldVector(g, rng.standard_normal(5))
    assert np.allclose(apply(DiscreteKernel.identity(g), q).values, q.values)
    N = rng.standard_normal((5, 5))
    antisym = DiscreteKernel(g, N - N.T)
    assert abs(bilinear(q, antisym, q)) < 1e-12


def test_diamond_symmetric_and_grid_checked():
    rng = np.random.default_rng(1)
    g = random_grid(rng, 4)
    u = FieldVector(g, rng.standard_normal(4) + 1j * rng.standard_normal(4))
    v = FieldVector(g, rng.standard_normal(4))
    assert diamond(u, v) == diamond(v, u)
    with pytest.raises(GridMismatch):
        diamond(u, FieldVector(QuadratureGrid.uniform(4), [1, 2, 3, 4]))


def test_split_even_odd_examples():
    g = QuadratureGrid.uniform(2)
    ke, ko = split_even_odd(DiscreteKernel(g, [[1, 1j], [-1j, 1]]))
    assert np.array_equal(ke.entries, np.eye(2))
    assert np.array_equal(ko.entries, [[0, 1], [-1, 0]])
    ke, ko = split_even_odd(DiscreteKernel(g, [[2, 1], [1, 3]]))
    assert not ko.entries.any()
    with pytest.raises(NotSelfAdjoint):
        split_even_odd(DiscreteKernel(g, [[1, 2], [0, 1]]))


def test_split_reconstructs():
    rng = np.random.default_rng(2)
    g = random_grid(rng, 6)
    k = random_hpd(rng, g)
    ke, ko = split_even_odd(k)
    assert ke.is_symmetric() and ko.is_antisymmetric()
    assert np.max(np.abs(ke.entries + 1j * ko.entries - k.entries)) < 1e-15


def test_mercer_examples():
    g = QuadratureGrid([0.5, 2.0, 1.0])
    dec = mercer(DiscreteKernel.identity(g))
    assert np.allclose(dec.eigenvalues, 1)
    dec = mercer(DiscreteKernel(QuadratureGrid.uniform(2), np.diag([2.0, 3.0])))
    assert np.allclose(dec.eigenvalues, [3, 2])


@pytest.mark.parametrize("make", [random_spd, random_hpd])
def test_mercer_reconstruction_and_orthonormality(make):
    rng = np.random.default_rng(3)
    g = random_grid(rng, 7)
    k = make(rng, g)
    dec = mercer(k)
    assert np.all(np.diff(dec.eigenvalues) <= 0)
    rec = dec.reconstruct()
    assert np.linalg.norm(rec.entries - k.entries) <= 1e-10 * np.linalg.norm(k.entries)
    phi = np.stack([v.values for v in dec.eigenvectors], axis=1)
    gram = phi.conj().T @ (g.w[:, None] * phi)
    assert np.allclose(gram, np.eye(7), atol=1e-12)


def test_mercer_phase_convention():
    rng = np.random.default_rng(4)
    g = random_grid(rng, 5)
    for v in mercer(random_hpd(rng, g)).eigenvectors:
        j = np.argmax(np.abs(v.values))
        assert v.values[j].real > 0 and abs(v.values[j].imag) < 1e-14


def test_spectral_examples():
    g = QuadratureGrid.uniform(2)
    assert spectral_apply(DiscreteKernel(g, np.diag([2.0, 3.0])), "det") == pytest.approx(6)
    root = spectral_apply(DiscreteKernel(g, np.diag([4.0, 9.0])), "sqrt")
    assert sorted(mercer(root).eigenvalues) == pytest.approx([2, 3])
    with pytest.raises(NotPositiveDefinite) as info:
        spectral_apply(DiscreteKernel(g, np.diag([1.0, -2.0])), "det")
    assert info.value.eigenvalue == pytest.approx(-2)


def test_inverse_and_sqrt_residuals():
    rng = np.random.default_rng(5)
    g = random_grid(rng, 6)
    k = random_spd(rng, g)
    ident = DiscreteKernel.identity(g).entries
    for inv in (inverse(k), spectral_apply(k, "inverse")):
        assert np.max(np.abs(compose(k, inv).entries - ident)) < 1e-10
    root = spectral_apply(k, "sqrt")
    assert np.max(np.abs(compose(root, root).entries - k.entries)) < 1e-10
    assert determinant(k).real > 0
    assert determinant(root).real ** 2 == pytest.approx(determinant(k).real, rel=1e-10)
    assert spectral_apply(k, "det") == pytest.approx(determinant(k).real, rel=1e-10)


def test_determinant_chain_for_self_adjoint_kernels():
    rng = np.random.default_rng(6)
    for D in (2, 3, 5):
        g = random_grid(rng, D)
        k = random_hpd(rng, g)
        ke, ko = split_even_odd(k)
        lhs = determinant(k) * determinant(k.conj())
        x = compose(inverse(ke), ko)
        rhs = determinant(ke) ** 2 * determinant(DiscreteKernel.identity(g) + compose(x, x))
        assert abs(lhs - rhs) <= 1e-8 * abs(lhs)


def test_csv_and_json_round_trip(tmp_path):
    g = QuadratureGrid([0.5, 1.5])
    k = DiscreteKernel(g, [[1 + 2j, 0.1], [1 / 3, -4j]])
    back = from_json(to_json(k))
    assert np.array_equal(back.entries, k.entries)
    assert np.array_equal(back.grid.w, g.w)
    v = FieldVector(g, [0.1, 2 ** 0.5])
    assert np.array_equal(from_json(to_json(v)).values, v.values)
    text = to_csv(k)
    assert np.array_equal(kernel_from_csv(text, g).entries, k.entries)
    assert np.array_equal(vector_from_csv("1,2.5\n").values, [1, 2.5])
    assert kernel_from_csv("1+2i,3\n-1i,4\n").entries[1, 0] == -1j
    path = tmp_path / "k.json"
    path.write_text(to_json(k))
    assert np.array_equal(load(path).entries, k.entries)


def test_flags():
    g = QuadratureGrid.uniform(2)
    assert DiscreteKernel(g, [[1, 2], [2, 1]]).is_symmetric()
    assert DiscreteKernel(g, [[0, 2], [-2, 0]]).is_antisymmetric()
    assert DiscreteKernel(g, [[1, 1j], [-1j, 1]]).is_self_adjoint()
    assert DiscreteKernel(g, [[2, 0], [0, 1]]).is_positive_definite()
    assert not DiscreteKernel(g, [[1, 2], [2, 1]]).is_positive_definite()
