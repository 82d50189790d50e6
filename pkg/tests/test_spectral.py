"""Jacobi eigendecomposition, GFT, subspace splits and projections."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphdisc.errors import ConfigurationError, DegenerateInputError, ShapeError
from graphdisc.graphs import SupportMatrix, generate_geometric_graph, laplacian, normalize_support
from graphdisc.spectral import eig_sym, gft, igft, project_subspace, split_subspace


def support(entries: np.ndarray) -> SupportMatrix:
    entries = np.asarray(entries, dtype=np.float64)
    return SupportMatrix(n=entries.shape[0], entries=entries,
                         sparsity_mask=np.ones(entries.shape, dtype=bool))


def char_poly_roots_2x2(m: np.ndarray) -> np.ndarray:
    """Quadratic-formula oracle for 2x2 symmetric eigenvalues."""
    tr, det = m[0, 0] + m[1, 1], m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = np.sqrt(tr * tr - 4.0 * det)
    return np.sort([(tr - disc) / 2.0, (tr + disc) / 2.0])


def char_poly_roots_3x3(m: np.ndarray) -> np.ndarray:
    """Companion-matrix root oracle for the 3x3 characteristic polynomial."""
    c2 = -np.trace(m)
    c1 = 0.5 * (np.trace(m) ** 2 - np.trace(m @ m))
    c0 = -np.linalg.det(m)
    roots = np.roots([1.0, c2, c1, c0])
    return np.sort(roots.real)


def random_symmetric(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, n))
    return 0.5 * (m + m.T)


class TestEigSym:
    def test_identity(self):
        spec = eig_sym(support(np.eye(4)))
        np.testing.assert_allclose(spec.eigenvalues, np.ones(4), atol=0.0)
        # sign convention: first significant entry of each column positive
        for i in range(4):
            col = spec.eigenvectors[:, i]
            first = col[np.abs(col) > 1e-12][0]
            assert first > 0

    def test_exchange_matrix_tie_break(self):
        # characteristic polynomial lambda^2 - 1 has roots -1, 1; the
        # magnitude tie resolves by signed value
        spec = eig_sym(support([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(spec.eigenvalues, [-1.0, 1.0], atol=1e-12)

    def test_reconstruction_residual(self):
        m = random_symmetric(8, seed=0)
        spec = eig_sym(support(m))
        rebuilt = spec.eigenvectors @ np.diag(spec.eigenvalues) @ spec.eigenvectors.T
        assert np.max(np.abs(rebuilt - m)) <= 1e-10 * np.max(np.abs(m))

    def test_orthonormality(self):
        m = random_symmetric(12, seed=1)
        spec = eig_sym(support(m))
        gram = spec.eigenvectors.T @ spec.eigenvectors
        assert np.max(np.abs(gram - np.eye(12))) <= 1e-10

    def test_magnitude_ordering(self):
        m = random_symmetric(10, seed=2)
        spec = eig_sym(support(m))
        mags = np.abs(spec.eigenvalues)
        assert np.all(np.diff(mags) >= -1e-12)

    @pytest.mark.parametrize("seed", range(6))
    def test_2x2_matches_characteristic_polynomial(self, seed):
        m = random_symmetric(2, seed)
        spec = eig_sym(support(m))
        np.testing.assert_allclose(np.sort(spec.eigenvalues),
                                   char_poly_roots_2x2(m), atol=1e-9)

    @pytest.mark.parametrize("seed", range(6))
    def test_3x3_matches_characteristic_polynomial(self, seed):
        m = random_symmetric(3, seed)
        spec = eig_sym(support(m))
        np.testing.assert_allclose(np.sort(spec.eigenvalues),
                                   char_poly_roots_3x3(m), atol=1e-9)

    def test_matches_numpy_on_larger_matrix(self):
        m = random_symmetric(30, seed=3)
        spec = eig_sym(support(m))
        np.testing.assert_allclose(np.sort(spec.eigenvalues),
                                   np.linalg.eigvalsh(m), atol=1e-10)

    def test_rejects_asymmetric(self):
        m = np.array([[0.0, 1.0], [0.5, 0.0]])
        with pytest.raises(ConfigurationError):
            eig_sym(support(m))

    def test_normalized_laplacian_spectrum_ends(self):
        for seed in (0, 1, 2):
            g = generate_geometric_graph(30, 5, seed=seed)
            spec = eig_sym(normalize_support(laplacian(g)))
            assert abs(spec.eigenvalues[0]) <= 1e-8
            assert abs(spec.eigenvalues[-1] - 1.0) <= 1e-10


class TestGft:
    @pytest.fixture()
    def spec(self):
        return eig_sym(support(random_symmetric(9, seed=4)))

    def test_eigenvector_maps_to_basis_vector(self, spec):
        for i in (0, 4, 8):
            out = gft(spec, spec.eigenvectors[:, i])
            expected = np.zeros(9)
            expected[i] = 1.0
            np.testing.assert_allclose(out, expected, atol=1e-10)

    def test_parseval(self, spec):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(9)
        assert np.linalg.norm(gft(spec, x)) == pytest.approx(np.linalg.norm(x),
                                                             abs=1e-10)

    def test_round_trip(self, spec):
        rng = np.random.default_rng(6)
        xt = rng.standard_normal(9)
        np.testing.assert_allclose(gft(spec, igft(spec, xt)), xt, atol=1e-10)
        x = rng.standard_normal(9)
        np.testing.assert_allclose(igft(spec, gft(spec, x)), x, atol=1e-10)

    def test_shape_errors(self, spec):
        with pytest.raises(ShapeError):
            gft(spec, np.zeros(8))
        with pytest.raises(ShapeError):
            igft(spec, np.zeros(8))


class TestSubspaceSplit:
    @pytest.fixture()
    def spec(self):
        return eig_sym(support(random_symmetric(6, seed=7)))

    def test_two_node_split(self):
        spec = eig_sym(support(random_symmetric(2, seed=8)))
        split = split_subspace(spec, 1)
        np.testing.assert_array_equal(split.v_low[:, 0], spec.eigenvectors[:, 0])
        np.testing.assert_array_equal(split.v_high[:, 0], spec.eigenvectors[:, 1])

    def test_top_only_split(self, spec):
        split = split_subspace(spec, 5)
        assert split.v_high.shape == (6, 1)
        np.testing.assert_array_equal(split.v_high[:, 0], spec.eigenvectors[:, 5])

    def test_resolution_of_identity(self, spec):
        split = split_subspace(spec, 2)
        resolved = split.v_low @ split.v_low.T + split.v_high @ split.v_high.T
        assert np.max(np.abs(resolved - np.eye(6))) <= 1e-10

    def test_cross_orthogonality(self, spec):
        split = split_subspace(spec, 3)
        assert np.max(np.abs(split.v_low.T @ split.v_high)) <= 1e-10

    @pytest.mark.parametrize("k", [0, 6, -1, 7])
    def test_rejects_bad_split(self, spec, k):
        with pytest.raises(ConfigurationError):
            split_subspace(spec, k)


class TestProjectSubspace:
    @pytest.fixture()
    def split(self):
        spec = eig_sym(support(random_symmetric(7, seed=9)))
        return split_subspace(spec, 3), spec

    def test_high_eigenvector_fixed(self, split):
        sp, spec = split
        v_top = spec.eigenvectors[:, -1]
        out = project_subspace(sp, v_top, "high", normalize=True)
        assert min(np.max(np.abs(out - v_top)), np.max(np.abs(out + v_top))) <= 1e-10

    def test_orthogonal_input_degenerate(self, split):
        sp, spec = split
        with pytest.raises(DegenerateInputError):
            project_subspace(sp, spec.eigenvectors[:, 0], "high", normalize=True)

    def test_unit_norm_output(self, split):
        sp, _ = split
        rng = np.random.default_rng(10)
        out = project_subspace(sp, rng.standard_normal(7), "low", normalize=True)
        assert abs(np.linalg.norm(out) - 1.0) <= 1e-12

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_idempotent(self, seed):
        sp = split_subspace(eig_sym(support(random_symmetric(7, seed=9))), 3)
        rng = np.random.default_rng(seed)
        w = rng.standard_normal(7)
        once = project_subspace(sp, w, "high")
        twice = project_subspace(sp, once, "high")
        np.testing.assert_allclose(twice, once, atol=1e-10)
