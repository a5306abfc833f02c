import numpy as np
import pytest
import scipy.linalg

from wamkit import (
    DimMismatch,
    InvalidInput,
    NotPositiveSemidefinite,
    psd_sqrt,
    sym_eigendecomp,
    symmetrize,
    trace_sqrt_product,
)
from wamkit.linalg import pack_lower, unpack_lower

from util import rand_psd


class TestSymmetrize:
    def test_result_is_exactly_symmetric(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = rng.normal(size=(5, 5))
            s = symmetrize(a)
            assert np.array_equal(s, s.T)

    def test_symmetric_input_unchanged(self):
        a = np.array([[2.0, 1.0], [1.0, 3.0]])
        assert np.array_equal(symmetrize(a), a)

    def test_rejects_non_square(self):
        with pytest.raises(InvalidInput):
            symmetrize(np.zeros((2, 3)))


class TestSymEigendecomp:
    def test_identity(self):
        vals, vecs = sym_eigendecomp(np.eye(4))
        np.testing.assert_allclose(vals, np.ones(4))
        np.testing.assert_allclose(vecs @ vecs.T, np.eye(4), atol=1e-14)

    def test_diagonal_sorted_descending(self):
        vals, _ = sym_eigendecomp(np.diag([3.0, 1.0, 7.0]))
        np.testing.assert_allclose(vals, [7.0, 3.0, 1.0])

    def test_reconstruction_and_orthonormality(self):
        rng = np.random.default_rng(11)
        for trial in range(25):
            d = 1 + trial % 9
            a = rand_psd(rng, d)
            vals, vecs = sym_eigendecomp(a)
            assert np.all(np.diff(vals) <= 0)
            np.testing.assert_allclose((vecs * vals) @ vecs.T, a, atol=1e-10)
            np.testing.assert_allclose(vecs.T @ vecs, np.eye(d), atol=1e-12)

    def test_rejects_asymmetric(self):
        with pytest.raises(InvalidInput):
            sym_eigendecomp(np.array([[1.0, 2.0], [2.0 + 1e-12, 1.0]]))

    def test_rejects_nan(self):
        with pytest.raises(InvalidInput):
            sym_eigendecomp(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestPsdSqrt:
    def test_identity(self):
        np.testing.assert_allclose(psd_sqrt(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        np.testing.assert_allclose(
            psd_sqrt(np.diag([4.0, 9.0, 0.0])), np.diag([2.0, 3.0, 0.0])
        )

    def test_square_reconstructs(self):
        rng = np.random.default_rng(3)
        for trial in range(30):
            d = 1 + trial % 8
            a = rand_psd(rng, d, scale=2.0)
            root = psd_sqrt(a)
            assert np.array_equal(root, root.T)
            budget = 1e-6 * max(1.0, np.linalg.norm(a, "fro"))
            assert np.linalg.norm(root @ root - a, "fro") <= budget

    def test_matches_scipy_on_positive_definite(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            a = rand_psd(rng, 6, jitter=0.5)
            np.testing.assert_allclose(psd_sqrt(a), scipy.linalg.sqrtm(a), atol=1e-9)

    def test_clamps_roundoff_negatives(self):
        vals, vecs = sym_eigendecomp(rand_psd(np.random.default_rng(9), 3))
        a = symmetrize((vecs * np.array([2.0, 1.0, -5e-9])) @ vecs.T)
        root = psd_sqrt(a)
        assert np.all(np.isfinite(root))

    def test_rejects_negative_spectrum(self):
        with pytest.raises(NotPositiveSemidefinite):
            psd_sqrt(np.diag([1.0, -1.0]))


class TestTraceSqrtProduct:
    def test_diagonal_closed_form(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            d = rng.integers(1, 9)
            a = rng.uniform(0.1, 5.0, size=d)
            b = rng.uniform(0.1, 5.0, size=d)
            got = trace_sqrt_product(np.diag(a), np.diag(b))
            assert got == pytest.approx(np.sqrt(a * b).sum(), rel=1e-12)

    def test_identity_pair(self):
        assert trace_sqrt_product(np.eye(4), np.eye(4)) == pytest.approx(4.0)

    def test_argument_symmetry(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            d = int(rng.integers(1, 10))
            s1 = rand_psd(rng, d)
            s2 = rand_psd(rng, d)
            left = trace_sqrt_product(s1, s2)
            right = trace_sqrt_product(s2, s1)
            assert abs(left - right) <= 1e-6 * max(1.0, abs(left))

    def test_shape_mismatch(self):
        with pytest.raises(DimMismatch):
            trace_sqrt_product(np.eye(2), np.eye(3))


class TestLowerTrianglePacking:
    def test_round_trip(self):
        rng = np.random.default_rng(13)
        for d in range(1, 8):
            a = rand_psd(rng, d)
            np.testing.assert_array_equal(unpack_lower(pack_lower(a), d), a)

    def test_known_order(self):
        a = np.array([[1.0, 2.0], [2.0, 3.0]])
        np.testing.assert_array_equal(pack_lower(a), [1.0, 2.0, 3.0])

    def test_wrong_length_rejected(self):
        with pytest.raises(InvalidInput):
            unpack_lower(np.zeros(4), 2)
