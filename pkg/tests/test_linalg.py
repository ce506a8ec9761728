import numpy as np
import pytest

from srcf.linalg import haar_orthogonal, haar_orthogonal_batch, spd_sqrt
from srcf.rng import RngStream


class TestSpdSqrt:
    def test_identity(self):
        np.testing.assert_allclose(spd_sqrt(np.eye(3)), np.eye(3), atol=1e-14)

    def test_diagonal(self):
        L = spd_sqrt(np.array([[4.0, 0.0], [0.0, 9.0]]))
        np.testing.assert_allclose(L, np.array([[2.0, 0.0], [0.0, 3.0]]), atol=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 5, 12])
    def test_random_spd_reconstruction(self, n):
        gen = np.random.default_rng(n)
        m = gen.standard_normal((n, n))
        a = m.T @ m + np.eye(n)
        L = spd_sqrt(a)
        rel = np.linalg.norm(L @ L.T - a) / np.linalg.norm(a)
        assert rel < 1e-10
        # Cholesky path gives a lower-triangular factor
        assert np.abs(np.triu(L, 1)).max() == 0.0

    def test_indefinite_falls_back_to_clamped_eigen_root(self):
        # eigenvalues {1, -1e-6}: Cholesky must fail, fallback must clamp
        v = np.array([[1.0, 0.0], [0.0, 1.0]])
        a = v @ np.diag([1.0, -1e-6]) @ v.T
        L = spd_sqrt(a)
        recon = L @ L.T
        w = np.linalg.eigvalsh(recon)
        assert w.min() >= -1e-15
        assert abs(recon[0, 0] - 1.0) < 1e-6

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            spd_sqrt(np.ones((2, 3)))

    def test_nan_rejected(self):
        a = np.eye(2)
        a[0, 1] = np.nan
        with pytest.raises(ValueError):
            spd_sqrt(a)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            spd_sqrt(np.array([[1.0, 0.5], [0.0, 1.0]]))


class TestHaarOrthogonal:
    @pytest.mark.parametrize("n", [1, 2, 3, 7, 15])
    def test_orthogonality_and_determinant(self, n):
        rng = RngStream(3, stream_id=n)
        for _ in range(5):
            q = haar_orthogonal(n, rng)
            assert np.abs(q.T @ q - np.eye(n)).max() < 1e-10
            assert abs(abs(np.linalg.det(q)) - 1.0) < 1e-10

    def test_n1_sign_frequency(self):
        # Q in {[+1], [-1]} each with probability 1/2
        qs = haar_orthogonal_batch(1, 10_000, RngStream(11))
        signs = qs[:, 0, 0]
        assert set(np.unique(np.round(signs))) <= {-1.0, 1.0}
        assert abs((signs > 0).mean() - 0.5) < 0.02

    def test_entry_means_vanish(self):
        # Haar symmetry: E[Q_ij] = 0, Var[Q_ij] = 1/n
        n, draws = 3, 10_000
        qs = haar_orthogonal_batch(n, draws, RngStream(12))
        means = qs.mean(axis=0)
        bound = 3.0 * np.sqrt((1.0 / n) / draws)
        assert np.abs(means).max() < bound

    def test_batch_matches_repeated_single(self):
        batch = haar_orthogonal_batch(4, 3, RngStream(5))
        for q in batch:
            assert np.abs(q.T @ q - np.eye(4)).max() < 1e-10

    def test_degenerate_dimension_rejected(self):
        with pytest.raises(ValueError):
            haar_orthogonal(0, RngStream(0))
