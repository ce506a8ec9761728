import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from srcf.rng import RngStream
from srcf.rules import (
    IntegrationScheme,
    SchemeKind,
    build_rule,
    draw_rule_batch,
    gaussian_monomial_moment,
    radial_weights_deg3,
    radial_weights_deg5,
    reported_eval_count,
    simplex_midpoints,
    simplex_vertices,
    spherical_weights_deg5,
)
from srcf.samplers import RadialNodes

from oracles import monomial_moment

ALL_LABELS = ["ckf3", "ckf5", "sif3", "sif5", "qsif5", "mc"]


def scheme(label, n_m=1, mc=2000):
    return IntegrationScheme.from_label(label, n_m=n_m, mc_samples=mc if label == "mc" else None)


class TestRadialWeightsDeg5:
    def test_hand_example(self):
        w0, w1, w2 = radial_weights_deg5(1, RadialNodes(1.0, 2.0))
        assert abs(w0 - 0.5) < 1e-15
        assert abs(w1 - 1.0 / 3.0) < 1e-15
        assert abs(w2 - 1.0 / 6.0) < 1e-15

    @settings(deadline=None, max_examples=200)
    @given(
        n=hst.integers(min_value=1, max_value=20),
        rho1=hst.floats(min_value=0.05, max_value=4.0),
        gap=hst.floats(min_value=0.05, max_value=4.0),
    )
    def test_moment_identities(self, n, rho1, gap):
        rho2 = rho1 + gap
        w0, w1, w2 = radial_weights_deg5(n, RadialNodes(rho1, rho2))
        # constants, E[r^2] = n and E[r^4] = n(n+2) are matched exactly up to
        # the conditioning of the cancellation (weights blow up as nodes
        # approach each other or zero)
        scale = abs(w0) + abs(w1) + abs(w2)
        assert abs(w0 + w1 + w2 - 1.0) < 1e-12 * max(1.0, scale)
        assert abs(w1 * rho1**2 + w2 * rho2**2 - n) < 1e-12 * max(n, scale)
        assert abs(w1 * rho1**4 + w2 * rho2**4 - n * (n + 2.0)) < 1e-12 * max(n * (n + 2), scale)

    def test_single_node_rejected(self):
        with pytest.raises(ValueError):
            radial_weights_deg5(2, RadialNodes(1.0))


class TestRadialWeightsDeg3:
    def test_center_vanishes_at_sqrt_n(self):
        w0, w1 = radial_weights_deg3(2, np.sqrt(2.0))
        assert abs(w0) < 1e-15 and abs(w1 - 1.0) < 1e-15

    @settings(deadline=None, max_examples=100)
    @given(
        n=hst.integers(min_value=1, max_value=20),
        rho=hst.floats(min_value=0.05, max_value=10.0),
    )
    def test_moment_identities(self, n, rho):
        w0, w1 = radial_weights_deg3(n, rho)
        assert abs(w0 + w1 - 1.0) < 1e-12
        assert abs(w1 * rho * rho - n) < 1e-9 * n

    def test_zero_radius_rejected(self):
        with pytest.raises(ValueError):
            radial_weights_deg3(2, 0.0)


class TestSimplex:
    def test_n2_vertices(self):
        a = simplex_vertices(2)
        expected = np.array(
            [[1.0, 0.0], [-0.5, np.sqrt(3) / 2], [-0.5, -np.sqrt(3) / 2]]
        )
        np.testing.assert_allclose(a, expected, atol=1e-14)

    @pytest.mark.parametrize("n", range(1, 13))
    def test_unit_norm_and_pairwise_dot(self, n):
        a = simplex_vertices(n)
        assert a.shape == (n + 1, n)
        np.testing.assert_allclose(np.linalg.norm(a, axis=1), 1.0, atol=1e-12)
        gram = a @ a.T
        off = gram[~np.eye(n + 1, dtype=bool)]
        np.testing.assert_allclose(off, -1.0 / n, atol=1e-12)

    def test_n2_first_midpoint(self):
        a = simplex_vertices(2)
        b = simplex_midpoints(2, a)
        np.testing.assert_allclose(b[0], [0.5, np.sqrt(3) / 2], atol=1e-14)

    @pytest.mark.parametrize("n", range(2, 11))
    def test_midpoint_count_and_norms(self, n):
        a = simplex_vertices(n)
        b = simplex_midpoints(n, a)
        assert b.shape == (n * (n + 1) // 2, n)
        np.testing.assert_allclose(np.linalg.norm(b, axis=1), 1.0, atol=1e-12)

    def test_n1_has_no_midpoints(self):
        assert simplex_midpoints(1, simplex_vertices(1)).shape == (0, 1)


class TestSphericalWeights:
    def test_n2_values(self):
        wa, wb = spherical_weights_deg5(2)
        assert abs(wa - 5.0 / 36.0) < 1e-15
        assert abs(wb - 1.0 / 36.0) < 1e-15

    @pytest.mark.parametrize("n", range(2, 21))
    def test_total_mass_is_one(self, n):
        wa, wb = spherical_weights_deg5(n)
        assert abs(2 * (n + 1) * wa + n * (n + 1) * wb - 1.0) < 1e-12

    def test_vertex_weight_vanishes_at_n7(self):
        wa, _ = spherical_weights_deg5(7)
        assert wa == 0.0

    def test_n1_rejected(self):
        with pytest.raises(ValueError):
            spherical_weights_deg5(1)


class TestSchemeType:
    def test_deterministic_nm_forced_to_one_with_warning(self):
        with pytest.warns(UserWarning):
            s = IntegrationScheme(SchemeKind.CKF5, n_m=10)
        assert s.n_m == 1

    def test_mc_requires_samples(self):
        with pytest.raises(ValueError):
            IntegrationScheme(SchemeKind.MC)

    def test_mc_samples_only_for_mc(self):
        with pytest.raises(ValueError):
            IntegrationScheme(SchemeKind.SIF5, mc_samples=100)

    def test_unknown_label_rejected(self):
        with pytest.raises(ValueError):
            IntegrationScheme.from_label("ukf")

    def test_degree5_rejects_dimension_one(self):
        for label in ("ckf5", "sif5", "qsif5"):
            with pytest.raises(ValueError):
                build_rule(scheme(label), 1, RngStream(0))


class TestBuildRule:
    @pytest.mark.parametrize("label", ALL_LABELS)
    def test_weights_sum_to_one(self, label):
        ps = build_rule(scheme(label), 5, RngStream(21, stream_id=label))
        assert abs(ps.weights.sum() - 1.0) < 1e-12

    @pytest.mark.parametrize("label", ["ckf3", "ckf5", "sif3", "sif5", "qsif5"])
    def test_first_two_moments_exact(self, label):
        n = 6
        for draw in range(5):
            ps = build_rule(scheme(label), n, RngStream(22).substream(label, draw))
            mean = ps.weights @ ps.points
            cov = np.einsum("p,pi,pj->ij", ps.weights, ps.points, ps.points)
            assert np.abs(mean).max() < 1e-10
            assert np.abs(cov - np.eye(n)).max() < 1e-10

    def test_ckf3_structure(self):
        n = 4
        ps = build_rule(scheme("ckf3"), n, RngStream(0))
        assert ps.points.shape == (2 * n, n)
        assert np.allclose(sorted(np.abs(ps.points).max(axis=1)), np.sqrt(n))
        assert np.allclose(ps.weights, 1.0 / (2 * n))

    def test_sif5_point_counts(self):
        n = 6
        ps = build_rule(scheme("sif5"), n, RngStream(1))
        # stored set is the full symmetric expansion; the operating count
        # tallies each +-pair once and is what budgets are quoted in
        assert ps.points.shape == (2 * (n + 1) * (n + 2) + 1, n)
        assert ps.eval_count == n * n + 3 * n + 3 == 57

    def test_point_set_symmetric(self):
        ps = build_rule(scheme("sif5"), 4, RngStream(2))
        pts = ps.points
        # every non-center point's negation is present with equal weight
        for idx in (1, 5, len(pts) - 1):
            diff = np.abs(pts + pts[idx]).sum(axis=1)
            j = int(np.argmin(diff))
            assert diff[j] < 1e-12
            assert abs(ps.weights[idx] - ps.weights[j]) < 1e-15

    def test_batch_shapes(self):
        pts, w = draw_rule_batch(scheme("sif3"), 3, 7, RngStream(3))
        assert pts.shape == (7, 7, 3)
        assert w.shape == (7, 7)
        np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)


class TestPolynomialExactness:
    @staticmethod
    def _max_monomial_dev(ps, max_degree):
        worst = 0.0
        n = ps.dim
        from itertools import combinations_with_replacement

        for total in range(max_degree + 1):
            for combo in combinations_with_replacement(range(n), total):
                alpha = np.bincount(combo, minlength=n) if combo else np.zeros(n, int)
                vals = np.prod(ps.points ** alpha, axis=1)
                dev = abs(ps.weights @ vals - monomial_moment(alpha))
                worst = max(worst, dev)
        return worst

    @pytest.mark.parametrize("label", ["ckf5", "sif5", "qsif5"])
    def test_degree5_exactness(self, label):
        for draw in range(10):
            ps = build_rule(scheme(label), 4, RngStream(30).substream(label, draw))
            assert self._max_monomial_dev(ps, 5) < 1e-9

    @pytest.mark.parametrize("label", ["ckf3", "sif3"])
    def test_degree3_exactness(self, label):
        for draw in range(10):
            ps = build_rule(scheme(label), 4, RngStream(31).substream(label, draw))
            assert self._max_monomial_dev(ps, 3) < 1e-9

    def test_ckf3_fourth_moment_is_n(self):
        n = 6
        ps = build_rule(scheme("ckf3"), n, RngStream(0))
        assert abs(ps.weights @ ps.points[:, 0] ** 4 - n) < 1e-12

    @pytest.mark.parametrize(
        "label,poly",
        [
            ("sif5", lambda c: 1.0 + 2.0 * c[:, 0] - c[:, 1] ** 3
             + 0.5 * c[:, 0] ** 2 * c[:, 1] ** 2 + c[:, 2] ** 4),
            ("sif3", lambda c: 0.5 - c[:, 0] + 3.0 * c[:, 1] ** 2 + c[:, 2] ** 3),
        ],
    )
    def test_zero_variance_within_exactness_degree(self, label, poly):
        # within the exactness degree, the stochastic rules have no variance
        n = 3
        rng = RngStream(32, stream_id=label)
        vals = []
        for _ in range(50):
            ps = build_rule(scheme(label), n, rng)
            vals.append(ps.weights @ poly(ps.points))
        assert np.var(vals) < 1e-18

    def test_sif5_unbiased_for_degree_six(self):
        n, draws = 6, 20_000
        rng = RngStream(33)
        pts, w = draw_rule_batch(scheme("sif5"), n, draws, rng)
        ests = np.einsum("dp,dp->d", w, pts[:, :, 0] ** 6)
        se = ests.std(ddof=1) / np.sqrt(draws)
        assert abs(ests.mean() - 15.0) < 4.0 * se


class TestEvalCounts:
    def test_reported_counts_at_n6(self):
        n = 6
        assert reported_eval_count(scheme("ckf3"), n) == 12
        assert reported_eval_count(scheme("ckf5"), n) == 57
        assert reported_eval_count(scheme("sif3", n_m=50), n) == 601
        assert reported_eval_count(scheme("sif5", n_m=10), n) == 570
        assert reported_eval_count(scheme("qsif5", n_m=10), n) == 561
        assert reported_eval_count(scheme("mc", mc=600), n) == 600


class TestGaussianMonomialMoment:
    @pytest.mark.parametrize(
        "alpha,expected",
        [((0,), 1.0), ((2,), 1.0), ((4,), 3.0), ((6,), 15.0), ((3,), 0.0), ((2, 2), 1.0), ((4, 2), 3.0)],
    )
    def test_values(self, alpha, expected):
        assert gaussian_monomial_moment(alpha) == expected

    def test_matches_independent_oracle(self):
        gen = np.random.default_rng(0)
        for _ in range(50):
            alpha = gen.integers(0, 7, size=4)
            assert gaussian_monomial_moment(alpha) == monomial_moment(alpha)
