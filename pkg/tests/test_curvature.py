"""Tests for exact and finite-difference curvature engines."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from curvlab.curvature import (
    CoordinateMetric,
    RiemannData,
    WarpedTorusMetric,
    christoffel_exact,
    compare_exact_vs_fd,
    constant_curvature_riemann,
    constant_profile,
    cosh_power_profile,
    gaussian_profile,
    kulkarni_nomizu,
    laplacian_fd,
    product_sphere_flat_riemann,
    random_curvature_tensor,
    ricci_scalar,
    riemann_exact,
    riemann_fd,
    to_subchart,
)

R_DOMAIN = (-10.0, 10.0)


def equality_case_metric(n, m, lam=1.0, eps=1.0):
    """Gaussian-profile member used repeatedly below: u, f = exp(+-c lam r^2)."""
    c_u = m / ((2.0 * m - 2.0) * (n - m - 2.0))
    c_f = 1.0 / (2.0 * (n - m - 2.0))
    return WarpedTorusMetric(n, m, eps, gaussian_profile(-c_f * lam),
                             gaussian_profile(c_u * lam), R_DOMAIN)


def sphere_chart(radius=1.0):
    def g(x):
        return np.diag([radius ** 2, radius ** 2 * np.sin(x[0]) ** 2])
    return CoordinateMetric(2, g, ((0.3, np.pi - 0.3), (-4.0, 4.0)))


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

class TestProfiles:
    @pytest.mark.parametrize("profile", [
        gaussian_profile(0.5),
        gaussian_profile(-0.25),
        cosh_power_profile(0.5, 3.0),
        cosh_power_profile(0.5, -2.0),
    ])
    def test_derivatives_match_finite_differences(self, profile):
        r = np.linspace(-2.0, 2.0, 9)
        h = 1e-5
        d1_fd = (profile(r + h) - profile(r - h)) / (2 * h)
        d2_fd = (profile(r + h) - 2 * profile(r) + profile(r - h)) / h ** 2
        assert_allclose(profile.d1(r), d1_fd, rtol=1e-8, atol=1e-8)
        assert_allclose(profile.d2(r), d2_fd, rtol=1e-5, atol=1e-5)

    def test_constant_profile(self):
        p = constant_profile(3.0)
        r = np.array([0.0, 1.0])
        assert_allclose(p(r), [3.0, 3.0])
        assert_allclose(p.d1(r), 0.0)
        assert_allclose(p.d2(r), 0.0)


# ---------------------------------------------------------------------------
# metric container
# ---------------------------------------------------------------------------

class TestWarpedTorusMetric:
    def test_dimension_split(self):
        g = equality_case_metric(6, 2)
        assert g.sphere_dim == 4
        assert g.torus_dim == 1
        assert g.frame_labels() == ("sphere",) * 4 + ("r", "torus")
        assert g.coordinate_frame_indices() == (4, 5)

    def test_rejects_bad_parameters(self):
        c = constant_profile()
        with pytest.raises(ValueError):
            WarpedTorusMetric(6, 6, 1.0, c, c, R_DOMAIN)
        with pytest.raises(ValueError):
            WarpedTorusMetric(6, 0, 1.0, c, c, R_DOMAIN)
        with pytest.raises(ValueError):
            WarpedTorusMetric(6, 2, -1.0, c, c, R_DOMAIN)
        with pytest.raises(ValueError):
            WarpedTorusMetric(6, 2, 1.0, c, c, (2.0, 2.0))

    def test_domain_enforced(self):
        g = equality_case_metric(6, 2)
        with pytest.raises(ValueError):
            christoffel_exact(g, 11.0)

    def test_json_dict_fields(self):
        g = equality_case_metric(6, 2)
        d = g.to_json_dict(profile_case="gaussian", lam=1.0)
        assert set(d) == {"n", "m", "epsilon", "profile", "r_domain"}
        assert d["profile"]["case"] == "gaussian"
        assert d["r_domain"] == [-10.0, 10.0]


# ---------------------------------------------------------------------------
# Christoffel symbols
# ---------------------------------------------------------------------------

class TestChristoffel:
    def test_example_values(self):
        # u = exp(r^2/2), f = exp(-r^2/4): u'/u = r, f'/f = -r/2
        g = equality_case_metric(6, 2, lam=1.0)
        tab = christoffel_exact(g, 0.5)
        assert tab.torus_r == pytest.approx(0.5, abs=1e-12)
        assert tab.sphere_r == pytest.approx(-0.25, abs=1e-12)
        u = np.exp(0.125)
        assert tab.r_torus == pytest.approx(-0.5 * u ** 2, rel=1e-12)
        f = np.exp(-0.0625)
        assert tab.r_sphere_coeff == pytest.approx(-f * (-0.25 * f), rel=1e-12)

    def test_radial_symmetry_at_origin(self):
        g = equality_case_metric(6, 3, lam=2.0)
        tab = christoffel_exact(g, 0.0)
        assert tab.sphere_r == 0.0
        assert tab.torus_r == 0.0
        assert tab.r_torus == 0.0
        assert tab.r_sphere_coeff == 0.0

    def test_constant_profiles_flat_table(self):
        g = WarpedTorusMetric(6, 3, 1.0, constant_profile(), constant_profile(),
                              R_DOMAIN)
        tab = christoffel_exact(g, 1.3)
        assert tab.sphere_r == tab.torus_r == tab.r_torus == tab.r_sphere_coeff == 0.0

    def test_vanishing_classes_enumerated(self):
        tab = christoffel_exact(equality_case_metric(6, 2), 1.0)
        d = tab.as_dict()
        assert len(tab.zeros) == 12
        assert all(d[name] == 0.0 for name in tab.zeros)


# ---------------------------------------------------------------------------
# exact curvature
# ---------------------------------------------------------------------------

class TestRiemannExact:
    def test_sectional_values_6_2(self):
        g = equality_case_metric(6, 2, lam=1.0)
        rd = riemann_exact(g, 0.5)
        c = rd.components
        # sphere-r: -f''/f with f = exp(-r^2/4)
        assert c[0, 4, 0, 4] == pytest.approx(0.4375, abs=1e-12)
        # torus-torus would need m >= 3; here torus-r and sphere-torus:
        assert c[4, 5, 4, 5] == pytest.approx(-1.25, abs=1e-12)
        assert c[0, 5, 0, 5] == pytest.approx(0.125, abs=1e-12)
        assert c[0, 1, 0, 1] == pytest.approx(np.exp(0.125) - 0.0625, rel=1e-12)

    def test_torus_torus_value(self):
        # m = 3: a = 2/3, u'/u = 2 c_u lam r with c_u = 3/4
        g = equality_case_metric(6, 3, lam=1.0)
        rd = riemann_exact(g, 0.5)
        u1 = 2 * 0.75 * 0.5
        assert rd.components[4, 5, 4, 5] == pytest.approx(-(2.0 / 3.0 * u1) ** 2,
                                                          rel=1e-12)

    def test_mixed_components_vanish(self):
        rd = riemann_exact(equality_case_metric(7, 3), 0.9)
        c = rd.components.copy()
        for a in range(7):
            for b in range(7):
                c[a, b, a, b] = c[a, b, b, a] = 0.0
        assert np.max(np.abs(c)) == 0.0

    def test_radial_ricci_matches_formula(self):
        g = equality_case_metric(6, 2, lam=1.0)
        for r in np.linspace(-2.0, 2.0, 7):
            rd = riemann_exact(g, float(r))
            assert rd.ricci[4, 4] == pytest.approx(1.0 - 2.0 * r * r, abs=1e-10)

    def test_ricci_diagonal_and_symmetries(self):
        rd = riemann_exact(equality_case_metric(7, 4, lam=0.5, eps=0.3), 1.7)
        rd.validate(1e-10, relative=True)
        off = rd.ricci - np.diag(np.diag(rd.ricci))
        assert np.max(np.abs(off)) < 1e-12

    def test_product_limit_matches_oracle(self):
        # constant profiles: metric is S^2(sqrt 2) x R x T^3 up to frame order
        g = WarpedTorusMetric(6, 4, np.sqrt(2.0), constant_profile(),
                              constant_profile(), R_DOMAIN)
        rd = riemann_exact(g, 0.3)
        oracle = product_sphere_flat_riemann(2, np.sqrt(2.0), 4)
        assert_allclose(rd.components, oracle.components, atol=1e-14)


# ---------------------------------------------------------------------------
# curvature containers and algebra
# ---------------------------------------------------------------------------

class TestRiemannData:
    def test_shape_check(self):
        with pytest.raises(ValueError):
            RiemannData.from_components(np.zeros((3, 3, 3)))

    def test_validate_catches_broken_symmetry(self):
        rd = constant_curvature_riemann(4, 1.0)
        bad = rd.components.copy()
        bad[0, 1, 0, 1] += 1e-3
        with pytest.raises(ValueError):
            RiemannData.from_components(bad).validate(1e-9)

    def test_contraction_helper_idempotent(self):
        rd = random_curvature_tensor(5, np.random.default_rng(7))
        ric, scal = ricci_scalar(rd)
        assert_allclose(ric, rd.ricci)
        assert scal == pytest.approx(rd.scalar)

    def test_constant_curvature_contractions(self):
        rd = constant_curvature_riemann(5, 1.0)
        assert_allclose(rd.ricci, 4.0 * np.eye(5), atol=1e-14)
        assert rd.scalar == pytest.approx(20.0)
        assert rd.components[0, 1, 0, 1] == pytest.approx(1.0)

    def test_product_oracle_contractions(self):
        rd = product_sphere_flat_riemann(3, 1.0, 3)
        assert_allclose(np.diag(rd.ricci), [2, 2, 2, 0, 0, 0], atol=1e-14)
        assert rd.scalar == pytest.approx(6.0)
        assert rd.components[0, 1, 0, 1] == pytest.approx(1.0)
        assert rd.components[3, 4, 3, 4] == 0.0

    @pytest.mark.parametrize("seed", range(6))
    def test_random_tensors_have_all_symmetries(self, seed):
        rng = np.random.default_rng(seed)
        rd = random_curvature_tensor(5 + seed % 3, rng)
        rd.validate(1e-12, relative=True)

    def test_kulkarni_nomizu_of_identity(self):
        kn = kulkarni_nomizu(np.eye(3), np.eye(3))
        rd = RiemannData.from_components(0.5 * kn)
        assert rd.components[0, 1, 0, 1] == pytest.approx(1.0)
        assert rd.scalar == pytest.approx(6.0)


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

class TestFiniteDifference:
    def test_round_sphere(self):
        rd = riemann_fd(sphere_chart(), [1.0, 0.2])
        assert rd.components[0, 1, 0, 1] == pytest.approx(1.0, abs=5e-7)
        assert_allclose(rd.ricci, np.eye(2), atol=5e-7)
        assert rd.scalar == pytest.approx(2.0, abs=2e-6)
        rd.validate(1e-6, relative=True)

    @pytest.mark.parametrize("c", [2.0, 0.5])
    def test_metric_scaling(self, c):
        rd = riemann_fd(sphere_chart(radius=c), [1.0, 0.2])
        assert rd.components[0, 1, 0, 1] == pytest.approx(1.0 / c ** 2, abs=5e-7)

    def test_flat_torus_exactly_flat(self):
        chart = CoordinateMetric(3, lambda x: np.eye(3),
                                 ((-4.0, 4.0),) * 3)
        rd = riemann_fd(chart, [0.1, -0.2, 0.3])
        assert np.max(np.abs(rd.components)) < 1e-12

    def test_polar_plane_flat_despite_symbols(self):
        chart = CoordinateMetric(
            2, lambda x: np.diag([1.0, x[0] ** 2]),
            ((0.5, 3.0), (-4.0, 4.0)))
        rd = riemann_fd(chart, [1.3, 0.4])
        assert np.max(np.abs(rd.components)) < 1e-7

    def test_rejects_point_near_boundary(self):
        with pytest.raises(ValueError):
            riemann_fd(sphere_chart(), [0.301, 0.0])

    def test_rejects_indefinite_metric(self):
        chart = CoordinateMetric(2, lambda x: np.diag([1.0, -1.0]),
                                 ((-1.0, 1.0),) * 2)
        with pytest.raises(ValueError):
            riemann_fd(chart, [0.0, 0.0])

    def test_laplacian_on_sphere(self):
        # Delta cos(theta) = -2 cos(theta) on the unit round sphere
        val = laplacian_fd(sphere_chart(), lambda x: np.cos(x[0]), [1.0, 0.2])
        assert val == pytest.approx(-2.0 * np.cos(1.0), rel=1e-6)

    def test_laplacian_flat(self):
        chart = CoordinateMetric(2, lambda x: np.eye(2), ((-4.0, 4.0),) * 2)
        val = laplacian_fd(chart, lambda x: x[0] ** 2 + x[1] ** 2, [0.3, -0.1])
        assert val == pytest.approx(4.0, rel=1e-8)


# ---------------------------------------------------------------------------
# the two engines against each other
# ---------------------------------------------------------------------------

class TestCrossEngine:
    def test_subchart_shape(self):
        chart, labels = to_subchart(equality_case_metric(6, 2))
        assert chart.dim == 4
        assert labels == ("sphere", "sphere", "r", "torus")
        chart, labels = to_subchart(equality_case_metric(7, 4, lam=0.5))
        assert chart.dim == 5
        assert labels == ("sphere", "sphere", "r", "torus", "torus")

    def test_subchart_needs_sphere_factor(self):
        c = constant_profile()
        g = WarpedTorusMetric(4, 3, 1.0, c, c, R_DOMAIN)
        with pytest.raises(ValueError):
            to_subchart(g)

    def test_gaussian_profiles_agree(self):
        assert compare_exact_vs_fd(equality_case_metric(6, 2, lam=1.0), 0.5) < 1e-5
        assert compare_exact_vs_fd(
            equality_case_metric(6, 3, lam=1.0, eps=0.5), -0.7) < 1e-5

    def test_cosh_profiles_agree(self):
        # u = cosh(r/2)^3, f = cosh(r/2)^-2 solves the profile system at
        # (n, m) = (7, 3), lambda = 1
        g = WarpedTorusMetric(7, 3, 1.0, cosh_power_profile(0.5, -2.0),
                              cosh_power_profile(0.5, 3.0), R_DOMAIN)
        assert compare_exact_vs_fd(g, 0.8) < 1e-5

    def test_cosh_profiles_agree_three_torus_directions(self):
        w = np.sqrt(1.0 / 3.0)
        g = WarpedTorusMetric(7, 4, 0.7, cosh_power_profile(w, -3.0),
                              cosh_power_profile(w, 4.0), R_DOMAIN)
        assert compare_exact_vs_fd(g, 0.6) < 1e-5
