import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from siss.generator import (Direction, b2_eval, b2_tensor_generator, hat, line_support,
                            phi_eval, radon_profile_closed_form, radon_quadrature_oracle,
                            steep_branch_profile, zero_generator)
from siss.quadrature import QuadratureError, adaptive_gauss_legendre, gauss_legendre

THETA_513 = math.atan2(12, 5)
angles = st.floats(0.0, 2 * math.pi, allow_nan=False, exclude_max=True)


@pytest.mark.parametrize("x,expected", [(0.0, 0.0), (0.5, 0.5), (1.0, 1.0), (1.5, 0.5),
                                        (2.0, 0.0), (-0.1, 0.0), (2.5, 0.0)])
def test_b2_values(x, expected):
    assert b2_eval(x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("x,y,expected", [(0, 0, 1.0), (0.5, -0.5, 0.25), (1.01, 0, 0.0),
                                          (1.0, 0.0, 0.0), (-0.25, 0.75, 0.1875)])
def test_phi_values(x, y, expected):
    assert phi_eval(x, y) == pytest.approx(expected, abs=1e-15)


def test_phi_is_hat_tensor():
    xs = np.linspace(-1.3, 1.3, 27)
    X, Y = np.meshgrid(xs, xs)
    assert np.allclose(phi_eval(X, Y), hat(X) * hat(Y), atol=1e-15)


class TestDirection:
    def test_unit_normal(self):
        for th in np.linspace(0, 7, 50):
            p = Direction(th).p
            assert abs(p[0] ** 2 + p[1] ** 2 - 1) < 1e-15

    def test_from_vector_normalizes(self):
        d = Direction.from_vector(5, 12)
        assert d.p == pytest.approx((5 / 13, 12 / 13), abs=1e-16)
        assert d.theta == pytest.approx(THETA_513)

    @pytest.mark.parametrize("theta", [0.0, 0.3, math.pi / 4, 1.2, 2.0, 3.5, 4.9, 6.0])
    def test_c_theta_quadrant_table(self, theta):
        d = Direction(theta)
        assert d.c_theta == pytest.approx(abs(math.cos(theta)) + abs(math.sin(theta)), abs=1e-14)
        assert 1 - 1e-15 <= d.c_theta <= math.sqrt(2) + 1e-15

    def test_axis_aligned(self):
        assert Direction(0.0).is_axis_aligned()
        assert Direction(math.pi / 2).is_axis_aligned()
        assert not Direction(0.3).is_axis_aligned()


class TestClosedForm:
    def test_at_origin_matches_oracle(self, gen):
        d = Direction(THETA_513)
        prof = radon_profile_closed_form(d)
        assert abs(prof(0.0) - radon_quadrature_oracle(gen, d, 0.0, 1e-12)) <= 1e-10

    def test_vanishes_at_support_edge(self):
        d = Direction(THETA_513)
        prof = radon_profile_closed_form(d)
        assert prof(d.cos + d.sin) == 0.0
        assert prof(3.0) == 0.0

    @settings(max_examples=60, deadline=None)
    @given(angles, st.floats(-2, 2))
    def test_even(self, theta, t):
        prof = radon_profile_closed_form(Direction(theta))
        assert abs(prof(t) - prof(-t)) <= 1e-14

    @settings(max_examples=60, deadline=None)
    @given(angles)
    def test_unit_mass_exact(self, theta):
        assert abs(radon_profile_closed_form(Direction(theta)).integral() - 1) <= 1e-12

    @pytest.mark.parametrize("theta", [0.0, 0.2, THETA_513, math.pi / 4, 2.5, 4.0, 5.9])
    def test_unit_mass_trapezoid(self, theta):
        prof = radon_profile_closed_form(Direction(theta))
        lo, hi = prof.support
        t = np.linspace(lo, hi, 400_001)
        assert abs(np.trapezoid(prof(t), t) - 1) <= 1e-9

    @settings(max_examples=60, deadline=None)
    @given(angles)
    def test_support_and_nonnegativity(self, theta):
        d = Direction(theta)
        prof = radon_profile_closed_form(d)
        w = abs(d.cos) + abs(d.sin)
        t = np.linspace(-w - 0.5, w + 0.5, 2001)
        vals = prof(t)
        assert np.all(vals[np.abs(t) >= w] == 0.0)
        assert vals.min() >= -1e-14

    @settings(max_examples=40, deadline=None)
    @given(angles)
    def test_continuous_at_breakpoints(self, theta):
        prof = radon_profile_closed_form(Direction(theta))
        bp = prof.breakpoints
        for i in range(1, bp.size - 1):
            assert abs(prof.piece(i - 1, bp[i]) - prof.piece(i, bp[i])) <= 1e-12
        assert abs(prof.piece(0, bp[0])) <= 1e-12
        assert abs(prof.piece(bp.size - 2, bp[-1])) <= 1e-12

    def test_breakpoints_include_pairwise_sums(self):
        d = Direction(0.7)
        a, b = abs(d.cos), abs(d.sin)
        for v in (a + b, a - b, b - a, -a - b):
            assert np.min(np.abs(radon_profile_closed_form(d).breakpoints - v)) < 1e-14

    @pytest.mark.parametrize("theta", [0.0, math.pi / 2, math.pi, 3 * math.pi / 2])
    def test_axis_branch_is_triangle(self, theta):
        prof = radon_profile_closed_form(Direction(theta))
        t = np.linspace(-1.5, 1.5, 301)
        assert np.allclose(prof(t), hat(t), atol=1e-14)

    def test_near_axis_continuity(self):
        t = np.linspace(-1.2, 1.2, 241)
        for eps in (1e-6, 1e-9, 1e-11):
            assert np.max(np.abs(radon_profile_closed_form(Direction(eps))(t) - hat(t))) < 5 * eps

    @pytest.mark.parametrize("theta", [THETA_513, 1.3, 1.5])
    def test_steep_branch_formula(self, theta):
        d = Direction(theta)
        prof = radon_profile_closed_form(d)
        t = np.linspace(-1.6, 1.6, 3201)
        assert np.max(np.abs(prof(t) - steep_branch_profile(theta, t))) <= 1e-13

    def test_steep_branch_rejects_shallow(self):
        with pytest.raises(ValueError):
            steep_branch_profile(0.5, 0.0)

    def test_at_pi_over_4(self, gen):
        d = Direction(math.pi / 4)
        assert abs(radon_profile_closed_form(d)(0.0)
                   - radon_quadrature_oracle(gen, d, 0.0, 1e-10)) <= 1e-9
        assert radon_profile_closed_form(d)(0.0) == pytest.approx(2 * math.sqrt(2) / 3, abs=1e-14)


class TestOracle:
    def test_beyond_support(self, gen):
        assert radon_quadrature_oracle(gen, Direction(THETA_513), 3.0, 1e-10) == 0.0

    @pytest.mark.parametrize("theta", [0.0, 0.4, 2.0])
    def test_zero_generator(self, theta):
        assert radon_quadrature_oracle(zero_generator(), Direction(theta), 0.2, 1e-10) == 0.0

    def test_rejects_bad_tol(self, gen):
        with pytest.raises(ValueError):
            radon_quadrature_oracle(gen, Direction(0.3), 0.0, 0.0)

    def test_random_agreement(self, gen):
        rng = np.random.default_rng(2024)
        thetas = rng.uniform(0, 2 * math.pi, 200)
        ts = rng.uniform(-1.5, 1.5, 200)
        worst = max(abs(radon_profile_closed_form(Direction(th))(t)
                        - radon_quadrature_oracle(gen, Direction(th), t))
                    for th, t in zip(thetas, ts))
        assert worst <= 1e-8

    def test_line_support_misses_box(self):
        assert line_support(1.0, Direction(0.0), 1.5) is None
        lo, hi = line_support(1.0, Direction(0.0), 0.2)
        assert (lo, hi) == pytest.approx((-1.0, 1.0))

    def test_scaled_generator_profile(self):
        g2 = b2_tensor_generator().scaled(2.0)
        d = Direction(0.9)
        assert g2.profile(d)(0.1) == pytest.approx(2 * radon_profile_closed_form(d)(0.1))
        assert g2(0.0, 0.0) == 2.0


class TestQuadrature:
    def test_gauss_legendre_exact(self):
        x, w = gauss_legendre(5)
        assert w.sum() == pytest.approx(2.0)
        assert w @ x**8 == pytest.approx(2 / 9)

    def test_adaptive_smooth(self):
        assert adaptive_gauss_legendre(np.sin, 0, math.pi, 1e-12) == pytest.approx(2.0, abs=1e-12)

    def test_adaptive_kink(self):
        val = adaptive_gauss_legendre(lambda x: np.abs(x - 0.3), -1, 1, 1e-10)
        assert val == pytest.approx((1.3**2 + 0.7**2) / 2, abs=1e-9)

    def test_budget_exhaustion(self):
        with pytest.raises(QuadratureError):
            adaptive_gauss_legendre(lambda x: np.sign(x - 1 / 3), 0, 1, 1e-14, max_panels=8)
