import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from siss.generator import Direction, radon_profile_closed_form
from siss.lattice import DomainError, Signal, shift_values
from siss.radon import (project_signal, projection_l2_on_domain, projection_sup_on_domain,
                        radon_sample)


def line_integral_of_expansion(sig, direction, t):
    """Integrate sum_l c_l phi(x - k_l) along {p.x = t} with scipy, breaking at
    every crossing of an integer grid line."""
    c, s = direction.p
    span = 4.0
    kinks = []
    for base, slope in ((t * c, -s), (t * s, c)):
        if abs(slope) > 1e-14:
            kinks += [(k - base) / slope for k in range(-3, 4)]
    pts = sorted(v for v in kinks if -span < v < span)

    def f(sv):
        x = np.array([t * c - sv * s, t * s + sv * c])
        return float(shift_values(sig.grid, sig.generator, x) @ sig.coeffs)

    return integrate.quad(f, -span, span, points=pts, limit=400, epsabs=1e-13, epsrel=1e-13)[0]


def test_zero_signal(grid9):
    proj = project_signal(Signal(np.zeros(9), grid9), Direction(0.4))
    assert np.all(proj(np.linspace(-3, 3, 101)) == 0.0)


@pytest.mark.parametrize("k", [(0, 0), (1, -1), (-1, 0)])
def test_delta_is_shifted_profile(grid9, k):
    d = Direction(1.1)
    c = np.zeros(9)
    c[grid9.index_of(k)] = 1
    proj = project_signal(Signal(c, grid9), d)
    prof = radon_profile_closed_form(d)
    t = np.linspace(-3, 3, 601)
    assert np.allclose(proj(t), prof(t - d.project(np.array(k, float))), atol=1e-15)


def test_projection_support(sig5, d513):
    proj = project_signal(sig5, d513)
    lo, hi = proj.support
    assert proj(lo - 1e-9) == 0.0 and proj(hi + 1e-9) == 0.0
    assert hi <= math.sqrt(2) * (0.5 + 1) * 2


def test_sec5_signal_at_origin(sig5, d513):
    assert abs(project_signal(sig5, d513)(0.0)
               - line_integral_of_expansion(sig5, d513, 0.0)) <= 1e-8


def test_sample_matches_line_quadrature(sig5, d513):
    assert abs(radon_sample(sig5, d513, (0.0, 0.0))
               - line_integral_of_expansion(sig5, d513, 0.0)) <= 1e-8


@pytest.mark.parametrize("theta", [0.0, 0.3, 2.2, 4.0])
def test_samples_vs_quadrature_other_directions(sig5, theta):
    d = Direction(theta)
    rng = np.random.default_rng(7)
    for x in rng.uniform(-0.5, 0.5, (5, 2)):
        assert abs(radon_sample(sig5, d, x)
                   - line_integral_of_expansion(sig5, d, float(d.project(x)))) <= 1e-8


def test_same_abscissa_same_sample(sig5, d513):
    x = np.array([0.2, -0.1])
    perp = np.array([-12 / 13, 5 / 13])
    x2 = x + 0.15 * perp
    assert radon_sample(sig5, d513, x) == pytest.approx(radon_sample(sig5, d513, x2), abs=1e-15)


def test_outside_domain(sig5, d513):
    with pytest.raises(DomainError):
        radon_sample(sig5, d513, (0.0, 0.51))
    with pytest.raises(DomainError):
        radon_sample(sig5, d513, [[0.0, 0.0], [0.7, 0.0]])


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 2 * math.pi, exclude_max=True),
       st.integers(0, 2**32 - 1))
def test_linearity(alpha, beta, theta, seed):
    from siss.lattice import build_lattice
    grid = build_lattice(1, 0.5)
    rng = np.random.default_rng(seed)
    f, g = Signal(rng.standard_normal(9), grid), Signal(rng.standard_normal(9), grid)
    d = Direction(theta)
    x = rng.uniform(-0.5, 0.5, (8, 2))
    lhs = radon_sample(alpha * f + beta * g, d, x)
    rhs = alpha * radon_sample(f, d, x) + beta * radon_sample(g, d, x)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_sup_and_l2_helpers(grid9):
    d = Direction(0.0)
    c = np.zeros(9)
    c[4] = 1
    proj = project_signal(Signal(c, grid9), d)
    assert projection_sup_on_domain(proj, 0.5) == pytest.approx(1.0)
    # axis direction: int_{[-1/2,1/2]^2} hat(x)^2 dx dy = 7/12
    assert projection_l2_on_domain(proj, 0.5) == pytest.approx(7 / 12, abs=1e-14)
