"""Analytic and empirical stability of random Radon sample sets.

The analytic side evaluates the matrix-Bernstein failure bound ``eps_Q`` from
the generator constants (``C_phi``, ``m2``, ``M2``), the direction factor
``C_theta`` and the frame constants of the shifted profiles. The empirical
side runs seeded Monte Carlo trials of the two-sided sampling inequality.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .generator import Direction, Generator, b2_tensor_generator
from .lattice import LatticeGrid, gram_matrix, shift_values, stability_constants
from .quadrature import panel_rule
from .sampling import BoundedDensity, draw_samples, make_rng, trial_seed

SINGULAR_FRAME_RATIO = 1e-12


class SingularFrameError(ArithmeticError):
    """The shifted profiles are (numerically) linearly dependent on the window."""


class InadmissibleGammaError(ValueError):
    def __init__(self, gamma: float, upper: float):
        self.gamma = gamma
        self.interval = (0.0, upper)
        super().__init__(f"gamma={gamma!r} outside the admissible interval (0, {upper!r})")


def c_phi(grid: LatticeGrid, gen: Generator | None = None, resolution: int = 513,
          refinements: int = 4) -> float:
    """``sup_{x in [-K,K]^2} sum_l |phi(x - k_l)|``.

    Grid maximum on ``resolution x resolution`` points, then repeated 33x33
    zooms around the current maximizer.
    """
    gen = gen or b2_tensor_generator()
    K = grid.K

    def shift_sum(pts):
        return np.abs(shift_values(grid, gen, pts)).sum(axis=-1)

    g = np.linspace(-K, K, resolution)
    X, Y = np.meshgrid(g, g, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], -1)
    vals = shift_sum(pts)
    best = int(np.argmax(vals))
    center, value = pts[best], float(vals[best])
    h = 2 * K / (resolution - 1)
    for _ in range(refinements):
        loc = np.linspace(-h, h, 33)
        LX, LY = np.meshgrid(center[0] + loc, center[1] + loc, indexing="ij")
        cand = np.clip(np.stack([LX.ravel(), LY.ravel()], -1), -K, K)
        cv = shift_sum(cand)
        i = int(np.argmax(cv))
        if cv[i] > value:
            center, value = cand[i], float(cv[i])
        h /= 16
    return value


def profile_frame_gram(direction: Direction, grid: LatticeGrid,
                       gen: Generator | None = None) -> np.ndarray:
    """``H[l, m] = int_{|t| <= K C_theta} R phi(t - p.k_l) R phi(t - p.k_m) dt``,
    exact on panels split at every shifted profile breakpoint."""
    gen = gen or b2_tensor_generator()
    prof = gen.profile(direction)
    shifts = direction.project(grid.points)
    W = grid.K * direction.c_theta
    bps = np.concatenate([[-W, W]] + [prof.breakpoints + sh for sh in shifts])
    nodes, weights = panel_rule(np.clip(bps, -W, W), 8)
    V = prof(nodes[:, None] - shifts)
    H = (V * weights[:, None]).T @ V
    return 0.5 * (H + H.T)


def frame_constants(direction: Direction, grid: LatticeGrid,
                    gen: Generator | None = None) -> tuple[float, float]:
    """Extremal eigenvalues ``(C_1p, C_2p)`` of the shifted-profile Gram."""
    lam = np.linalg.eigvalsh(profile_frame_gram(direction, grid, gen))
    if lam[0] < SINGULAR_FRAME_RATIO * lam[-1]:
        raise SingularFrameError(
            f"shifted profiles are linearly dependent on |t| <= K C_theta for theta="
            f"{direction.theta:.6g}: lambda_min={lam[0]:.3e}, lambda_max={lam[-1]:.3e}")
    return float(lam[0]), float(lam[-1])


@dataclass(frozen=True)
class BoundConstants:
    c_phi: float
    c_theta: float
    c1p: float
    c2p: float
    m2: float
    M2: float
    xi_lower: float
    xi_upper: float

    def as_dict(self) -> dict:
        return asdict(self)


def bound_constants(direction: Direction, grid: LatticeGrid, density: BoundedDensity,
                    gen: Generator | None = None) -> BoundConstants:
    gen = gen or b2_tensor_generator()
    sc = stability_constants(grid, gen)
    c1p, c2p = frame_constants(direction, grid, gen)
    return BoundConstants(c_phi(grid, gen), direction.c_theta, c1p, c2p, sc.m2, sc.M2,
                          density.lower, density.upper)


def gamma_upper(K: float, constants: BoundConstants) -> float:
    """Supremum of admissible ``gamma``: ``2 K C_1p C_xi_l / M2^2``."""
    return 2.0 * K * constants.c1p * constants.xi_lower / constants.M2**2


def default_gamma(K: float, constants: BoundConstants) -> float:
    return 0.5 * gamma_upper(K, constants)


def check_gamma(gamma: float, K: float, constants: BoundConstants) -> None:
    upper = gamma_upper(K, constants)
    if not (0.0 < gamma < upper):
        raise InadmissibleGammaError(gamma, upper)


def bernstein_exponent(n: int, gamma: float, K: float, constants: BoundConstants) -> float:
    """The (positive) exponent ``x`` in ``eps_Q = Q exp(-x)``."""
    b = constants
    ct2 = b.c_theta**2
    num = n * b.m2**4 * gamma**2
    den = 8 * K**2 * ct2 * b.M2**2 * (
        4 * K**2 * ct2 * b.c_phi**2 * b.xi_upper
        + gamma * (b.c_phi**2 + b.xi_upper * b.m2**2) / 3.0)
    return num / den


def bernstein_epsilon(n: int, gamma: float, K: float, direction: Direction | None,
                      constants: BoundConstants, Q: int) -> float:
    """``eps_Q``: the sampling inequality fails with probability at most this."""
    if n <= 0:
        raise ValueError("n must be positive")
    check_gamma(gamma, K, constants)
    if direction is not None and abs(direction.c_theta - constants.c_theta) > 1e-12:
        raise ValueError("constants were computed for a different direction")
    return Q * math.exp(-bernstein_exponent(n, gamma, K, constants))


def theorem_bracket(K: float, gamma: float, constants: BoundConstants) -> tuple[float, float]:
    """Lower and upper factors of the sampling inequality for unit-norm f.

    The upper factor carries ``2 sqrt(2) K`` against ``2 K`` below, as
    displayed with the theorem; it is conservative.
    """
    b = constants
    lower = 2 * K * b.c1p * b.xi_lower / b.M2**2 - gamma
    upper = 2 * math.sqrt(2) * K * b.c2p * b.xi_upper / b.m2**2 + gamma
    return lower, upper


@dataclass(frozen=True)
class StabilityReport:
    n: int
    gamma: float
    epsilon_q: float
    exponent: float
    empirical_success_rate: float
    lower_bracket: float
    upper_bracket: float
    empirical_lower: float
    empirical_upper: float
    uniform_success_rate: float
    trials: int
    seed: int
    constants: BoundConstants

    @property
    def binomial_stderr(self) -> float:
        p = self.empirical_success_rate
        return math.sqrt(max(p * (1 - p), 1e-300) / self.trials)

    def meets_bound(self, z: float = 3.0) -> bool:
        """Empirical rate at least ``1 - eps_Q`` up to ``z`` binomial stderr
        (evaluated at the bound's own success probability)."""
        target = max(0.0, 1.0 - self.epsilon_q)
        sd = math.sqrt(target * (1 - target) / self.trials)
        return self.empirical_success_rate >= target - z * sd


def monte_carlo_stability(trials: int, n: int, direction: Direction, density: BoundedDensity,
                          gamma: float | None, grid: LatticeGrid, gen: Generator | None = None,
                          seed: int = 0, constants: BoundConstants | None = None) -> StabilityReport:
    """Per trial: draw ``n`` samples and a random unit-norm signal, and test
    ``lower <= (1/n) sum_j |R_p f(x_j)|^2 <= upper``.

    Also tracks, per trial, the extreme values of that ratio over *all*
    signals (generalized eigenvalues of ``(U^T U / n, G)``), whose bracket
    membership gives ``uniform_success_rate``.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    gen = gen or b2_tensor_generator()
    K = grid.K
    b = constants or bound_constants(direction, grid, density, gen)
    gamma = default_gamma(K, b) if gamma is None else float(gamma)
    check_gamma(gamma, K, b)
    lower, upper = theorem_bracket(K, gamma, b)

    G = gram_matrix(grid, gen)
    L_inv = np.linalg.inv(np.linalg.cholesky(G))
    profile = gen.profile(direction)
    shifts = direction.project(grid.points)

    hits = uniform_hits = 0
    emp_lo, emp_hi = math.inf, -math.inf
    for i in range(trials):
        ts = trial_seed(seed, i)
        X = draw_samples(density, n, ts).points
        rng = make_rng(trial_seed(ts, 1))
        c = rng.standard_normal(grid.Q)
        c /= math.sqrt(c @ G @ c)
        U = profile(direction.project(X)[:, None] - shifts)
        ratio = float(np.sum((U @ c) ** 2) / n)
        hits += lower <= ratio <= upper
        # extremes of (1/n)|Uc|^2 / c^T G c
        M = L_inv @ (U.T @ U / n) @ L_inv.T
        lam = np.linalg.eigvalsh(0.5 * (M + M.T))
        emp_lo, emp_hi = min(emp_lo, lam[0]), max(emp_hi, lam[-1])
        uniform_hits += lower <= lam[0] and lam[-1] <= upper
    x = bernstein_exponent(n, gamma, K, b)
    return StabilityReport(n, gamma, grid.Q * math.exp(-x), x, hits / trials, lower, upper,
                           float(emp_lo), float(emp_hi), uniform_hits / trials, trials, seed, b)
