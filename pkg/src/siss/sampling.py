"""Random sample sets on ``[-K, K]^2`` and the random statistics built on them.

Densities satisfy ``0 < lower <= pdf <= upper`` on the square. Samples are
drawn by rejection from the uniform envelope; all randomness flows from a
64-bit seed, and Monte Carlo trials take seeds derived from
``(master_seed, trial_index)``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import erf

from .generator import Direction, Generator, b2_tensor_generator, line_support
from .lattice import LatticeGrid, Signal, gram_matrix, in_domain
from .quadrature import gauss_legendre, panel_rule


class EnvelopeError(ValueError):
    """A density exceeded its declared upper bound."""


class DensityError(ValueError):
    """A density failed validation on ``[-K, K]^2``."""


def trial_seed(master_seed: int, index: int) -> int:
    """64-bit seed for trial ``index``; independent of evaluation order."""
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


# --------------------------------------------------------------------------
# Densities
# --------------------------------------------------------------------------

class BoundedDensity:
    """Probability density on ``[-K, K]^2`` with ``lower <= pdf <= upper``."""

    tag = "density"
    is_uniform = False

    def __init__(self, K: float):
        if K <= 0:
            raise ValueError("K must be positive")
        self.K = float(K)

    def pdf(self, x) -> np.ndarray:
        raise NotImplementedError

    @property
    def lower(self) -> float:
        raise NotImplementedError

    @property
    def upper(self) -> float:
        raise NotImplementedError

    def extremal_points(self) -> np.ndarray:
        K = self.K
        return np.array([[-K, -K], [-K, K], [K, -K], [K, K], [0.0, 0.0]])

    def spec(self) -> dict:
        return {"kind": self.tag}

    def validate(self, resolution: int = 101) -> None:
        """Check the bounds on a grid plus the declared extremal points, and
        the unit mass by tensor Gauss-Legendre quadrature."""
        K = self.K
        g = np.linspace(-K, K, resolution)
        X, Y = np.meshgrid(g, g, indexing="ij")
        pts = np.concatenate([np.stack([X.ravel(), Y.ravel()], -1), self.extremal_points()])
        vals = self.pdf(pts)
        slack = 1e-12 * self.upper
        if not (self.lower > 0 and np.all(vals >= self.lower - slack)
                and np.all(vals <= self.upper + slack)):
            raise DensityError(
                f"{self.tag}: pdf range [{vals.min():.6g}, {vals.max():.6g}] "
                f"escapes declared bounds [{self.lower:.6g}, {self.upper:.6g}]")
        x, w = gauss_legendre(40)
        nodes, weights = K * x, K * w
        NX, NY = np.meshgrid(nodes, nodes, indexing="ij")
        mass = float(np.sum(np.outer(weights, weights).ravel()
                            * self.pdf(np.stack([NX.ravel(), NY.ravel()], -1))))
        if abs(mass - 1.0) > 1e-6:
            raise DensityError(f"{self.tag}: integrates to {mass:.9f}, not 1")

    def chord_mass(self, direction: Direction, t: np.ndarray, order: int = 32) -> np.ndarray:
        """``int pdf(t p + s p_perp) ds`` over the chord of the square at each ``t``."""
        out = np.zeros(t.shape)
        x, w = gauss_legendre(order)
        c, s = direction.p
        for i, tv in enumerate(t):
            span = line_support(self.K, direction, float(tv))
            if span is None:
                continue
            half, mid = 0.5 * (span[1] - span[0]), 0.5 * (span[0] + span[1])
            sv = mid + half * x
            pts = np.stack([tv * c - sv * s, tv * s + sv * c], -1)
            out[i] = half * np.dot(w, self.pdf(pts))
        return out


class UniformDensity(BoundedDensity):
    tag = "uniform"
    is_uniform = True

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], 1.0 / (4.0 * self.K**2))

    @property
    def lower(self) -> float:
        return 1.0 / (4.0 * self.K**2)

    @property
    def upper(self) -> float:
        return 1.0 / (4.0 * self.K**2)

    def chord_mass(self, direction, t, order=32):
        return chord_lengths(direction, self.K, t) * self.upper


class TruncatedGaussianDensity(BoundedDensity):
    """Isotropic Gaussian restricted to the square and renormalized."""

    tag = "truncated-gaussian"

    def __init__(self, K: float, mu=(0.0, 0.0), sigma: float = 0.5):
        super().__init__(K)
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        self.mu = (float(mu[0]), float(mu[1]))
        self.sigma = float(sigma)
        r2 = math.sqrt(2.0) * self.sigma
        self._norm = 1.0
        for m in self.mu:
            self._norm *= 0.5 * (erf((self.K - m) / r2) - erf((-self.K - m) / r2))
        self._norm *= 2.0 * math.pi * self.sigma**2

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        d2 = (x[..., 0] - self.mu[0]) ** 2 + (x[..., 1] - self.mu[1]) ** 2
        return np.exp(-0.5 * d2 / self.sigma**2) / self._norm

    def _nearest(self):
        return np.clip(self.mu, -self.K, self.K)

    def _farthest(self):
        return np.where(np.asarray(self.mu) >= 0, -self.K, self.K)

    @property
    def lower(self) -> float:
        return float(self.pdf(self._farthest()))

    @property
    def upper(self) -> float:
        return float(self.pdf(self._nearest()))

    def extremal_points(self):
        return np.concatenate([super().extremal_points(),
                               [self._nearest(), self._farthest()]])

    def spec(self) -> dict:
        return {"kind": self.tag, "mu": list(self.mu), "sigma": self.sigma}


def density_from_spec(spec: dict | str | None, K: float) -> BoundedDensity:
    if spec is None or spec == "uniform":
        return UniformDensity(K)
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind", "uniform")
    if kind == "uniform":
        return UniformDensity(K)
    if kind == "truncated-gaussian":
        return TruncatedGaussianDensity(K, spec.get("mu", (0.0, 0.0)), spec.get("sigma", 0.5))
    raise ValueError(f"unknown density kind {kind!r}")


# --------------------------------------------------------------------------
# Sample sets
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplingSet:
    points: np.ndarray
    K: float
    seed: int | None = None
    density: str = "uniform"

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# K={self.K!r},seed={self.seed},density={self.density}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y"])
        for x, y in self.points:
            w.writerow([f"{x:.17g}", f"{y:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SamplingSet":
        lines = text.splitlines()
        meta = {}
        if lines and lines[0].startswith("#"):
            for item in lines[0][1:].strip().split(","):
                key, _, val = item.partition("=")
                meta[key.strip()] = val.strip()
            lines = lines[1:]
        rows = list(csv.reader(lines))
        pts = np.array([[float(r[0]), float(r[1])] for r in rows[1:]], dtype=float)
        seed = meta.get("seed")
        return cls(pts.reshape(-1, 2), float(meta.get("K", "nan")),
                   None if seed in (None, "None") else int(seed),
                   meta.get("density", "unknown"))


def draw_samples(density: BoundedDensity, n: int, seed: int,
                 batch: int | None = None) -> SamplingSet:
    """``n`` i.i.d. points from ``density`` by rejection from the uniform
    envelope ``upper``; deterministic in ``seed``."""
    if n <= 0:
        raise ValueError("n must be a positive integer")
    rng = make_rng(seed)
    K, upper = density.K, density.upper
    accepted: list[np.ndarray] = []
    have = 0
    batch = batch or max(16, 2 * n)
    while have < n:
        prop = rng.uniform(-K, K, size=(batch, 2))
        u = rng.uniform(0.0, upper, size=batch)
        vals = density.pdf(prop)
        if np.any(vals > upper * (1 + 1e-12)):
            raise EnvelopeError(
                f"{density.tag}: pdf reached {vals.max():.6g} above declared upper {upper:.6g}")
        keep = prop[u <= vals]
        accepted.append(keep)
        have += keep.shape[0]
    pts = np.concatenate(accepted)[:n]
    pts.setflags(write=False)
    return SamplingSet(pts, K, int(seed), density.tag)


# --------------------------------------------------------------------------
# Integrals of functions of t = p.x over the square
# --------------------------------------------------------------------------

def chord_lengths(direction: Direction, K: float, t) -> np.ndarray:
    """Length of ``{x in [-K, K]^2 : p.x = t}``; piecewise linear in ``t``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    a, b = abs(direction.cos), abs(direction.sin)
    lo, hi = max(a, b), min(a, b)
    tt = np.abs(t)
    if hi < 1e-15:
        return np.where(tt <= K * lo, 2.0 * K / lo, 0.0)
    flat = K * (lo - hi)
    edge = K * (lo + hi)
    return np.where(tt <= flat, 2.0 * K / lo,
                    np.where(tt < edge, (edge - tt) / (lo * hi), 0.0))


def line_rule(direction: Direction, K: float, breakpoints=(),
              density: BoundedDensity | None = None, order: int = 8):
    """Nodes ``t_i`` and weights ``w_i`` with
    ``int_{[-K,K]^2} xi(x) g(p.x) dx ~= sum_i w_i g(t_i)``.

    Panels break at the given ``t``-breakpoints and at the projected corners
    of the square; ``density=None`` means Lebesgue measure. For a uniform
    density and piecewise polynomial ``g`` the rule is exact once ``order``
    exceeds half the degree of ``g`` plus one.
    """
    c, s = direction.p
    W = K * (abs(c) + abs(s))
    corners = [K * (c + s), K * (c - s), -K * (c + s), -K * (c - s)]
    cuts = np.concatenate([[-W, W], corners, np.asarray(breakpoints, dtype=float)])
    cuts = np.clip(cuts, -W, W)
    nodes, weights = panel_rule(cuts, order)
    if density is None:
        mass = chord_lengths(direction, K, nodes)
    else:
        mass = density.chord_mass(direction, nodes)
    return nodes, weights * mass


# --------------------------------------------------------------------------
# Random statistics
# --------------------------------------------------------------------------

class ProjectionStatistics:
    """Caches ``E(Psi)`` for one (direction, lattice, density, generator).

    ``Psi_j = v v^T`` with ``v_l = R_p phi(p.x_j - p.k_l)``; ``X_j`` is its
    centred version and ``Y_j(f) = c^T X_j c`` for the coefficient vector of a
    unit-norm signal.
    """

    def __init__(self, direction: Direction, grid: LatticeGrid,
                 density: BoundedDensity, generator: Generator | None = None):
        self.direction = direction
        self.grid = grid
        self.density = density
        self.generator = generator or b2_tensor_generator()
        self.profile = self.generator.profile(direction)
        self.shifts = direction.project(grid.points)

    def vectors(self, x) -> np.ndarray:
        t = self.direction.project(np.asarray(x, dtype=float))
        return self.profile(t[..., None] - self.shifts)

    @cached_property
    def expected_psi(self) -> np.ndarray:
        bps = np.concatenate([self.profile.breakpoints + sh for sh in self.shifts])
        order = 8 if self.density.is_uniform else 16
        nodes, weights = line_rule(self.direction, self.grid.K, bps, self.density, order)
        V = self.profile(nodes[:, None] - self.shifts)
        E = (V * weights[:, None]).T @ V
        return 0.5 * (E + E.T)

    def psi(self, x_j) -> np.ndarray:
        v = self.vectors(x_j)
        return np.multiply.outer(v, v) if v.ndim == 1 else v[..., :, None] * v[..., None, :]

    def x_matrix(self, x_j) -> np.ndarray:
        return self.psi(x_j) - self.expected_psi

    def mean_square(self, coeffs) -> float:
        """``int xi |R_p f(p.x)|^2 dx`` for coefficient vector ``coeffs``."""
        c = np.asarray(coeffs, dtype=float)
        return float(c @ self.expected_psi @ c)

    def y_statistic(self, sig: Signal, x_j, gram: np.ndarray | None = None,
                    check_norm: bool = True) -> float:
        if check_norm:
            G = gram_matrix(sig.grid, sig.generator) if gram is None else gram
            norm = math.sqrt(sig.coeffs @ G @ sig.coeffs)
            if abs(norm - 1.0) > 1e-9:
                raise ValueError(f"signal must have unit L2 norm on the domain, got {norm:.12g}")
        if not np.all(in_domain(np.asarray(x_j, dtype=float), sig.K)):
            raise ValueError("sample point outside the domain")
        sample = self.vectors(x_j) @ sig.coeffs
        return sample**2 - self.mean_square(sig.coeffs)


def psi_matrix(direction: Direction, x_j, grid: LatticeGrid,
               generator: Generator | None = None) -> np.ndarray:
    gen = generator or b2_tensor_generator()
    v = gen.profile(direction)(direction.project(np.asarray(x_j, dtype=float))
                               - direction.project(grid.points))
    return np.outer(v, v)


def x_matrix(direction: Direction, x_j, grid: LatticeGrid, density: BoundedDensity,
             generator: Generator | None = None) -> np.ndarray:
    return ProjectionStatistics(direction, grid, density, generator).x_matrix(x_j)


def y_statistic(sig: Signal, direction: Direction, x_j, density: BoundedDensity) -> float:
    return ProjectionStatistics(direction, sig.grid, density, sig.generator).y_statistic(sig, x_j)
