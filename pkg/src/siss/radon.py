"""Radon projections of shift-expansion signals.

By linearity and the shift identity ``R_p(phi(. - k))(t) = R_p phi(t - p.k)``,
the projection of ``f = sum c_l phi(. - k_l)`` is a finite sum of shifted
copies of one profile. A Radon sample anchored at ``x`` is that projection
evaluated at ``t = p.x``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .generator import Direction
from .lattice import DomainError, Signal, in_domain
from .sampling import line_rule


@dataclass(frozen=True)
class ProjectedSignal:
    coeffs: np.ndarray
    profile: object
    shifted_centers: np.ndarray
    direction: Direction

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        val = self.profile(t[..., None] - self.shifted_centers) @ self.coeffs
        return val if np.ndim(val) else float(val)

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.profile.support
        return (float(self.shifted_centers.min() + lo), float(self.shifted_centers.max() + hi))

    def breakpoints(self) -> np.ndarray:
        return np.concatenate([self.profile.breakpoints + c for c in self.shifted_centers])


def project_signal(sig: Signal, direction: Direction) -> ProjectedSignal:
    profile = sig.generator.profile(direction)
    return ProjectedSignal(sig.coeffs, profile, direction.project(sig.grid.points), direction)


def radon_sample(sig: Signal, direction: Direction, x, projected: ProjectedSignal | None = None):
    """``R_p f(p.x)`` for anchor point(s) ``x`` in ``[-K, K]^2``."""
    x = np.asarray(x, dtype=float)
    if not np.all(in_domain(x, sig.K)):
        raise DomainError(f"sample anchor outside [-{sig.K}, {sig.K}]^2")
    proj = projected or project_signal(sig, direction)
    return proj(direction.project(x))


def projection_sup_on_domain(proj: ProjectedSignal, K: float, points: int = 4001) -> float:
    """``max |R_p f(t)|`` over a grid of ``|t| <= K C_theta`` plus breakpoints."""
    W = K * proj.direction.c_theta
    bps = proj.breakpoints()
    t = np.concatenate([np.linspace(-W, W, points), bps[np.abs(bps) <= W]])
    return float(np.max(np.abs(proj(t))))


def projection_l2_on_domain(proj: ProjectedSignal, K: float) -> float:
    """``int_{[-K,K]^2} |R_p f(p.x)|^2 dx``, exact for piecewise-cubic profiles."""
    nodes, weights = line_rule(proj.direction, K, proj.breakpoints(), None, order=8)
    return float(weights @ proj(nodes) ** 2)
