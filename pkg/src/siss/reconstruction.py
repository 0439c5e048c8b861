"""Sampling matrices and least-squares recovery from Radon samples.

Row ``j`` of the sampling matrix holds the shifted profiles evaluated at the
sample abscissa ``t_j = p.x_j``; coefficients are recovered by an orthogonal
(QR) least-squares solve, with the normal-equation form kept for comparison.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .generator import Direction, Generator, b2_tensor_generator
from .lattice import LatticeGrid, Signal, shift_values
from .sampling import SamplingSet

DEFAULT_RELATIVE_SIGMA = 1e-10


class RankDeficientError(ArithmeticError):
    """``U^T U`` is numerically singular; the samples do not determine f."""

    def __init__(self, lambda_min: float, lambda_max: float, threshold: float):
        self.lambda_min = lambda_min
        self.lambda_max = lambda_max
        self.threshold = threshold
        super().__init__(
            f"sampling matrix is rank-deficient: lambda_min(U^T U)={lambda_min:.3e} "
            f"below threshold {threshold:.3e} (lambda_max={lambda_max:.3e})")


class DegenerateGeometryWarning(UserWarning):
    """Sample abscissae ``p.x_j`` take fewer distinct values than unknowns."""


class UnderdeterminedWarning(UserWarning):
    """Fewer samples than lattice shifts."""


@dataclass(frozen=True)
class SamplingMatrix:
    entries: np.ndarray
    points: np.ndarray
    direction: Direction
    grid: LatticeGrid

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def abscissae(self) -> np.ndarray:
        return self.direction.project(self.points)


def build_sampling_matrix(X, direction: Direction, grid: LatticeGrid,
                          gen: Generator | None = None) -> SamplingMatrix:
    """``U[j, l] = R_p phi(p.x_j - p.k_l)``."""
    gen = gen or b2_tensor_generator()
    pts = X.points if isinstance(X, SamplingSet) else np.asarray(X, dtype=float).reshape(-1, 2)
    if pts.shape[0] < grid.Q:
        warnings.warn(f"{pts.shape[0]} samples for {grid.Q} unknowns", UnderdeterminedWarning,
                      stacklevel=2)
    t = direction.project(pts)
    distinct = np.unique(np.round(t, 12)).size
    if distinct < grid.Q:
        warnings.warn(f"only {distinct} distinct abscissae p.x_j for {grid.Q} unknowns",
                      DegenerateGeometryWarning, stacklevel=2)
    profile = gen.profile(direction)
    U = profile(t[:, None] - direction.project(grid.points)[None, :])
    return SamplingMatrix(np.asarray(U, dtype=float), pts, direction, grid)


@dataclass(frozen=True)
class StabilityCheck:
    stable: bool
    lambda_min: float
    lambda_max: float
    condition: float
    threshold: float

    def __bool__(self) -> bool:
        return self.stable


def _gram_spectrum(U: np.ndarray) -> np.ndarray:
    if U.size == 0:
        return np.zeros(1)
    s = np.linalg.svd(U, compute_uv=False)
    lam = np.zeros(U.shape[1])
    lam[: s.size] = s**2
    return np.sort(lam)


def stability_check(U: SamplingMatrix | np.ndarray, sigma: float | None = None) -> StabilityCheck:
    """``lambda_min(U^T U) >= sigma``; ``sigma`` defaults to ``1e-10 * lambda_max``."""
    entries = U.entries if isinstance(U, SamplingMatrix) else np.asarray(U, dtype=float)
    if sigma is not None and sigma <= 0:
        raise ValueError("sigma must be positive")
    lam = _gram_spectrum(entries)
    lmin, lmax = float(lam[0]), float(lam[-1])
    threshold = DEFAULT_RELATIVE_SIGMA * lmax if sigma is None else float(sigma)
    stable = lmax > 0 and lmin >= threshold
    cond = math.sqrt(lmax / lmin) if lmin > 0 else math.inf
    return StabilityCheck(bool(stable), lmin, lmax, cond, threshold)


@dataclass(frozen=True)
class ReconstructionResult:
    coeffs: np.ndarray
    sigma_min: float
    condition: float
    residual: float
    lambda_min: float


def solve_coefficients(U: SamplingMatrix | np.ndarray, Y, method: str = "qr",
                       sigma: float | None = None) -> ReconstructionResult:
    """Least-squares coefficients for ``U c = Y``.

    ``method="qr"`` uses a Householder QR factorization of ``U``;
    ``method="normal"`` solves ``(U^T U) c = U^T Y`` by Cholesky, literally.
    A matrix below the default relative threshold raises
    ``RankDeficientError``; one that only misses a caller-supplied ``sigma``
    is solved with a warning.
    """
    A = U.entries if isinstance(U, SamplingMatrix) else np.asarray(U, dtype=float)
    Y = np.asarray(Y, dtype=float).ravel()
    if A.ndim != 2 or Y.size != A.shape[0]:
        raise ValueError(f"{Y.size} sample values for a {A.shape} sampling matrix")
    check = stability_check(A)
    if not check:
        raise RankDeficientError(check.lambda_min, check.lambda_max, check.threshold)
    if sigma is not None and check.lambda_min < sigma:
        warnings.warn(f"lambda_min(U^T U)={check.lambda_min:.3e} below sigma={sigma:.3e}; "
                      "solution may be unstable", RuntimeWarning, stacklevel=2)
    if method == "qr":
        q, r = np.linalg.qr(A, mode="reduced")
        c = solve_triangular(r, q.T @ Y)
    elif method == "normal":
        c = cho_solve(cho_factor(A.T @ A), A.T @ Y)
    else:
        raise ValueError(f"unknown method {method!r}")
    return ReconstructionResult(c, math.sqrt(check.lambda_min), check.condition,
                                float(np.linalg.norm(A @ c - Y)), check.lambda_min)


def reconstruction_functions(U: SamplingMatrix, grid: LatticeGrid, gen: Generator | None, x):
    """``Upsilon_j(x) = sum_{l,i} U[j, i] ((U^T U)^{-1})[i, l] phi(x - k_l)``.

    Returns an array of shape ``x.shape[:-1] + (n,)``. With ``U = QR`` the
    product ``U (U^T U)^{-1}`` equals ``Q R^{-T}``, which is what is applied:
    forming ``U^T U`` would square the condition number.
    """
    gen = gen or b2_tensor_generator()
    A = U.entries
    check = stability_check(A)
    if not check:
        raise RankDeficientError(check.lambda_min, check.lambda_max, check.threshold)
    phi = shift_values(grid, gen, np.asarray(x, dtype=float))
    flat = phi.reshape(-1, grid.Q)
    q, r = np.linalg.qr(A, mode="reduced")
    out = (q @ solve_triangular(r, flat.T, trans="T")).T
    return out.reshape(phi.shape[:-1] + (A.shape[0],))


def reconstruct(points, values, direction: Direction, grid: LatticeGrid,
                gen: Generator | None = None, method: str = "qr") -> Signal:
    """Signal in the shift space whose Radon samples best match ``values``."""
    gen = gen or b2_tensor_generator()
    U = build_sampling_matrix(points, direction, grid, gen)
    result = solve_coefficients(U, values, method=method)
    return Signal(result.coeffs, grid, gen)


def relative_error(c_true, c_est) -> float | None:
    """``||c - c~|| / ||c||``; ``None`` when ``c`` is zero (0/0)."""
    c_true = np.asarray(c_true, dtype=float)
    den = np.linalg.norm(c_true)
    if den == 0:
        return None
    return float(np.linalg.norm(c_true - np.asarray(c_est, dtype=float)) / den)
