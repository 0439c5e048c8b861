"""Translation lattices, finite shift expansions and their stability constants."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .generator import Generator, b2_tensor_generator
from .quadrature import gauss_legendre

# The coefficient matrix used in the box-spline round-trip experiment,
# indexed c[i, j] over {-1, 0, 1}^2 in lexicographic order.
REFERENCE_COEFFS = np.array([
    [0.1717, -1.3467, 0.1075],
    [-1.7869, -0.3373, 2.4782],
    [-0.8612, -0.3645, 0.2011],
])


class DomainError(ValueError):
    """A point lies outside the signal domain ``[-K, K]^2``."""


class UnstableShiftsError(ValueError):
    """The Gram matrix of the shifts is not positive definite on the domain."""


@dataclass(frozen=True)
class LatticeGrid:
    """Integer shifts ``[ceil(-N-K), floor(N+K)]^2`` in lexicographic order."""

    points: np.ndarray
    N: float
    K: float

    @property
    def Q(self) -> int:
        return int(self.points.shape[0])

    @property
    def side(self) -> np.ndarray:
        return np.unique(self.points[:, 0])

    def index_of(self, k) -> int:
        hit = np.flatnonzero((self.points == np.asarray(k)).all(axis=1))
        if hit.size == 0:
            raise KeyError(f"{tuple(k)} not in lattice")
        return int(hit[0])


def build_lattice(N: float, K: float) -> LatticeGrid:
    if N <= 0 or K <= 0:
        raise ValueError("N and K must be positive")
    lo, hi = math.ceil(-N - K), math.floor(N + K)
    side = np.arange(lo, hi + 1)
    points = np.array([(i, j) for i in side for j in side], dtype=int).reshape(-1, 2)
    if points.shape[0] <= 1:
        raise ValueError(f"lattice for N={N}, K={K} has Q={points.shape[0]}; need Q > 1")
    points.setflags(write=False)
    return LatticeGrid(points, float(N), float(K))


def in_domain(x, K: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return (np.abs(x[..., 0]) <= K) & (np.abs(x[..., 1]) <= K)


def shift_values(grid: LatticeGrid, gen: Generator, x) -> np.ndarray:
    """``phi(x - k_l)`` for every lattice point; shape ``x.shape[:-1] + (Q,)``."""
    x = np.asarray(x, dtype=float)
    dx = x[..., None, 0] - grid.points[:, 0]
    dy = x[..., None, 1] - grid.points[:, 1]
    return gen(dx, dy)


@dataclass(frozen=True)
class Signal:
    """``f(x) = sum_l coeffs[l] * phi(x - k_l)`` on ``[-K, K]^2``."""

    coeffs: np.ndarray
    grid: LatticeGrid
    generator: Generator = field(default_factory=b2_tensor_generator)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).ravel()
        if c.size != self.grid.Q:
            raise ValueError(f"expected {self.grid.Q} coefficients, got {c.size}")
        object.__setattr__(self, "coeffs", c)

    @property
    def K(self) -> float:
        return self.grid.K

    def __call__(self, x):
        return eval_signal(self, x)

    def __add__(self, other: "Signal") -> "Signal":
        return Signal(self.coeffs + other.coeffs, self.grid, self.generator)

    def __mul__(self, alpha: float) -> "Signal":
        return Signal(alpha * self.coeffs, self.grid, self.generator)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"N": self.grid.N, "K": self.grid.K, "order": "lex",
                "generator": self.generator.name, "coeffs": [float(v) for v in self.coeffs]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc: dict, generator: Generator | None = None) -> "Signal":
        if doc.get("order", "lex") != "lex":
            raise ValueError(f"unsupported lattice order {doc['order']!r}")
        grid = build_lattice(doc["N"], doc["K"])
        return cls(np.asarray(doc["coeffs"], dtype=float), grid,
                   generator or b2_tensor_generator())

    @classmethod
    def from_json(cls, text: str, generator: Generator | None = None) -> "Signal":
        return cls.from_dict(json.loads(text), generator)


def reference_signal() -> Signal:
    """Box-spline test signal on ``[-1/2, 1/2]^2`` with the fixed 3x3 coefficients."""
    return Signal(REFERENCE_COEFFS.ravel(), build_lattice(1.0, 0.5))


def eval_signal(sig: Signal, x):
    x = np.asarray(x, dtype=float)
    if not np.all(in_domain(x, sig.K)):
        raise DomainError(f"evaluation point outside [-{sig.K}, {sig.K}]^2")
    val = shift_values(sig.grid, sig.generator, x) @ sig.coeffs
    return val if np.ndim(val) else float(val)


# --------------------------------------------------------------------------
# Gram matrix and stability constants
# --------------------------------------------------------------------------

def _domain_edges(grid: LatticeGrid, gen: Generator) -> np.ndarray:
    K = grid.K
    if gen.knots is None:
        # no declared knots: uniform panels, resolved by the refinement check
        return np.linspace(-K, K, 2 * max(1, math.ceil(2 * K)) * 8 + 1)
    cuts = [k + kn for k in grid.side for kn in gen.knots]
    cuts = [v for v in cuts if -K < v < K]
    return np.unique(np.concatenate([[-K, K], cuts]))


def _domain_rule(edges: np.ndarray, order: int):
    x, w = gauss_legendre(order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    nodes = ((0.5 * (lo + hi))[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    X, Y = np.meshgrid(nodes, nodes, indexing="ij")
    W = np.outer(weights, weights)
    return np.stack([X.ravel(), Y.ravel()], axis=-1), W.ravel()


def gram_matrix(grid: LatticeGrid, gen: Generator | None = None) -> np.ndarray:
    """``G[l, m] = int_{[-K,K]^2} phi(x - k_l) phi(x - k_m) dx``.

    Panels are split at the shifted knots of the generator, so for
    piecewise-polynomial generators the tensor Gauss-Legendre rule is exact.
    Generators without declared knots are integrated on uniform panels at two
    orders and must agree to 1e-10.
    """
    gen = gen or b2_tensor_generator()
    edges = _domain_edges(grid, gen)
    nodes, weights = _domain_rule(edges, 6)
    phi = shift_values(grid, gen, nodes)
    G = (phi * weights[:, None]).T @ phi
    if gen.knots is None:
        nodes2, weights2 = _domain_rule(edges, 12)
        phi2 = shift_values(grid, gen, nodes2)
        G2 = (phi2 * weights2[:, None]).T @ phi2
        if np.max(np.abs(G2 - G)) > 1e-10 * max(1.0, np.max(np.abs(G2))):
            raise ArithmeticError("Gram quadrature did not settle; declare generator knots")
        G = G2
    return 0.5 * (G + G.T)


def l2_norm_on_domain(sig: Signal, gram: np.ndarray | None = None) -> float:
    G = gram_matrix(sig.grid, sig.generator) if gram is None else gram
    return float(math.sqrt(max(0.0, sig.coeffs @ G @ sig.coeffs)))


@dataclass(frozen=True)
class StabilityConstants:
    m2: float
    M2: float


def stability_constants(grid: LatticeGrid, gen: Generator | None = None,
                        gram: np.ndarray | None = None) -> StabilityConstants:
    """Riesz-type bounds ``m2 ||c|| <= ||f||_{L2(E_K)} <= M2 ||c||`` from the
    extremal eigenvalues of the domain-restricted Gram matrix."""
    G = gram_matrix(grid, gen) if gram is None else gram
    lam = np.linalg.eigvalsh(G)
    if lam[0] <= 0:
        raise UnstableShiftsError(
            f"Gram matrix on [-K, K]^2 is not positive definite (lambda_min={lam[0]:.3e})")
    return StabilityConstants(math.sqrt(lam[0]), math.sqrt(lam[-1]))
