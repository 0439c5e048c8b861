"""Compactly supported generators and their one-dimensional Radon profiles.

The default generator is the tensor product of centred second-order
B-splines, ``phi(x, y) = B2(x + 1) * B2(y + 1)``, supported on ``[-1, 1]^2``.
Its projection onto a direction ``p = (cos t, sin t)`` is the convolution of
two triangles of half-widths ``|cos t|`` and ``|sin t|`` (each of unit mass),
which is a piecewise cubic. ``radon_profile_closed_form`` builds that cubic
exactly; ``radon_quadrature_oracle`` integrates the generator along the line
numerically and serves as the independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .quadrature import adaptive_gauss_legendre

TWO_PI = 2.0 * math.pi
AXIS_TOL = 1e-12
_MERGE_TOL = 1e-12


# --------------------------------------------------------------------------
# Directions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Direction:
    """Projection direction with angle ``theta`` in ``[0, 2*pi)``.

    ``p`` is stored explicitly so that rational unit vectors such as
    ``(5/13, 12/13)`` keep their exact components.
    """

    theta: float
    p: tuple[float, float] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        theta = float(self.theta) % TWO_PI
        object.__setattr__(self, "theta", theta)
        if self.p is None:
            object.__setattr__(self, "p", (math.cos(theta), math.sin(theta)))
        else:
            px, py = (float(v) for v in self.p)
            norm = math.hypot(px, py)
            object.__setattr__(self, "p", (px / norm, py / norm))

    @classmethod
    def from_vector(cls, px: float, py: float) -> "Direction":
        if px == 0 and py == 0:
            raise ValueError("direction vector must be nonzero")
        return cls(math.atan2(py, px), (px, py))

    @property
    def cos(self) -> float:
        return self.p[0]

    @property
    def sin(self) -> float:
        return self.p[1]

    @property
    def normal(self) -> tuple[float, float]:
        """Unit vector along the integration lines, ``(-sin, cos)``."""
        return (-self.p[1], self.p[0])

    @property
    def c_theta(self) -> float:
        """Half-extent factor of ``t = p.x`` over a square: the quadrant table.

        For ``[0, pi/2)`` it is ``sin + cos``, for ``[pi/2, pi)`` it is
        ``sin - cos``, for ``[pi, 3pi/2)`` it is ``-sin - cos`` and for
        ``[3pi/2, 2pi)`` it is ``cos - sin``; i.e. ``|sin| + |cos|``.
        """
        c, s = self.p
        quadrant = int(self.theta // (math.pi / 2)) % 4
        if quadrant == 0:
            value = s + c
        elif quadrant == 1:
            value = s - c
        elif quadrant == 2:
            value = -s - c
        else:
            value = c - s
        # guards the quadrant edges where theta rounding and p disagree in sign
        return max(value, abs(c) + abs(s) - 1e-15)

    def project(self, points) -> np.ndarray:
        """``t = p . x`` for an array of points with trailing dimension 2."""
        pts = np.asarray(points, dtype=float)
        return pts[..., 0] * self.p[0] + pts[..., 1] * self.p[1]

    def is_axis_aligned(self, tol: float = AXIS_TOL) -> bool:
        return min(abs(self.p[0]), abs(self.p[1])) < tol


# --------------------------------------------------------------------------
# B-spline generator
# --------------------------------------------------------------------------

def b2_eval(x):
    """Second-order cardinal B-spline ``chi_(0,1] * chi_(0,1]``.

    ``x`` on ``(0, 1]``, ``2 - x`` on ``(1, 2]``, zero elsewhere.
    """
    x = np.asarray(x, dtype=float)
    out = np.where((x > 0) & (x <= 1), x, 0.0)
    out = np.where((x > 1) & (x <= 2), 2.0 - x, out)
    return out if out.ndim else float(out)


def hat(x):
    """Centred unit triangle, ``B2(x + 1) = max(0, 1 - |x|)``."""
    x = np.asarray(x, dtype=float)
    out = np.maximum(0.0, 1.0 - np.abs(x))
    return out if out.ndim else float(out)


def phi_eval(x, y):
    """``B2(x + 1) * B2(y + 1)``; support ``[-1, 1]^2``."""
    out = b2_eval(np.asarray(x, dtype=float) + 1.0) * b2_eval(np.asarray(y, dtype=float) + 1.0)
    return out if np.ndim(out) else float(out)


# --------------------------------------------------------------------------
# Piecewise polynomial profiles
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RadonProfile:
    """Piecewise polynomial ``t -> R_p phi(t)``.

    ``coeffs[i, k]`` multiplies ``(t - mids[i])**k`` on
    ``[breakpoints[i], breakpoints[i+1]]``; the profile vanishes outside
    ``[breakpoints[0], breakpoints[-1]]``.
    """

    breakpoints: np.ndarray
    coeffs: np.ndarray
    direction: Direction

    @property
    def mids(self) -> np.ndarray:
        return 0.5 * (self.breakpoints[:-1] + self.breakpoints[1:])

    @property
    def support(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        bp = self.breakpoints
        idx = np.clip(np.searchsorted(bp, t, side="right") - 1, 0, bp.size - 2)
        local = t - self.mids[idx]
        c = self.coeffs[idx]
        val = c[..., -1]
        for k in range(self.coeffs.shape[1] - 2, -1, -1):
            val = val * local + c[..., k]
        val = np.where((t <= bp[0]) | (t >= bp[-1]), 0.0, val)
        return val if val.ndim else float(val)

    def piece(self, i: int, t):
        """Evaluate piece ``i``'s polynomial (no support masking)."""
        local = np.asarray(t, dtype=float) - self.mids[i]
        return np.polynomial.polynomial.polyval(local, self.coeffs[i])

    def integral(self) -> float:
        """Exact integral of the piecewise polynomial."""
        half = 0.5 * np.diff(self.breakpoints)
        total = 0.0
        for k in range(0, self.coeffs.shape[1], 2):
            total += np.sum(self.coeffs[:, k] * 2.0 * half ** (k + 1) / (k + 1))
        return float(total)

    def scaled(self, factor: float) -> "RadonProfile":
        return RadonProfile(self.breakpoints, self.coeffs * factor, self.direction)


def _triangle_convolution(t, a: float, b: float) -> np.ndarray:
    """``(hat_a * hat_b)(t)`` with ``hat_a(u) = hat(u / a) / a``.

    The integration variable is the argument of the narrower triangle, whose
    kinks are then exact; the integral is split at the kinks of both
    triangles, so each segment integrand is a quadratic and Simpson's rule is
    exact. All terms are nonnegative: no cancellation for small ``a`` or ``b``.
    """
    if a < b:
        a, b = b, a
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lo = np.maximum(-b, t - a)
    hi = np.minimum(b, t + a)
    knots = np.stack([np.full_like(t, -b), np.zeros_like(t), np.full_like(t, b),
                      t - a, t, t + a], axis=-1)
    knots = np.sort(np.clip(knots, lo[:, None], hi[:, None]), axis=-1)
    v0, v1 = knots[:, :-1], knots[:, 1:]
    vm = 0.5 * (v0 + v1)

    def integrand(v):
        return (np.maximum(0.0, 1.0 - np.abs(v) / b) / b
                * np.maximum(0.0, 1.0 - np.abs(t[:, None] - v) / a) / a)

    h = np.clip(v1 - v0, 0.0, None)
    simpson = h / 6.0 * (integrand(v0) + 4.0 * integrand(vm) + integrand(v1))
    return np.where(hi > lo, simpson.sum(axis=-1), 0.0)


def _fit_cubics(breakpoints: np.ndarray, func) -> np.ndarray:
    """Cubic coefficients about each interval midpoint, interpolating ``func``
    at four Chebyshev nodes per interval (exact for cubic pieces)."""
    nodes = np.cos(np.pi * (2 * np.arange(4) + 1) / 8.0)
    vander = np.vander(nodes, 4, increasing=True)
    mids = 0.5 * (breakpoints[:-1] + breakpoints[1:])
    half = 0.5 * np.diff(breakpoints)
    samples = mids[:, None] + half[:, None] * nodes[None, :]
    values = func(samples.ravel()).reshape(samples.shape)
    scaled = np.linalg.solve(vander, values.T).T
    return scaled / half[:, None] ** np.arange(4)[None, :]


def _merge(points, tol: float = _MERGE_TOL) -> np.ndarray:
    pts = np.sort(np.asarray(points, dtype=float))
    keep = [pts[0]]
    for v in pts[1:]:
        if v - keep[-1] > tol:
            keep.append(v)
    return np.array(keep)


def radon_profile_closed_form(direction: Direction) -> RadonProfile:
    """Exact Radon profile of the B2 tensor generator along ``direction``.

    Built for every angle from the triangle-convolution identity with half
    widths ``a = |cos|`` and ``b = |sin|``; the breakpoints are the pairwise
    sums of the triangle knots ``{-a, 0, a} + {-b, 0, b}``. Axis-aligned
    directions collapse to a single triangle of half-width ``max(a, b)``.
    """
    a, b = abs(direction.cos), abs(direction.sin)
    if min(a, b) < AXIS_TOL:
        w = max(a, b)
        bp = np.array([-w, 0.0, w])
        coeffs = np.array([[0.5 / w, 1.0 / w**2, 0.0, 0.0],
                           [0.5 / w, -1.0 / w**2, 0.0, 0.0]])
        return RadonProfile(bp, coeffs, direction)
    bp = _merge([-a - b, -a, -b, a - b, 0.0, b - a, b, a, a + b])
    # symmetric by construction; pin the ends exactly
    bp[0], bp[-1] = -(a + b), a + b
    coeffs = _fit_cubics(bp, lambda t: _triangle_convolution(t, a, b))
    return RadonProfile(bp, coeffs, direction)


def steep_branch_profile(theta: float, t):
    """Closed-form profile for ``0 < theta < pi/2`` with ``tan theta > 2``,
    written branch by branch in terms of ``tan theta`` and ``t / cos theta``.

    The branch on ``[cos, sin - cos]`` is ``(tan - t/cos) / (cos tan^2)``.
    """
    c, s = math.cos(theta), math.sin(theta)
    tn = math.tan(theta)
    if not (0 < theta < math.pi / 2 and tn > 2):
        raise ValueError("steep branch needs 0 < theta < pi/2 and tan(theta) > 2")
    t = np.abs(np.asarray(t, dtype=float))
    u = t / c
    den = 6.0 * c * tn**2
    outer = ((tn - u) * ((u - tn - 1.5) ** 2 + 0.75) + 1.0) / den
    upper = (3 * (u - tn) ** 2 + (u - tn) ** 3 + 3 * tn - 3 * u + 1.0) / den
    flat = (tn - u) / (c * tn**2)
    inner = (u * (2 * u**2 - 6 * u + 3) + 6 * tn - 3 * u - 2.0) / den
    out = np.select(
        [t <= c, t <= s - c, t < s, t < c + s],
        [inner, flat, upper, outer],
        default=0.0,
    )
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# Generators
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Generator:
    """A continuous generator supported in ``[-N, N]^2``.

    ``profile_factory`` maps a direction to an exact ``RadonProfile``; when it
    is absent, profiles fall back to adaptive quadrature.
    """

    func: Callable
    support_half_width: float
    name: str = "custom"
    profile_factory: Callable[[Direction], RadonProfile] | None = None
    scale: float = 1.0
    knots: tuple[float, ...] | None = None

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        n = self.support_half_width
        inside = (np.abs(x) <= n) & (np.abs(y) <= n)
        val = np.where(inside, self.scale * np.asarray(self.func(x, y), dtype=float), 0.0)
        return val if val.ndim else float(val)

    def scaled(self, factor: float) -> "Generator":
        return Generator(self.func, self.support_half_width, self.name,
                         self.profile_factory, self.scale * factor, self.knots)

    def profile(self, direction: Direction, tol: float = 1e-10):
        if self.profile_factory is not None:
            prof = self.profile_factory(direction)
            return prof if self.scale == 1.0 else prof.scaled(self.scale)
        return QuadratureProfile(self, direction, tol)


def b2_tensor_generator() -> Generator:
    """The B2 tensor-product generator with its exact profile factory."""
    return Generator(phi_eval, 1.0, "b2-tensor", radon_profile_closed_form,
                     knots=(-1.0, 0.0, 1.0))


def zero_generator(support_half_width: float = 1.0) -> Generator:
    return Generator(lambda x, y: np.zeros(np.broadcast(x, y).shape),
                     support_half_width, "zero")


# --------------------------------------------------------------------------
# Quadrature oracle
# --------------------------------------------------------------------------

def line_support(gen_half_width: float, direction: Direction, t: float):
    """``s``-interval where ``(t cos - s sin, t sin + s cos)`` stays in the box
    ``[-N, N]^2``; ``None`` if the line misses it."""
    c, s = direction.p
    n = gen_half_width
    lo, hi = -math.inf, math.inf
    for base, slope in ((t * c, -s), (t * s, c)):
        if abs(slope) < 1e-15:
            if abs(base) > n:
                return None
            continue
        e0, e1 = (-n - base) / slope, (n - base) / slope
        lo, hi = max(lo, min(e0, e1)), min(hi, max(e0, e1))
    if hi <= lo:
        return None
    return lo, hi


def _line_kinks(gen: Generator, direction: Direction, t: float, lo: float, hi: float):
    """``s`` where the line crosses a kink line ``x = k`` or ``y = k`` of the
    generator, or an even subdivision when the generator declares no knots."""
    if gen.knots is None:
        return np.linspace(lo, hi, 17)[1:-1]
    c, s = direction.p
    cuts = []
    for base, slope in ((t * c, -s), (t * s, c)):
        if abs(slope) > 1e-15:
            cuts.extend((k - base) / slope for k in gen.knots)
    return np.array([v for v in cuts if lo < v < hi])


def radon_quadrature_oracle(gen: Generator, direction: Direction, t: float,
                            tol: float = 1e-10) -> float:
    """Integrate ``gen`` along the line ``{x : p.x = t}``.

    The ``s``-interval is clipped to the generator's bounding box and split
    where the line crosses the generator's kink lines; each segment is then
    integrated by adaptive Gauss-Legendre quadrature.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    span = line_support(gen.support_half_width, direction, float(t))
    if span is None:
        return 0.0
    c, s = direction.p

    def integrand(sv):
        return gen(t * c - sv * s, t * s + sv * c)

    edges = np.unique(np.concatenate([[span[0]], _line_kinks(gen, direction, t, *span),
                                      [span[1]]]))
    width = span[1] - span[0]
    return float(sum(adaptive_gauss_legendre(integrand, e0, e1, tol=tol * (e1 - e0) / width)
                     for e0, e1 in zip(edges[:-1], edges[1:]) if e1 > e0))


class QuadratureProfile:
    """Profile of an arbitrary generator evaluated pointwise by quadrature."""

    def __init__(self, gen: Generator, direction: Direction, tol: float = 1e-10):
        self.generator = gen
        self.direction = direction
        self.tol = tol
        w = gen.support_half_width * direction.c_theta
        self.breakpoints = np.array([-w, w])

    @property
    def support(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = [radon_quadrature_oracle(self.generator, self.direction, float(v), self.tol)
                for v in t.ravel()]
        out = np.array(flat).reshape(t.shape)
        return out if out.ndim else float(out)
