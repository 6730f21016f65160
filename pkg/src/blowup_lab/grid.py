"""Radial grids, fields and quadrature.

Everything here works with radially symmetric functions on ``R^n`` sampled on a
graded set of radii ``0 = r_0 < r_1 < ... < r_N = R_max``.  Volume integrals use
the exact integral of the piecewise-linear interpolant against the radial
measure ``omega_{n-1} r^{n-1} dr``, so the per-node weights sum to the volume of
the ball to round-off.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np
from scipy.special import betainc, roots_jacobi

__all__ = [
    "Params",
    "make_params",
    "RadialGrid",
    "RadialField",
    "sphere_area",
    "ball_volume",
    "integrate_volume",
    "integrate_ball",
    "gaussian_weighted_integral",
    "radial_gradient",
    "radial_laplacian",
    "rescale_field",
]

EVEN = "even"
ZERO = "zero"

# Gaussian weights below exp(-69) ~ 1e-30 are dropped.
GAUSS_LOG_CUTOFF = 69.0

_GL_ORDER = 8
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


@dataclass(frozen=True)
class Params:
    """Problem constants for ``u_t = Δu + |u|^{p-1} u`` in ``R^n``."""

    n: int
    p: float
    p_S: float
    q_c: float
    q_star: float

    @property
    def kappa(self) -> float:
        """Amplitude of the homogeneous blow-up solution, ``(p-1)^{-1/(p-1)}``."""
        return (self.p - 1.0) ** (-1.0 / (self.p - 1.0))

    @property
    def supercritical(self) -> bool:
        return self.p > self.p_S

    @property
    def scaling_exponent(self) -> float:
        """``2/(p-1)``: u_lambda(x, t) = lambda^{2/(p-1)} u(lambda x, lambda^2 t)."""
        return 2.0 / (self.p - 1.0)


def make_params(n: int, p: float) -> Params:
    if int(n) != n or n < 3:
        raise ValueError(f"n must be an integer >= 3, got {n!r}")
    if not p > 1:
        raise ValueError("p must exceed 1")
    n = int(n)
    p = float(p)
    return Params(
        n=n,
        p=p,
        p_S=(n + 2.0) / (n - 2.0),
        q_c=n * (p - 1.0) / 2.0,
        q_star=n * (p - 1.0) / (p + 1.0),
    )


def sphere_area(n: int) -> float:
    """Surface area ``omega_{n-1}`` of the unit sphere in ``R^n``."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def ball_volume(n: int, radius: float = 1.0) -> float:
    return sphere_area(n) * radius**n / n


def _composite_gauss(breaks):
    """Gauss-Legendre nodes and weights on each interval of ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    a = breaks[:-1, None]
    b = breaks[1:, None]
    half = 0.5 * (b - a)
    x = (a + b) * 0.5 + half * _GL_X[None, :]
    w = half * _GL_W[None, :]
    return x.ravel(), w.ravel()


def _subdivide(breaks, max_len):
    """Insert uniform points so no interval of ``breaks`` exceeds ``max_len``."""
    breaks = np.asarray(breaks, dtype=float)
    if not np.isfinite(max_len):
        return breaks
    h = np.diff(breaks)
    k = np.maximum(np.ceil(h / max_len).astype(int), 1)
    if np.all(k == 1):
        return breaks
    parts = [np.linspace(breaks[i], breaks[i + 1], k[i] + 1)[:-1] for i in range(len(h))]
    return np.concatenate(parts + [breaks[-1:]])


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Strictly increasing radii starting at 0, for functions on ``R^n``.

    ``cell_measures[k]`` is ``omega_{n-1} ∫ hat_k(r) r^{n-1} dr`` where
    ``hat_k`` is the piecewise-linear nodal basis function.
    """

    nodes: np.ndarray
    n: int
    gamma: float | None = None

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValueError("a radial grid needs at least 3 nodes")
        if nodes[0] != 0.0:
            raise ValueError("first node must be r = 0")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def graded(cls, r_max: float, num_nodes: int, n: int, gamma: float = 2.0) -> "RadialGrid":
        """Algebraic clustering ``r_k = r_max (k/N)^gamma`` toward the origin."""
        if r_max <= 0:
            raise ValueError("r_max must be positive")
        if gamma < 1:
            raise ValueError("gamma must be >= 1")
        s = np.linspace(0.0, 1.0, int(num_nodes))
        nodes = r_max * s**gamma
        nodes[-1] = r_max
        return cls(nodes, n, gamma)

    def __len__(self):
        return self.nodes.size

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @cached_property
    def cell_measures(self) -> np.ndarray:
        m = self._hat_weights(self.nodes)
        m.setflags(write=False)
        return m

    def _hat_weights(self, nodes):
        # Exact for the piecewise-linear interpolant: GL order 8 integrates
        # degree <= 15 polynomials, and r^{n-1} * hat has degree n.
        a, b = nodes[:-1], nodes[1:]
        h = b - a
        x = 0.5 * (a + b)[:, None] + 0.5 * h[:, None] * _GL_X[None, :]
        w = 0.5 * h[:, None] * _GL_W[None, :] * x ** (self.n - 1)
        right = (x - a[:, None]) / h[:, None]
        wl = np.sum(w * (1.0 - right), axis=1)
        wr = np.sum(w * right, axis=1)
        out = np.zeros(nodes.size)
        out[:-1] += wl
        out[1:] += wr
        return sphere_area(self.n) * out

    def measures_within(self, radius: float) -> np.ndarray:
        """Hat weights restricted to ``B_radius`` (partial last cell exact)."""
        if radius >= self.r_max:
            return np.array(self.cell_measures)
        if radius <= 0:
            return np.zeros(len(self))
        j = int(np.searchsorted(self.nodes, radius, side="right")) - 1
        out = np.zeros(len(self))
        if j > 0:
            out[: j + 1] = self._hat_weights(self.nodes[: j + 1])
        a, b = self.nodes[j], self.nodes[j + 1]
        if radius > a:
            # the partial cell [a, radius] of the hat pair on [a, b]
            x = 0.5 * (a + radius) + 0.5 * (radius - a) * _GL_X
            w = 0.5 * (radius - a) * _GL_W * x ** (self.n - 1) * sphere_area(self.n)
            right = (x - a) / (b - a)
            out[j] += np.sum(w * (1.0 - right))
            out[j + 1] += np.sum(w * right)
        return out

    @cached_property
    def dual_edges(self) -> np.ndarray:
        """Control-volume faces: 0, midpoints, r_max."""
        r = self.nodes
        e = np.empty(r.size + 1)
        e[0] = 0.0
        e[1:-1] = 0.5 * (r[:-1] + r[1:])
        e[-1] = r[-1]
        return e

    @cached_property
    def laplacian_coefficients(self):
        """Finite-volume radial Laplacian ``(Lu)_i = a_i (u_{i-1}-u_i) + b_i (u_{i+1}-u_i)``.

        Control volumes run between midpoints, so at the origin the stencil is
        ``2n (u_1 - u_0) / r_1^2``, i.e. ``n u''(0)`` for even data.
        """
        r = self.nodes
        n = self.n
        e = self.dual_edges
        vol = (e[1:] ** n - e[:-1] ** n) / n
        face = e[1:-1] ** (n - 1) / np.diff(r)
        a = np.zeros(r.size)
        b = np.zeros(r.size)
        b[:-1] = face / vol[:-1]
        a[1:] = face / vol[1:]
        a.setflags(write=False)
        b.setflags(write=False)
        return a, b

    def scaled(self, factor: float) -> "RadialGrid":
        """Grid with every radius multiplied by ``factor``."""
        return RadialGrid(self.nodes * factor, self.n, self.gamma)

    def quadrature(self, a: float, b: float, max_len: float = np.inf, extra=()):
        """Composite Gauss rule on [a, b] with breakpoints at grid nodes.

        Returns radii and weights that already include ``omega_{n-1} r^{n-1}``.
        """
        a = max(float(a), 0.0)
        b = min(float(b), self.r_max)
        if b <= a:
            return np.zeros(0), np.zeros(0)
        inner = self.nodes[(self.nodes > a) & (self.nodes < b)]
        pts = [np.array([a]), inner, np.array([b])]
        extra = [e for e in extra if a < e < b]
        if extra:
            pts.append(np.asarray(extra, dtype=float))
        breaks = np.unique(np.concatenate(pts))
        breaks = _subdivide(breaks, max_len)
        x, w = _composite_gauss(breaks)
        return x, w * sphere_area(self.n) * x ** (self.n - 1)


@dataclass(frozen=True, eq=False)
class RadialField:
    """Samples of a radial function at the nodes of a :class:`RadialGrid`.

    ``symmetry`` is ``"even"`` for genuine radial functions (zero slope at the
    origin) and ``"zero"`` for odd quantities such as ``∂_r u``.
    """

    grid: RadialGrid
    values: np.ndarray
    symmetry: str = EVEN

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (len(self.grid),):
            raise ValueError(f"expected {len(self.grid)} values, got shape {v.shape}")
        if self.symmetry not in (EVEN, ZERO):
            raise ValueError(f"unknown symmetry tag {self.symmetry!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: RadialGrid, func, symmetry: str = EVEN) -> "RadialField":
        return cls(grid, np.asarray(func(grid.nodes), dtype=float) * np.ones(len(grid)), symmetry)

    @classmethod
    def constant(cls, grid: RadialGrid, c: float) -> "RadialField":
        return cls(grid, np.full(len(grid), float(c)))

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def __call__(self, r):
        """Piecewise-linear interpolant, zero beyond the grid."""
        return np.interp(r, self.grid.nodes, self.values, right=0.0)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def with_values(self, values, symmetry: str | None = None) -> "RadialField":
        return RadialField(self.grid, values, symmetry or self.symmetry)


def _check_finite(f: RadialField):
    if not np.all(np.isfinite(f.values)):
        raise ValueError("field has non-finite samples")


def integrate_volume(f: RadialField, radius: float | None = None) -> float:
    """``∫_{B_radius} f dx`` of the piecewise-linear interpolant (exact)."""
    _check_finite(f)
    if radius is None:
        m = f.grid.cell_measures
    else:
        m = f.grid.measures_within(radius)
    return float(np.dot(m, f.values))


def _cap_fraction(n, r, c, radius):
    """Fraction of the sphere ``|x| = r`` lying in the ball ``B_radius(c e_1)``."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    if c == 0:
        out[r < radius] = 1.0
        return out
    inside = r <= radius - c
    out[inside] = 1.0
    part = (~inside) & (r > c - radius) & (r < c + radius) & (r > 0)
    if np.any(part):
        rr = r[part]
        mu = (rr**2 + c**2 - radius**2) / (2.0 * rr * c)
        mu = np.clip(mu, -1.0, 1.0)
        half = 0.5 * betainc((n - 1) / 2.0, 0.5, 1.0 - mu**2)
        out[part] = np.where(mu >= 0, half, 1.0 - half)
    return out


def integrate_ball(f: RadialField, center_offset: float, radius: float) -> float:
    """``∫_{B_radius(x0)} f dx`` with ``|x0| = center_offset``.

    Off-axis balls are handled by splitting into spheres ``|x| = r`` and
    weighting each by the fraction of its area inside the ball.
    """
    _check_finite(f)
    c = abs(float(center_offset))
    if radius <= 0:
        return 0.0
    if c == 0:
        return integrate_volume(f, radius)
    grid = f.grid
    x, w = grid.quadrature(c - radius, c + radius, max_len=radius / 8.0, extra=(abs(radius - c),))
    if x.size == 0:
        return 0.0
    return float(np.sum(w * _cap_fraction(grid.n, x, c, radius) * f(x)))


@dataclass(frozen=True)
class _SphereRule:
    s: np.ndarray
    w: np.ndarray


_SPHERE_RULES: dict[int, _SphereRule] = {}


def _sphere_rule(n: int) -> _SphereRule:
    # averages over the sphere of g(cos θ) with density (1 - s^2)^{(n-3)/2}
    if n not in _SPHERE_RULES:
        a = (n - 3) / 2.0
        s, w = roots_jacobi(64, a, a)
        _SPHERE_RULES[n] = _SphereRule(s, w / w.sum())
    return _SPHERE_RULES[n]


def _spherical_mean(f: RadialField, c: float, rho):
    """Mean of ``f(|x|)`` over the sphere ``|x - c e_1| = rho``."""
    rule = _sphere_rule(f.grid.n)
    rho = np.asarray(rho, dtype=float)[:, None]
    r = np.sqrt(np.maximum(c * c + rho * rho + 2.0 * c * rho * rule.s[None, :], 0.0))
    return f(r) @ rule.w


def gaussian_weighted_integral(
    f: RadialField,
    center_offset: float,
    tau_gap: float,
    weight=None,
) -> float:
    """``∫ f(x) K(x) w(|x - x0|) dx`` with ``K = τ^{-n/2} exp(-|x-x0|²/(4τ))``.

    ``|x0| = center_offset`` and ``τ = tau_gap``.  ``weight`` is an optional
    radial function of the distance to the center (a cutoff, say); it defaults
    to 1.  The integration region is the grid's ball, truncated where the
    Gaussian drops below 1e-30.
    """
    if not tau_gap > 0:
        raise ValueError("tau_gap must be positive")
    _check_finite(f)
    n = f.grid.n
    c = abs(float(center_offset))
    reach = math.sqrt(4.0 * tau_gap * GAUSS_LOG_CUTOFF)
    max_len = 0.5 * math.sqrt(tau_gap)
    if c == 0:
        rho, w = f.grid.quadrature(0.0, reach, max_len=max_len)
        vals = f(rho)
    else:
        breaks = _subdivide(np.array([0.0, reach]), min(max_len, reach / 16.0))
        rho, w = _composite_gauss(breaks)
        w = w * sphere_area(n) * rho ** (n - 1)
        vals = _spherical_mean(f, c, rho)
    if rho.size == 0:
        return 0.0
    kern = np.exp(-(rho**2) / (4.0 * tau_gap) - 0.5 * n * math.log(tau_gap))
    if weight is not None:
        kern = kern * weight(rho)
    return float(np.sum(w * kern * vals))


def _fd_weights(x0, xs, m):
    """Fornberg finite-difference weights for the m-th derivative at x0."""
    xs = np.asarray(xs, dtype=float)
    k = xs.size
    c = np.zeros((k, m + 1))
    c1 = 1.0
    c4 = xs[0] - x0
    c[0, 0] = 1.0
    for i in range(1, k):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for s in range(mn, 0, -1):
                    c[i, s] = c1 * (s * c[i - 1, s - 1] - c5 * c[i - 1, s]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for s in range(mn, 0, -1):
                c[j, s] = (c4 * c[j, s] - s * c[j, s - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


_DIFF_CACHE: dict = {}


def _diff_stencils(grid: RadialGrid, order: int, symmetry: str):
    # keyed on the node values so equal grids (e.g. rescaled copies) share stencils
    key = (grid.nodes.tobytes(), order, symmetry)
    hit = _DIFF_CACHE.get(key)
    if hit is not None:
        return hit
    half = order // 2
    r = grid.nodes
    N = r.size
    sign = 1.0 if symmetry == EVEN else -1.0
    # ghost nodes mirrored through the origin
    ext = np.concatenate([-r[half:0:-1], r])
    idx = np.empty((N, order + 1), dtype=int)
    wts = np.empty((N, order + 1))
    for i in range(N):
        j = i + half
        lo = j - half
        hi = j + half + 1
        if hi > ext.size:
            hi = ext.size
            lo = hi - (order + 1)
        idx[i] = np.arange(lo, hi)
        wts[i] = _fd_weights(ext[j], ext[lo:hi], 1)
    # map ghost indices back onto real nodes, carrying the reflection sign
    real = idx - half
    factor = np.where(real < 0, sign, 1.0)
    real = np.abs(real)
    wts = wts * factor
    if len(_DIFF_CACHE) > 64:
        _DIFF_CACHE.clear()
    _DIFF_CACHE[key] = (real, wts)
    return real, wts


def radial_gradient(f: RadialField, order: int = 4) -> RadialField:
    """``∂_r f`` by finite differences on the nonuniform grid.

    Central stencils of ``order + 1`` points in the interior, mirrored through
    the origin using the field's symmetry and one-sided at ``r_max``.  The
    stencils are exact for polynomials of degree ``order``.
    """
    if len(f.grid) < 3:
        raise ValueError("need at least 3 nodes")
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    idx, wts = _diff_stencils(f.grid, order, f.symmetry)
    d = np.sum(wts * f.values[idx], axis=1)
    if f.symmetry == EVEN:
        d[0] = 0.0
    return RadialField(f.grid, d, ZERO if f.symmetry == EVEN else EVEN)


def radial_laplacian(f: RadialField) -> RadialField:
    """Finite-volume ``Δf`` at the nodes (last node left as computed, no BC)."""
    a, b = f.grid.laplacian_coefficients
    u = f.values
    out = np.zeros_like(u)
    out[1:] += a[1:] * (u[:-1] - u[1:])
    out[:-1] += b[:-1] * (u[1:] - u[:-1])
    return RadialField(f.grid, out, f.symmetry)


def rescale_field(f: RadialField, lam: float, p: float) -> RadialField:
    """The parabolic rescaling ``lam^{2/(p-1)} f(lam r)``, on the grid ``nodes/lam``."""
    return RadialField(f.grid.scaled(1.0 / lam), lam ** (2.0 / (p - 1.0)) * f.values, f.symmetry)
