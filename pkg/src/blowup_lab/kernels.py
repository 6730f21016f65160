"""Explicit heat kernels and checks of Gaussian derivative bounds.

The Dirichlet kernel of the half-space ``{x_n > 0}`` comes from the method of
images, ``G(x, y, t) = Γ(x - y, t) - Γ(x - y*, t)`` with ``y*`` the mirror image
of ``y``.  Bounds are checked against ``K_j = t^{-n/2-j/2} exp(-|x-y|²/(C t))``.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import quad

__all__ = [
    "KernelSample",
    "gaussian_kernel",
    "wholespace_kernel",
    "halfspace_kernel",
    "kernel_bound_check",
    "bound_lattice",
    "halfspace_mass",
    "semigroup_defect",
    "DEFAULT_C_EXP",
]

DEFAULT_C_EXP = {0: 4.0, 1: 8.0, 2: 16.0}


@dataclass(frozen=True)
class KernelSample:
    """``G`` with its x-gradient and x-Hessian at a batch of ``(x, y, t)``.

    Shapes are ``x, y: (m, n)``, ``t, G: (m,)``, ``grad: (m, n)`` and
    ``hess: (m, n, n)``; a single point is a batch of one.
    """

    x: np.ndarray
    y: np.ndarray
    t: np.ndarray
    G: np.ndarray
    grad: np.ndarray
    hess: np.ndarray

    def __len__(self):
        return self.G.shape[0]

    def derivative_norm(self, j: int) -> np.ndarray:
        """``|∇_x^j G|`` per sample; the Hessian uses the spectral norm."""
        if j == 0:
            return np.abs(self.G)
        if j == 1:
            return np.linalg.norm(self.grad, axis=-1)
        if j == 2:
            return np.max(np.abs(np.linalg.eigvalsh(self.hess)), axis=-1)
        raise ValueError("j must be 0, 1 or 2")


def _batch(x, y, t):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    x, y = np.broadcast_arrays(x, y)
    t = np.broadcast_to(np.asarray(t, dtype=float), x.shape[:1]).copy()
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    return x.copy(), y.copy(), t


def gaussian_kernel(z, t):
    """``Γ(z, t) = (4πt)^{-n/2} exp(-|z|²/(4t))`` with gradient and Hessian in z.

    ``z`` has shape ``(m, n)`` and ``t`` shape ``(m,)``.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    n = z.shape[-1]
    g = (4.0 * math.pi * t) ** (-n / 2.0) * np.exp(-np.sum(z * z, axis=-1) / (4.0 * t))
    grad = -z / (2.0 * t)[:, None] * g[:, None]
    outer = z[:, :, None] * z[:, None, :] / (4.0 * t * t)[:, None, None]
    hess = (outer - np.eye(n)[None] / (2.0 * t)[:, None, None]) * g[:, None, None]
    return g, grad, hess


def wholespace_kernel(x, y, t) -> KernelSample:
    x, y, t = _batch(x, y, t)
    g, grad, hess = gaussian_kernel(x - y, t)
    return KernelSample(x, y, t, g, grad, hess)


def halfspace_kernel(x, y, t) -> KernelSample:
    """Dirichlet heat kernel of ``{x_n > 0}`` by reflection in the last coordinate."""
    x, y, t = _batch(x, y, t)
    if np.any(x[:, -1] < 0) or np.any(y[:, -1] < 0):
        raise ValueError("points must lie in the closed upper half-space")
    y_star = y.copy()
    y_star[:, -1] = -y_star[:, -1]
    g1, d1, h1 = gaussian_kernel(x - y, t)
    g2, d2, h2 = gaussian_kernel(x - y_star, t)
    return KernelSample(x, y, t, g1 - g2, d1 - d2, h1 - h2)


def kernel_bound_check(j: int, samples, C_exp: float | None = None) -> float:
    """``max |∇_x^j G| / K_j`` over the samples, ``K_j = t^{-n/2-j/2} e^{-|x-y|²/(C t)}``.

    ``samples`` is a :class:`KernelSample` or a sequence of them.
    """
    if j not in (0, 1, 2):
        raise ValueError("j must be 0, 1 or 2")
    if C_exp is None:
        C_exp = DEFAULT_C_EXP[j]
    if C_exp < 4:
        raise ValueError("C_exp must be at least 4")
    if isinstance(samples, KernelSample):
        samples = [samples]
    best = 0.0
    for s in samples:
        n = s.x.shape[-1]
        d = s.x - s.y
        log_k = -(n / 2.0 + j / 2.0) * np.log(s.t) - np.sum(d * d, axis=-1) / (C_exp * s.t)
        val = s.derivative_norm(j)
        ok = val > 0
        if np.any(ok):
            best = max(best, float(np.max(np.exp(np.log(val[ok]) - log_k[ok]))))
    return best


def bound_lattice(n: int, kernel: str = "halfspace", num_t: int = 9, num_s: int = 241,
                  num_dir: int = 8, depth: float = 1.0) -> KernelSample:
    """Samples log-uniform in ``t ∈ [1e-4, 1]`` and uniform in ``|x-y|/√t ∈ [0, 12]``.

    ``y`` sits at height ``depth √t`` above the wall and ``x - y`` points along
    ``num_dir`` directions in the ``(e_1, e_n)`` plane; for the half-space,
    points below the wall are dropped.
    """
    if kernel not in ("halfspace", "wholespace"):
        raise ValueError(f"unknown kernel {kernel!r}")
    ts = np.geomspace(1e-4, 1.0, num_t)
    ss = np.linspace(0.0, 12.0, num_s)
    angles = np.linspace(0.0, 2.0 * math.pi, num_dir, endpoint=False)
    e = np.zeros((num_dir, n))
    e[:, 0], e[:, -1] = np.cos(angles), np.sin(angles)
    T, TH, S = np.meshgrid(ts, np.arange(num_dir), ss, indexing="ij")
    T, TH, S = T.ravel(), TH.ravel(), S.ravel()
    rt = np.sqrt(T)
    y = np.zeros((T.size, n))
    y[:, -1] = depth * rt
    x = y + (S * rt)[:, None] * e[TH]
    if kernel == "halfspace":
        keep = x[:, -1] >= 0
        x, y, T = x[keep], y[keep], T[keep]
        return halfspace_kernel(x, y, T)
    return wholespace_kernel(x, y, T)


def halfspace_mass(x, t: float) -> float:
    """``∫_{y_n > 0} G(x, y, t) dy`` by quadrature (tangential directions integrate to 1)."""
    x = np.asarray(x, dtype=float)
    xn = float(x[-1])
    s = 2.0 * math.sqrt(t)

    def normal(yn):
        return (math.exp(-((xn - yn) / s) ** 2) - math.exp(-((xn + yn) / s) ** 2)) / (math.sqrt(math.pi) * s)

    hi = xn + 40.0 * s
    val, _ = quad(normal, 0.0, hi, points=[xn] if 0 < xn < hi else None, epsabs=0.0, epsrel=1e-13, limit=200)
    return float(val)


def _line_kernel(a, b, t, half: bool):
    s = 2.0 * math.sqrt(t)
    g = math.exp(-((a - b) / s) ** 2) / (math.sqrt(math.pi) * s)
    if half:
        g -= math.exp(-((a + b) / s) ** 2) / (math.sqrt(math.pi) * s)
    return g


def semigroup_defect(x, y, t: float) -> float:
    """Relative error of ``∫ G(x,z,t/2) G(z,y,t/2) dz = G(x,y,t)`` on the half-space.

    The half-space kernel is a product over coordinates, so the n-dimensional
    integral is a product of one-dimensional quadratures.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    h = 0.5 * t
    reach = 40.0 * math.sqrt(t)
    total = 1.0
    for i in range(x.size):
        half = i == x.size - 1
        f = lambda z, i=i, half=half: _line_kernel(x[i], z, h, half) * _line_kernel(z, y[i], h, half)
        lo = 0.0 if half else min(x[i], y[i]) - reach
        hi = max(x[i], y[i]) + reach
        val, _ = quad(f, lo, hi, points=sorted({x[i], y[i]}), epsabs=0.0, epsrel=1e-13, limit=400)
        total *= val
    exact = float(halfspace_kernel(x, y, t).G[0])
    if exact == 0.0:
        raise ValueError("kernel underflows at this (x, y, t)")
    return abs(total - exact) / abs(exact)

