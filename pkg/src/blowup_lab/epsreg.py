"""Scaled space-time energy on parabolic cylinders and a singular-point detector.

For ``Q_δ(x0, t0) = B_δ(x0) × (t0 - δ², t0)`` the quantity

    I = δ^{4/(p-1) - n} ∬_{Q_δ} (|∇u|² + |u|^{p+1}) dx dt

is invariant under ``u ↦ λ^{2/(p-1)} u(λx, λ²t)``.  If it is small for some δ
the solution is bounded near ``(x0, t0)``; so points where it stays large as
δ shrinks are blow-up candidates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .grid import Params, RadialField, ball_volume, integrate_ball, radial_gradient

__all__ = [
    "ScalingQuantity",
    "ConcentrationMap",
    "SingularSet",
    "DEFAULT_EPS0",
    "scaling_quantity",
    "concentration_scan",
    "singular_set_estimate",
    "homogeneous_scaling_value",
]

# Sits between the largest value seen at regular points of the bundled
# localized run and the smallest value at its blow-up point (see the tests).
DEFAULT_EPS0 = 0.05


@dataclass(frozen=True)
class ScalingQuantity:
    x0: float
    t0: float
    delta: float
    value: float
    linf_scaled: float = math.nan

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError("scaling quantity must be nonnegative")


def _window(snapshots, t0, delta):
    times = np.array([t for t, _ in snapshots], dtype=float)
    if times.size < 2 or np.any(np.diff(times) <= 0):
        raise ValueError("need at least 2 snapshots with increasing times")
    a = t0 - delta * delta
    tol = 1e-12 * max(1.0, abs(t0))
    if times[0] > a + tol or times[-1] < t0 - tol:
        raise ValueError(
            f"snapshots cover [{times[0]:.6g}, {times[-1]:.6g}], window needs [{a:.6g}, {t0:.6g}]"
        )
    return times, a


def _space_integrand(u: RadialField, p: float) -> RadialField:
    g = radial_gradient(u)
    return u.with_values(g.values**2 + np.abs(u.values) ** (p + 1.0))


def _trapezoid_window(times, vals, a, b):
    """Trapezoid rule on [a, b] with the data linearly interpolated at the ends."""
    inner = (times > a) & (times < b)
    t = np.concatenate([[a], times[inner], [b]])
    v = np.concatenate([[np.interp(a, times, vals)], vals[inner], [np.interp(b, times, vals)]])
    return float(np.sum(0.5 * (v[1:] + v[:-1]) * np.diff(t)))


def _relevant(snapshots, times, a, b):
    """Indices of the snapshots needed for the window, including bracketing ones."""
    lo = max(int(np.searchsorted(times, a, side="right")) - 1, 0)
    hi = min(int(np.searchsorted(times, b, side="left")), len(times) - 1)
    return range(lo, hi + 1)


def scaling_quantity(
    snapshots,
    x0: float,
    t0: float,
    delta: float,
    params: Params,
    theta: float = 0.5,
    _cache=None,
) -> ScalingQuantity:
    """Evaluate ``I`` on ``Q_δ(x0, t0)`` from time-ordered ``(t, RadialField)`` pairs.

    The ball integral is exact on the piecewise-linear model (annular
    decomposition off the axis) and time uses the trapezoid rule on the
    snapshot times.  Also records ``sup_{Q_{θδ}} |u| · (θδ)^{2/(p-1)}`` over
    the snapshots in the smaller cylinder.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    times, a = _window(snapshots, t0, delta)
    p = params.p
    idx = _relevant(snapshots, times, a, t0)
    vals = np.zeros(times.size)
    for k in idx:
        key = (k, x0, delta)
        if _cache is not None and key in _cache:
            vals[k] = _cache[key]
            continue
        u = snapshots[k][1]
        f = _space_integrand(u, p)
        vals[k] = integrate_ball(f, x0, delta)
        if _cache is not None:
            _cache[key] = vals[k]
    sl = slice(idx.start, idx.stop)
    total = _trapezoid_window(times[sl], vals[sl], a, t0)
    value = delta ** (4.0 / (p - 1.0) - params.n) * max(total, 0.0)
    # sup of |u| over the smaller cylinder, for the L^∞ converse check
    r_small = theta * delta
    a_small = t0 - r_small**2
    sup = 0.0
    for k in idx:
        t, u = snapshots[k]
        if t < a_small or t > t0:
            continue
        near = np.abs(u.grid.nodes - x0) <= r_small
        if np.any(near):
            sup = max(sup, float(np.max(np.abs(u.values[near]))))
        sup = max(sup, float(np.max(np.abs(u(np.array([max(x0 - r_small, 0.0), x0 + r_small]))))))
    return ScalingQuantity(x0, t0, delta, value, sup * r_small ** (2.0 / (p - 1.0)))


def homogeneous_scaling_value(params: Params) -> float:
    """``I`` for ``κ(-t)^{-1/(p-1)}`` on ``Q_δ(x, -δ²)``, independent of x and δ."""
    p = params.p
    return ball_volume(params.n) * params.kappa ** (p + 1.0) * (p - 1.0) * (1.0 - 2.0 ** (-2.0 / (p - 1.0))) / 2.0


@dataclass(frozen=True)
class ConcentrationMap:
    """``values[i, j]`` is ``I`` at ``centers[i]`` with ``deltas[j]``, all ending at ``t0``."""

    centers: np.ndarray
    deltas: np.ndarray
    t0: float
    values: np.ndarray
    linf_scaled: np.ndarray

    def __post_init__(self):
        if np.any(self.values < 0):
            raise ValueError("map entries must be nonnegative")

    @property
    def smallest_delta_values(self) -> np.ndarray:
        return self.values[:, -1]


def concentration_scan(snapshots, centers, deltas, params: Params, t0: float | None = None,
                       theta: float = 0.5) -> ConcentrationMap:
    """Evaluate ``I`` over every (center, δ) pair; ``t0`` defaults to the last snapshot."""
    centers = np.asarray(centers, dtype=float)
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size == 0 or centers.size == 0:
        raise ValueError("need at least one center and one delta")
    if np.any(np.diff(deltas) >= 0):
        raise ValueError("deltas must be strictly decreasing")
    if t0 is None:
        t0 = float(snapshots[-1][0])
    vals = np.zeros((centers.size, deltas.size))
    linf = np.zeros_like(vals)
    cache: dict = {}
    for i, c in enumerate(centers):
        for j, d in enumerate(deltas):
            q = scaling_quantity(snapshots, c, t0, d, params, theta, _cache=cache)
            vals[i, j] = q.value
            linf[i, j] = q.linf_scaled
    return ConcentrationMap(centers, deltas, t0, vals, linf)


@dataclass(frozen=True)
class SingularSet:
    flagged: np.ndarray
    clusters: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.clusters)

    @property
    def representatives(self) -> np.ndarray:
        return np.array([c[np.argmin(np.abs(c))] for c in self.clusters])


def singular_set_estimate(cmap: ConcentrationMap, eps0: float = DEFAULT_EPS0) -> SingularSet:
    """Centers whose value at the smallest δ exceeds ``eps0``, merged within ``2 δ_min``."""
    if cmap.values.size == 0:
        raise ValueError("empty concentration map")
    hit = cmap.smallest_delta_values > eps0
    flagged = np.sort(cmap.centers[hit])
    clusters = []
    gap = 2.0 * cmap.deltas[-1]
    for c in flagged:
        if clusters and c - clusters[-1][-1] <= gap:
            clusters[-1].append(c)
        else:
            clusters.append([c])
    return SingularSet(flagged, [np.array(c) for c in clusters])
