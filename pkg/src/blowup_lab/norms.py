"""Lebesgue norms, weak Lorentz quasi-norms and blow-up rate fits.

Both norms use the same discrete model: node ``k`` carries the value ``f_k`` on
a set of measure ``cell_measures[k]``.  With one model for both, the Chebyshev
bound ``‖f‖_{L^{q,∞}} ≤ ‖f‖_{L^q}`` holds exactly, not just up to quadrature
error.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy import stats

from .grid import RadialField, radial_gradient

__all__ = [
    "NormTrace",
    "RateFit",
    "lq_norm",
    "weak_lorentz_quasinorm",
    "norm_trace",
    "rate_fit",
    "compact_bump",
    "self_similar_snapshots",
]


def _measures(f: RadialField, radius):
    if radius is None:
        return f.grid.cell_measures
    if radius > f.grid.r_max * (1 + 1e-12):
        raise ValueError("radius exceeds the grid extent")
    return f.grid.measures_within(radius)


def lq_norm(f: RadialField, q: float, radius: float | None = None) -> float:
    """``(∫_{B_radius} |f|^q dx)^{1/q}``; ``q = inf`` gives the max over the ball."""
    if not q >= 1:
        raise ValueError("q must be >= 1")
    a = np.abs(f.values)
    if math.isinf(q):
        if radius is None:
            return float(a.max())
        inside = f.grid.nodes <= radius
        edge = float(np.abs(f(radius)))
        return float(max(a[inside].max(), edge))
    m = _measures(f, radius)
    # factor out the max so large q does not overflow
    top = a.max()
    if top == 0:
        return 0.0
    return float(top * np.dot(m, (a / top) ** q) ** (1.0 / q))


def weak_lorentz_quasinorm(f: RadialField, q: float, radius: float | None = None) -> float:
    """``sup_λ λ |{|f| > λ}|^{1/q}`` from the decreasing rearrangement of the nodes.

    The supremum is attained as λ increases to a sample value ``a``, where the
    level set is every node with ``|f| >= a``.
    """
    if not q > 1:
        raise ValueError("q must exceed 1")
    m = _measures(f, radius)
    a = np.abs(f.values)
    keep = m > 0
    a, m = a[keep], m[keep]
    if a.size == 0:
        return 0.0
    order = np.argsort(a, kind="stable")
    a_s = a[order]
    # tail sums: measure of {|f| >= a_s[i]}
    tail = np.cumsum(m[order][::-1])[::-1]
    first = np.searchsorted(a_s, a_s, side="left")
    level = tail[first]
    return float(np.max(a_s * level ** (1.0 / q)))


@dataclass(frozen=True)
class NormTrace:
    """Samples ``(t, ‖u(t)‖)`` of one norm on one region."""

    q: float
    radius: float | None
    times: np.ndarray
    values: np.ndarray
    kind: str = "lq"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape:
            raise ValueError("times and values differ in length")
        if np.any(v < 0):
            raise ValueError("norm values must be nonnegative")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def norm_trace(snapshots, q: float, radius: float | None = None, kind: str = "lq") -> NormTrace:
    """Evaluate a norm along ``(t, RadialField)`` snapshots.

    ``kind`` is ``"lq"`` for ``‖u‖_{L^q}`` or ``"lorentz_grad"`` for
    ``‖∇u‖_{L^{q,∞}}``.
    """
    times, vals = [], []
    for t, u in snapshots:
        if kind == "lq":
            v = lq_norm(u, q, radius)
        elif kind == "lorentz_grad":
            v = weak_lorentz_quasinorm(radial_gradient(u), q, radius)
        else:
            raise ValueError(f"unknown norm kind {kind!r}")
        times.append(t)
        vals.append(v)
    return NormTrace(q, radius, np.array(times), np.array(vals), kind)


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    stderr: float
    n_samples: int
    window: tuple[float, float]

    def confidence_interval(self, level: float = 0.95) -> tuple[float, float]:
        if self.n_samples < 3:
            return (-math.inf, math.inf)
        h = stats.t.ppf(0.5 + level / 2, self.n_samples - 2) * self.stderr
        return (self.slope - h, self.slope + h)


def rate_fit(
    trace: NormTrace,
    T_hat: float,
    window_decades: float = 2.0,
    window_end: float | None = None,
    min_samples: int = 10,
) -> RateFit:
    """Slope of ``log ‖u‖`` against ``log(T̂ - t)`` over a window in ``T̂ - t``.

    The window is ``[window_end, window_end * 10**window_decades]``; by default
    it ends at the smallest ``T̂ - t`` in the trace.
    """
    s = T_hat - trace.times
    ok = (s > 0) & (trace.values > 0)
    if window_end is None:
        if not np.any(ok):
            raise ValueError("no samples before T_hat")
        window_end = float(s[ok].min())
    hi = window_end * 10.0**window_decades
    sel = ok & (s >= window_end * (1 - 1e-9)) & (s <= hi * (1 + 1e-9))
    if sel.sum() < min_samples:
        raise ValueError(f"only {int(sel.sum())} samples in the fit window, need {min_samples}")
    x = np.log(s[sel])
    y = np.log(trace.values[sel])
    if np.ptp(y) == 0:
        return RateFit(0.0, float(y[0]), 0.0, int(sel.sum()), (window_end, hi))
    res = stats.linregress(x, y)
    return RateFit(float(res.slope), float(res.intercept), float(res.stderr), int(sel.sum()), (window_end, hi))


def compact_bump(z):
    """``(1 - z²)³`` on ``[0, 1)``, zero beyond; a C² compactly supported profile."""
    z = np.asarray(z, dtype=float)
    return np.where(z < 1.0, np.clip(1.0 - z * z, 0.0, None) ** 3, 0.0)


def self_similar_snapshots(params, grid, profile, T: float, times):
    """Snapshots of ``(T-t)^{-1/(p-1)} U(r/√(T-t))`` on a fixed grid."""
    out = []
    for t in times:
        s = T - t
        if not s > 0:
            raise ValueError("all times must precede T")
        vals = s ** (-1.0 / (params.p - 1.0)) * profile(grid.nodes / math.sqrt(s))
        out.append((float(t), RadialField(grid, vals)))
    return out
