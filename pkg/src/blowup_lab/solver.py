"""Radial time integration of ``u_t = Δu + |u|^{p-1} u`` up to blow-up.

Each step advances the reaction ``u' = |u|^{p-1} u`` with its exact flow and
then takes one backward-Euler diffusion step (a tridiagonal solve).  Time steps
shrink like ``‖u‖_∞^{-(p-1)}``, which is the only scale the equation has.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy.linalg import solve_banded

from .grid import Params, RadialField, RadialGrid

__all__ = [
    "StepError",
    "SimConfig",
    "SimTrace",
    "step",
    "adaptive_dt",
    "run_to_blowup",
    "homogeneous_exact",
    "estimate_blowup_time",
    "gaussian_data",
    "homogeneous_data",
]

log = logging.getLogger(__name__)

BALL = "ball"
WHOLE_SPACE = "whole_space"


class StepError(RuntimeError):
    """A time step could not be taken; the caller should reduce ``dt``."""


@dataclass(frozen=True, eq=False)
class SimConfig:
    params: Params
    grid: RadialGrid
    u0: RadialField
    domain: str = WHOLE_SPACE
    beta: float = 0.05
    dt_max: float = 1e-2
    u_max: float = 1e8
    dt_min: float = 1e-14
    max_steps: int = 200_000
    t_end: float | None = None
    checkpoint_ratio: float = 0.8
    snapshot_dt: float | None = None
    data_width: float | None = None

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")
        for name in ("dt_max", "u_max", "dt_min", "max_steps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.checkpoint_ratio < 1:
            raise ValueError("checkpoint_ratio must lie in (0, 1)")
        if self.domain not in (BALL, WHOLE_SPACE):
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.u0.grid is not self.grid:
            raise ValueError("initial data must live on the configured grid")
        if self.grid.n != self.params.n:
            raise ValueError("grid dimension does not match params.n")
        if self.domain == WHOLE_SPACE and self.data_width is not None:
            if self.grid.r_max < 20 * self.data_width:
                raise ValueError("whole-space emulation needs r_max >= 20 x data width")


@dataclass
class SimTrace:
    """Per-step history of a run plus field snapshots at checkpoints."""

    times: np.ndarray
    linf: np.ndarray
    dts: np.ndarray | None = None
    snapshots: list = field(default_factory=list)
    blowup_flag: bool = False
    blowup_time: float = math.nan
    stop_reason: str = ""
    params: Params | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.linf = np.asarray(self.linf, dtype=float)
        if self.dts is None:
            self.dts = np.diff(self.times, prepend=self.times[0])
        self.dts = np.asarray(self.dts, dtype=float)

    @property
    def snapshot_times(self) -> np.ndarray:
        return np.array([t for t, _ in self.snapshots])

    @property
    def last_dt(self) -> float:
        return float(self.dts[-1])

    def fields(self):
        return [u for _, u in self.snapshots]


def gaussian_data(grid: RadialGrid, amplitude: float, width: float) -> RadialField:
    """``amplitude * exp(-r²/width²)`` with the far wall pinned to zero."""
    v = amplitude * np.exp(-((grid.nodes / width) ** 2))
    v[-1] = 0.0
    return RadialField(grid, v)


def homogeneous_data(grid: RadialGrid, p: float, T: float) -> RadialField:
    """Constant data ``kappa T^{-1/(p-1)}`` that blows up at ``T`` (wall node zero)."""
    v = np.full(len(grid), homogeneous_exact(p, T, 0.0))
    v[-1] = 0.0
    return RadialField(grid, v)


def homogeneous_exact(p: float, T: float, t: float) -> float:
    """``kappa (T - t)^{-1/(p-1)}``, the spatially constant solution blowing up at T."""
    if not t < T:
        raise ValueError("t must be smaller than the blow-up time T")
    kappa = (p - 1.0) ** (-1.0 / (p - 1.0))
    return kappa * (T - t) ** (-1.0 / (p - 1.0))


def _reaction_flow(u, dt, p):
    growth = (p - 1.0) * dt * np.abs(u) ** (p - 1.0)
    if np.any(growth >= 1.0):
        raise StepError("dt reaches the ODE blow-up time of the reaction step")
    return u * (1.0 - growth) ** (-1.0 / (p - 1.0))


def step(state: RadialField, dt: float, cfg: SimConfig) -> RadialField:
    """One step: exact reaction flow, then implicit diffusion with u(R_max) = 0."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    u = _reaction_flow(state.values, dt, cfg.params.p)
    a, b = state.grid.laplacian_coefficients
    N = u.size
    ab = np.zeros((3, N))
    ab[1] = 1.0 + dt * (a + b)
    ab[0, 1:] = -dt * b[:-1]
    ab[2, :-1] = -dt * a[1:]
    # Dirichlet wall
    ab[1, -1] = 1.0
    ab[2, -2] = 0.0
    rhs = u.copy()
    rhs[-1] = 0.0
    try:
        new = solve_banded((1, 1), ab, rhs, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise StepError(f"tridiagonal solve failed: {exc}") from exc
    if not np.all(np.isfinite(new)):
        raise StepError("non-finite values after step")
    return RadialField(state.grid, new)


def adaptive_dt(state: RadialField, cfg: SimConfig) -> float:
    """``beta * min(dt_max, ‖u‖_∞^{-(p-1)})``."""
    m = state.sup()
    cap = cfg.dt_max
    if m > 0:
        cap = min(cap, m ** (-(cfg.params.p - 1.0)))
    return cfg.beta * cap


def run_to_blowup(cfg: SimConfig) -> SimTrace:
    """Integrate until ``‖u‖_∞ > u_max``, ``dt < dt_min``, ``t_end`` or ``max_steps``.

    Snapshots are stored whenever the ODE time-to-blow-up proxy
    ``‖u‖_∞^{-(p-1)}/(p-1)`` has shrunk by ``checkpoint_ratio`` since the last
    one (geometric in ``T - t`` for type I growth), and optionally every
    ``snapshot_dt`` of simulated time.
    """
    p = cfg.params.p
    u = cfg.u0
    t = 0.0
    times = [0.0]
    dts = [0.0]
    linf = [u.sup()]
    snaps = [(0.0, u)]
    last_proxy = _proxy(linf[0], p)
    last_snap_t = 0.0
    reason = "max_steps"
    blowup = False
    steps = 0
    while steps < cfg.max_steps:
        m = linf[-1]
        if m > cfg.u_max:
            reason, blowup = "u_max", True
            break
        if cfg.t_end is not None and t >= cfg.t_end:
            reason = "t_end"
            break
        dt = adaptive_dt(u, cfg)
        if dt < cfg.dt_min:
            reason, blowup = "dt_min", True
            break
        if cfg.t_end is not None:
            dt = min(dt, cfg.t_end - t)
        while True:
            try:
                u = step(u, dt, cfg)
                break
            except StepError:
                dt *= 0.5
                if dt < cfg.dt_min:
                    raise
        t_new = t + dt
        if t_new == t:
            reason, blowup = "dt_min", True
            break
        t = t_new
        steps += 1
        m = u.sup()
        times.append(t)
        dts.append(dt)
        linf.append(m)
        proxy = _proxy(m, p)
        due = proxy <= cfg.checkpoint_ratio * last_proxy
        if cfg.snapshot_dt is not None and t - last_snap_t >= cfg.snapshot_dt * (1 - 1e-12):
            due = True
        if due:
            snaps.append((t, u))
            last_proxy = proxy
            last_snap_t = t
    if snaps[-1][0] != t:
        snaps.append((t, u))
    trace = SimTrace(np.array(times), np.array(linf), np.array(dts), snaps,
                     blowup_flag=blowup, stop_reason=reason, params=cfg.params)
    if blowup:
        trace.blowup_time = estimate_blowup_time(trace, p)
    log.info("run stopped (%s) after %d steps at t=%.17g", reason, steps, t)
    return trace


def _proxy(m, p):
    if m <= 0:
        return math.inf
    return m ** (-(p - 1.0)) / (p - 1.0)


def estimate_blowup_time(trace, p: float, window_decades: float = 2.0) -> float:
    """Zero crossing of a least-squares line through ``‖u‖_∞^{-(p-1)}`` vs t.

    Uses the tail samples whose ``‖u‖_∞^{-(p-1)}`` lies within
    ``window_decades`` of the last one.  The relation is exactly linear for the
    homogeneous solution.
    """
    t = np.asarray(trace.times, dtype=float)
    m = np.asarray(trace.linf, dtype=float)
    if t.size < 5 or np.any(m <= 0):
        raise ValueError("need at least 5 positive samples")
    y = m ** (-(p - 1.0))
    tail = y <= y[-1] * 10.0**window_decades
    first = np.argmax(tail)  # contiguous tail ending at the last sample
    tail[first:] = True
    tt = t[first:]
    yy = y[first:]
    if tt.size < 5:
        tt, yy = t[-5:], y[-5:]
    if np.any(np.diff(yy) >= 0):
        raise ValueError("sup norm is not increasing along the tail: no clean blow-up")
    # shift times so the fit is well conditioned near the end
    t_ref = tt[-1]
    slope, icpt = np.polyfit(tt - t_ref, yy, 1)
    if not slope < 0:
        raise ValueError("fitted decay of ‖u‖^{-(p-1)} is not negative")
    T_hat = t_ref - icpt / slope
    if not T_hat > t_ref:
        # curvature in the window can put the fitted crossing behind the data
        T_hat = t_ref + yy[-1] / (-slope)
    return float(T_hat)
