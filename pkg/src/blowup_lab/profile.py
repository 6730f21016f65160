"""Radial backward self-similar profiles.

A profile ``U(z)``, ``z = |x|/√(T-t)``, gives the exact solution
``u = (T-t)^{-1/(p-1)} U(z)`` when

    U'' + ((n-1)/z - z/2) U' - U/(p-1) + |U|^{p-1} U = 0,   U'(0) = 0.

Integration runs in ``W = U/κ``, for which the equation reads
``W'' + ((n-1)/z - z/2) W' - (W - |W|^{p-1} W)/(p-1) = 0`` and the constant
profile ``W = 1`` is an exact floating-point equilibrium.

Forward shots from ``z = 0`` are dominated by the ``e^{z²/4}`` mode unless
``U(0)`` is tuned exactly, so decaying profiles are computed by matching a
forward solution to an inward one started on the algebraic tail
``U ≈ c z^{-2/(p-1)}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import stats
from scipy.integrate import quad, solve_ivp
from scipy.optimize import fsolve

from .grid import Params, RadialField, RadialGrid, sphere_area

__all__ = [
    "ProfileError",
    "ProfileShot",
    "QcGrowth",
    "profile_rhs",
    "shoot",
    "match_profile",
    "find_decaying_profiles",
    "profile_sweep",
    "qc_integral_growth",
    "self_similar_field",
]

CONSTANT = "constant"
ZERO = "zero"
DECAYING = "decaying"
DIVERGING = "diverging"
UNRESOLVED = "unresolved"

_RTOL = 1e-12
_ATOL = 1e-14


class ProfileError(RuntimeError):
    """The profile ODE could not be integrated (step-size underflow)."""


def profile_rhs(z: float, U: float, V: float, params: Params) -> float:
    """``U''`` given ``(z, U, U')``; at ``z = 0`` the limit ``(U/(p-1) - |U|^{p-1}U)/n``."""
    p = params.p
    src = U / (p - 1.0) - abs(U) ** (p - 1.0) * U
    if z == 0:
        return src / params.n
    return -((params.n - 1.0) / z - 0.5 * z) * V + src


def _w_system(params: Params):
    n, p = params.n, params.p

    def rhs(z, y):
        W, dW = y
        src = (W - abs(W) ** (p - 1.0) * W) / (p - 1.0)
        if z == 0:
            return [dW, src / n]
        return [dW, -((n - 1.0) / z - 0.5 * z) * dW + src]

    def jac(z, y):
        W = y[0]
        drift = -((n - 1.0) / z - 0.5 * z) if z != 0 else 0.0
        return [[0.0, 1.0], [(1.0 - p * abs(W) ** (p - 1.0)) / (p - 1.0), drift]]

    rhs.jac = jac
    return rhs


@dataclass(frozen=True, eq=False)
class ProfileShot:
    """One profile on ``[0, z_max]`` with its classification and tail fit.

    ``z``, ``U``, ``V`` are samples; ``dense`` evaluates ``U`` anywhere in
    ``[0, z_max]``.  ``tail_exponent`` is ``α`` in ``U ~ c z^{-α}``.
    """

    a: float
    params: Params
    z_max: float
    z: np.ndarray
    U: np.ndarray
    V: np.ndarray
    classification: str
    tail_exponent: float = math.nan
    tail_coefficient: float = math.nan
    tail_residual: float = math.nan
    method: str = "forward"
    dense: object = field(default=None, repr=False)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.dense is None:
            return np.interp(z, self.z, self.U)
        return self.dense(z)


def _tail_fit(z, U, z_max):
    """Log-log fit of ``|U|`` over the last decade ``[z_max/10, z_max]``."""
    sel = (z >= z_max / 10.0) & (np.abs(U) > 0)
    if sel.sum() < 5:
        return math.nan, math.nan, math.nan
    x, y = np.log(z[sel]), np.log(np.abs(U[sel]))
    res = stats.linregress(x, y)
    resid = float(np.max(np.abs(y - (res.intercept + res.slope * x))))
    return -float(res.slope), float(math.exp(res.intercept)), resid


def shoot(a: float, params: Params, z_max: float = 40.0, diverge_at: float | None = None,
          rtol: float = _RTOL, num_samples: int = 2001) -> ProfileShot:
    """Integrate from ``z = 0`` with ``U(0) = a``, ``U'(0) = 0``.

    The shot is ``diverging`` as soon as ``|U|`` exceeds ``diverge_at``
    (default ``2 max(|a|, κ)``), ``constant`` for ``a = ±κ``, ``zero`` for
    ``a = 0``, ``decaying`` if ``|U|`` reaches ``z_max`` decreasing with a
    positive fitted tail exponent, and ``unresolved`` otherwise.
    """
    if z_max < 20:
        raise ValueError("z_max must be at least 20")
    kappa = params.kappa
    z = np.linspace(0.0, z_max, num_samples)
    if a == 0:
        zeros = np.zeros_like(z)
        return ProfileShot(0.0, params, z_max, z, zeros, zeros, ZERO,
                           dense=lambda s: np.zeros_like(np.asarray(s, dtype=float)))
    if diverge_at is None:
        diverge_at = 2.0 * max(abs(a), kappa)
    rhs = _w_system(params)
    limit = diverge_at / kappa

    def escape(zz, y):
        return abs(y[0]) - limit

    escape.terminal = True
    sol = solve_ivp(rhs, (0.0, z_max), [a / kappa, 0.0], method="DOP853", rtol=rtol,
                    atol=_ATOL, dense_output=True, events=escape)
    if sol.status == -1:
        raise ProfileError(f"integration failed at U(0)={a}: {sol.message}")
    z_end = float(sol.t[-1])
    zz = z[z <= z_end]
    if zz[-1] < z_end:
        zz = np.append(zz, z_end)
    W, dW = sol.sol(zz)
    U, V = kappa * W, kappa * dW
    dense = lambda s: kappa * sol.sol(np.asarray(s, dtype=float))[0]
    if sol.status == 1:
        return ProfileShot(a, params, z_max, zz, U, V, DIVERGING, dense=dense)
    if np.all(np.abs(W - W[0]) <= 1e-12) and abs(abs(a) - kappa) <= 1e-12 * kappa:
        return ProfileShot(a, params, z_max, zz, U, V, CONSTANT, dense=dense)
    alpha, c, resid = _tail_fit(zz, U, z_max)
    tail = zz >= z_max / 10.0
    shrinking = np.all(np.diff(np.abs(U[tail])) <= 0)
    cls = DECAYING if shrinking and alpha > 0 else UNRESOLVED
    return ProfileShot(a, params, z_max, zz, U, V, cls, alpha, c, resid, dense=dense)


def _tail_start(c, Z, params):
    n, p = params.n, params.p
    al = 2.0 / (p - 1.0)
    b = -al * (al + 2.0 - n) - abs(c) ** (p - 1.0)
    U = c * Z**-al * (1.0 + b / Z**2)
    V = c * (-al * Z ** (-al - 1.0) + b * (-al - 2.0) * Z ** (-al - 3.0))
    return U, V


def _inner(a, params, z_m, rtol=_RTOL, dense=False):
    k = params.kappa
    sol = solve_ivp(_w_system(params), (0.0, z_m), [a / k, 0.0], method="DOP853",
                    rtol=rtol, atol=_ATOL, dense_output=dense)
    if sol.status != 0:
        return None
    return sol if dense else k * sol.y[:, -1]


def _outer(c, params, z_m, Z, rtol=_RTOL, dense=False):
    k = params.kappa
    U, V = _tail_start(c, Z, params)
    rhs = _w_system(params)
    # inward the e^{z²/4} mode is strongly damped, so use a stiff-capable method
    sol = solve_ivp(rhs, (Z, z_m), [U / k, V / k], method="LSODA", jac=rhs.jac,
                    rtol=rtol, atol=_ATOL, dense_output=dense)
    if sol.status != 0:
        return None
    return sol if dense else k * sol.y[:, -1]


def match_profile(a_guess: float, c_guess: float, params: Params, z_max: float = 40.0,
                  z_match: float = 3.0, tol: float = 1e-9, num_samples: int = 2001) -> ProfileShot:
    """Refine a decaying profile by matching inner and outer solutions at ``z_match``.

    Solves ``inner(a) = outer(c)`` for ``(U(0), c)`` where the outer solution
    starts at ``z_max`` on ``U = c z^{-α}(1 + b z^{-2})``.  Raises
    :class:`ProfileError` if the matching residual stays above ``tol``.
    """
    if z_max < 20:
        raise ValueError("z_max must be at least 20")

    def mismatch(x):
        i = _inner(x[0], params, z_match)
        o = _outer(x[1], params, z_match, z_max)
        if i is None or o is None:
            return np.array([1e3, 1e3])
        return i - o

    (a, c), info, ier, msg = fsolve(mismatch, [a_guess, c_guess], xtol=1e-14, full_output=True)
    res = float(np.max(np.abs(mismatch([a, c]))))
    if not res <= tol:
        raise ProfileError(f"matching residual {res:.2e} near U(0)={a_guess}")
    si = _inner(a, params, z_match, dense=True)
    so = _outer(c, params, z_match, z_max, dense=True)
    k = params.kappa

    def dense(s):
        s = np.asarray(s, dtype=float)
        out = np.where(s <= z_match, si.sol(np.minimum(s, z_match))[0],
                       so.sol(np.clip(s, z_match, z_max))[0])
        return k * out

    def dense_v(s):
        return k * np.where(s <= z_match, si.sol(np.minimum(s, z_match))[1],
                            so.sol(np.clip(s, z_match, z_max))[1])

    z = np.linspace(0.0, z_max, num_samples)
    U, V = dense(z), dense_v(z)
    alpha, cfit, resid = _tail_fit(z, U, z_max)
    tail = z >= z_max / 10.0
    shrinking = np.all(np.diff(np.abs(U[tail])) <= 0)
    cls = DECAYING if shrinking and alpha > 0 else UNRESOLVED
    return ProfileShot(float(a), params, z_max, z, U, V, cls, alpha, cfit, resid,
                       method="matched", dense=dense)


def _segment_hits(P, Q):
    """Parameters (i + s, j + t) where polyline P crosses polyline Q."""
    hits = []
    for i in range(len(P) - 1):
        p1, d = P[i], P[i + 1] - P[i]
        lo_p, hi_p = np.minimum(P[i], P[i + 1]), np.maximum(P[i], P[i + 1])
        for j in range(len(Q) - 1):
            lo_q, hi_q = np.minimum(Q[j], Q[j + 1]), np.maximum(Q[j], Q[j + 1])
            if np.any(hi_p < lo_q) or np.any(hi_q < lo_p):
                continue
            e = Q[j + 1] - Q[j]
            m = np.array([d, -e]).T
            det = np.linalg.det(m)
            if abs(det) < 1e-300:
                continue
            s, t = np.linalg.solve(m, Q[j] - p1)
            if 0 <= s <= 1 and 0 <= t <= 1:
                hits.append((i + s, j + t))
    return hits


def find_decaying_profiles(params: Params, a_range=(0.05, 8.0), c_range=(0.05, 3.0),
                           z_max: float = 40.0, z_match: float = 3.0,
                           num_a: int = 240, num_c: int = 120, tol: float = 1e-9):
    """Locate positive decaying profiles with ``U(0)`` in ``a_range``.

    Traces the curves ``a ↦ inner(a)`` and ``c ↦ outer(c)`` in the
    ``(U, U')(z_match)`` plane, refines each crossing with :func:`match_profile`
    and keeps the ones whose residual is below ``tol``.  The constant profile
    is excluded.
    """
    A = np.linspace(a_range[0], a_range[1], num_a)
    C = np.linspace(c_range[0], c_range[1], num_c)
    inner = [_inner(a, params, z_match) for a in A]
    outer = [_outer(c, params, z_match, z_max) for c in C]
    # drop samples where integration failed; keep contiguous polylines
    I = np.array([v if v is not None else [np.nan, np.nan] for v in inner])
    O = np.array([v if v is not None else [np.nan, np.nan] for v in outer])
    found = []
    for s, t in _segment_hits(I, O):
        if not (np.isfinite(s) and np.isfinite(t)):
            continue
        a0 = np.interp(s, np.arange(num_a), A)
        c0 = np.interp(t, np.arange(num_c), C)
        try:
            shot = match_profile(a0, c0, params, z_max, z_match, tol)
        except ProfileError:
            continue
        if abs(shot.a - params.kappa) < 1e-6 * params.kappa:
            continue
        if any(abs(shot.a - f.a) < 1e-8 * max(1.0, abs(f.a)) for f in found):
            continue
        found.append(shot)
    found.sort(key=lambda s: s.a)
    return found


def profile_sweep(params: Params, a_values, z_max: float = 40.0, find_decaying: bool = True,
                  a_range=(0.05, 8.0)):
    """Forward shots at every ``a`` plus the decaying profiles found in ``a_range``."""
    shots = [shoot(float(a), params, z_max) for a in a_values]
    if find_decaying:
        shots += find_decaying_profiles(params, a_range=a_range, z_max=z_max)
    return shots


@dataclass(frozen=True)
class QcGrowth:
    """Partial integrals ``ω_{n-1} ∫_0^Z |U|^{q_c} z^{n-1} dz`` and their fit against ``log Z``."""

    cutoffs: np.ndarray
    integrals: np.ndarray
    log_slope: float
    intercept: float
    r_squared: float


def qc_integral_growth(shot: ProfileShot, cutoffs) -> QcGrowth:
    """Partial ``L^{q_c}`` integrals of a profile and a linear fit in ``log Z``."""
    if shot.classification not in (DECAYING, ZERO, CONSTANT):
        raise ValueError(f"need a decaying profile, got {shot.classification!r}")
    params = shot.params
    n, q = params.n, params.q_c
    Z = np.asarray(sorted(cutoffs), dtype=float)
    if Z.size == 0 or Z[0] <= 0 or Z[-1] > shot.z_max * (1 + 1e-12):
        raise ValueError("cutoffs must lie in (0, z_max]")
    omega = sphere_area(n)
    if shot.classification == ZERO:
        vals = np.zeros_like(Z)
    else:
        f = lambda s: abs(float(shot(s))) ** q * s ** (n - 1)
        edges = np.concatenate([[0.0], Z])
        pieces = [quad(f, lo, hi, limit=200, epsabs=0.0, epsrel=1e-11)[0]
                  for lo, hi in zip(edges[:-1], edges[1:])]
        vals = omega * np.cumsum(pieces)
    x = np.log(Z)
    if Z.size >= 2 and np.ptp(vals) > 0:
        res = stats.linregress(x, vals)
        slope, icpt, r2 = float(res.slope), float(res.intercept), float(res.rvalue**2)
    else:
        slope, icpt, r2 = 0.0, float(vals[0]), 1.0
    return QcGrowth(Z, vals, slope, icpt, r2)


def self_similar_field(shot: ProfileShot, grid: RadialGrid, T: float, t: float) -> RadialField:
    """``(T-t)^{-1/(p-1)} U(r/√(T-t))`` on ``grid``; the tail ``c z^{-α}`` fills ``z > z_max``."""
    if not t < T:
        raise ValueError("t must precede T")
    p = shot.params.p
    s = T - t
    z = grid.nodes / math.sqrt(s)
    inside = z <= shot.z_max
    vals = np.empty_like(z)
    vals[inside] = shot(z[inside])
    if np.any(~inside):
        if shot.classification == CONSTANT:
            vals[~inside] = shot.a
        elif shot.classification == ZERO:
            vals[~inside] = 0.0
        else:
            al = 2.0 / (p - 1.0)
            edge = float(shot(shot.z_max))
            vals[~inside] = edge * (z[~inside] / shot.z_max) ** (-al)
    return RadialField(grid, s ** (-1.0 / (p - 1.0)) * vals)
