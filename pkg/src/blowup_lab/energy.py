"""Gaussian-weighted localized energy and backward similarity variables.

For a center ``(x̃, t̃)`` the energy at time ``t < t̃`` is::

    E(t) = (t̃-t)^{(p+1)/(p-1)} ∫ (|∇u|²/2 - |u|^{p+1}/(p+1) + u²/(2(p-1)(t̃-t))) K φ² dx

with ``K = (t̃-t)^{-n/2} exp(-|x-x̃|²/(4(t̃-t)))`` and ``φ = cutoff(|x-x̃|/R)``.
In the variables ``η = (x-x̃)/√(t̃-t)``, ``τ = -log(t̃-t)``,
``w = (t̃-t)^{1/(p-1)} u`` the same number is an integral against
``ρ = exp(-|η|²/4)``.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .grid import (
    GAUSS_LOG_CUTOFF,
    Params,
    RadialField,
    RadialGrid,
    gaussian_weighted_integral,
    radial_gradient,
)

__all__ = [
    "cutoff",
    "EnergyCenter",
    "EnergyRecord",
    "SimilarityFrame",
    "AuditReport",
    "weighted_energy",
    "to_similarity",
    "from_similarity",
    "rescaled_energy",
    "dissipation",
    "energy_records",
    "quasimonotonicity_audit",
    "energy_bound_check",
]


def cutoff(z):
    """Nonincreasing C² bump: 1 on [0, 1/2], 0 on [1, ∞), quintic smoothstep between."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("cutoff is defined for z >= 0")
    s = np.clip(2.0 * z - 1.0, 0.0, 1.0)
    smooth = s**3 * (10.0 - 15.0 * s + 6.0 * s**2)
    out = 1.0 - smooth
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EnergyCenter:
    """``x_tilde = |x̃|``, the reference time ``t_tilde`` and the cutoff radius.

    ``cutoff_radius = inf`` switches the cutoff off.
    """

    x_tilde: float
    t_tilde: float
    cutoff_radius: float = math.inf

    def __post_init__(self):
        if not self.x_tilde >= 0:
            raise ValueError("x_tilde is a radial offset and must be >= 0")
        if not self.cutoff_radius > 0:
            raise ValueError("cutoff_radius must be positive")

    def gap(self, t: float) -> float:
        g = self.t_tilde - t
        if not g > 0:
            raise ValueError("evaluation time must be smaller than t_tilde")
        return g


def _cutoff_weight(radius):
    """``φ²(ρ/radius)`` as a function of the distance ρ, or None for no cutoff."""
    if math.isinf(radius):
        return None
    return lambda rho: cutoff(np.asarray(rho) / radius) ** 2


@dataclass(frozen=True)
class EnergyRecord:
    t: float
    E: float
    parts: tuple[float, float, float]
    dissipation_increment: float = 0.0

    def __post_init__(self):
        if self.dissipation_increment < 0:
            raise ValueError("dissipation increment must be nonnegative")

    @property
    def gradient_part(self) -> float:
        return self.parts[0]

    @property
    def potential_part(self) -> float:
        return self.parts[1]

    @property
    def quadratic_part(self) -> float:
        return self.parts[2]


def _energy_parts(u: RadialField, grad: RadialField, x0: float, gap: float, p: float, weight):
    g = u.with_values(0.5 * grad.values**2)
    pot = u.with_values(-np.abs(u.values) ** (p + 1.0) / (p + 1.0))
    quad = u.with_values(u.values**2 / (2.0 * (p - 1.0) * gap))
    return [gaussian_weighted_integral(f, x0, gap, weight) for f in (g, pot, quad)]


def weighted_energy(
    u: RadialField,
    grad_u: RadialField | None,
    center: EnergyCenter,
    t: float,
    params: Params,
) -> EnergyRecord:
    """Evaluate ``E_{(x̃,t̃)}(t)``; ``grad_u=None`` differentiates ``u`` here."""
    gap = center.gap(t)
    if grad_u is None:
        grad_u = radial_gradient(u)
    p = params.p
    scale = gap ** ((p + 1.0) / (p - 1.0))
    parts = _energy_parts(u, grad_u, center.x_tilde, gap, p, _cutoff_weight(center.cutoff_radius))
    parts = tuple(scale * v for v in parts)
    return EnergyRecord(t, float(sum(parts)), parts)


@dataclass(frozen=True)
class SimilarityFrame:
    """``w(·, τ)`` about ``x̃ = 0``; ``cutoff_eta`` is the cutoff radius in η units.

    ``clamped`` is set when part of the η grid lies beyond the data and was
    filled with zeros.
    """

    tau: float
    w: RadialField
    cutoff_eta: float = math.inf
    clamped: bool = False

    @property
    def gap(self) -> float:
        return math.exp(-self.tau)


def to_similarity(
    u: RadialField,
    center: EnergyCenter,
    t: float,
    params: Params,
    eta_grid: RadialGrid | None = None,
) -> SimilarityFrame:
    """Rescale ``u(·, t)`` to ``w(η) = (t̃-t)^{1/(p-1)} u(√(t̃-t) η)``.

    Without ``eta_grid`` the nodes of ``u`` are mapped to ``η = r/√(t̃-t)``, so
    ``w`` is exact at every node.  Otherwise ``u`` is interpolated onto
    ``eta_grid`` and points past ``u``'s last node are set to zero.  Frames are
    radial, so only ``x̃ = 0`` is supported.
    """
    if center.x_tilde != 0:
        raise ValueError("similarity frames are radial only about x_tilde = 0")
    gap = center.gap(t)
    s = math.sqrt(gap)
    amp = gap ** (1.0 / (params.p - 1.0))
    clamped = False
    if eta_grid is None:
        w = RadialField(u.grid.scaled(1.0 / s), amp * u.values, u.symmetry)
    else:
        r = s * eta_grid.nodes
        clamped = bool(r[-1] > u.grid.r_max * (1 + 1e-12))
        w = RadialField(eta_grid, amp * u(r), u.symmetry)
    return SimilarityFrame(-math.log(gap), w, center.cutoff_radius / s, clamped)


def from_similarity(frame: SimilarityFrame, params: Params, grid: RadialGrid | None = None) -> RadialField:
    """Invert :func:`to_similarity`: ``u(r) = gap^{-1/(p-1)} w(r/√gap)``."""
    gap = frame.gap
    s = math.sqrt(gap)
    amp = gap ** (-1.0 / (params.p - 1.0))
    if grid is None:
        return RadialField(frame.w.grid.scaled(s), amp * frame.w.values, frame.w.symmetry)
    return RadialField(grid, amp * frame.w(grid.nodes / s), frame.w.symmetry)


def rescaled_energy(frame: SimilarityFrame, params: Params) -> float:
    """``∫ (|∇w|²/2 - |w|^{p+1}/(p+1) + w²/(2(p-1))) ρ ψ² dη``."""
    w = frame.w
    grad = radial_gradient(w)
    parts = _energy_parts(w, grad, 0.0, 1.0, params.p, _cutoff_weight(frame.cutoff_eta))
    return float(sum(parts))


def _common_eta_grid(n: int, num_nodes: int = 2001) -> RadialGrid:
    eta_max = math.sqrt(4.0 * GAUSS_LOG_CUTOFF)
    return RadialGrid.graded(eta_max, num_nodes, n, gamma=1.5)


def dissipation(u_a: RadialField, t_a: float, u_b: RadialField, t_b: float,
                center: EnergyCenter, params: Params, eta_grid: RadialGrid | None = None) -> float:
    """``½ ∫_{τ_a}^{τ_b} ∫ w_σ² ρ ψ² dη dσ`` from two snapshots.

    ``w_σ`` is the difference quotient of the two frames on a common η grid,
    so by Cauchy-Schwarz this never exceeds the exact dissipation of a smooth
    path between the two frames.
    """
    if not t_b > t_a:
        raise ValueError("need t_a < t_b")
    if eta_grid is None:
        eta_grid = _common_eta_grid(params.n)
    fa = to_similarity(u_a, center, t_a, params, eta_grid)
    fb = to_similarity(u_b, center, t_b, params, eta_grid)
    dtau = fb.tau - fa.tau
    diff = fa.w.with_values((fb.w.values - fa.w.values) ** 2)
    if math.isinf(center.cutoff_radius):
        weight = None
    else:
        # cutoff in η at the midpoint time
        mid = math.sqrt(fa.cutoff_eta * fb.cutoff_eta)
        weight = _cutoff_weight(mid)
    val = 0.5 * gaussian_weighted_integral(diff, 0.0, 1.0, weight) / dtau
    return max(val, 0.0)


def energy_records(snapshots, center: EnergyCenter, params: Params, with_dissipation: bool = True):
    """Energy records along ``(t, u)`` snapshots, with dissipation between neighbours."""
    out = []
    prev = None
    for t, u in snapshots:
        if not t < center.t_tilde:
            continue
        rec = weighted_energy(u, None, center, t, params)
        d = 0.0
        if with_dissipation and prev is not None and center.x_tilde == 0:
            d = dissipation(prev[1], prev[0], u, t, center, params)
        out.append(EnergyRecord(rec.t, rec.E, rec.parts, d))
        prev = (t, u)
    return out


@dataclass(frozen=True)
class AuditReport:
    C_fit: float
    max_raw_increment: float
    worst_pair: tuple[int, int] | None
    n_records: int
    normalized: float | None = None


def quasimonotonicity_audit(records, t_tilde: float, M: float | None = None,
                            params: Params | None = None) -> AuditReport:
    """Least ``C`` with ``E(t) + D(t', t) <= E(t') + C √(t̃ - t')`` over all pairs.

    ``D(t', t)`` sums the dissipation increments of the records after ``t'`` up
    to ``t``.  With ``M`` and ``params`` given, ``C_fit / (M + M^p)²`` is also
    reported.
    """
    if len(records) < 2:
        raise ValueError("need at least 2 records")
    t = np.array([r.t for r in records])
    if np.any(np.diff(t) <= 0):
        raise ValueError("records must be time ordered")
    if np.any(t >= t_tilde):
        raise ValueError("record times must precede t_tilde")
    E = np.array([r.E for r in records])
    D = np.cumsum([r.dissipation_increment for r in records])
    # pair (i, j), i < j:  E_j + (D_j - D_i) - E_i
    excess = (E[None, :] + D[None, :]) - (E[:, None] + D[:, None])
    raw = E[None, :] - E[:, None]
    upper = np.triu(np.ones_like(excess, dtype=bool), k=1)
    root = np.sqrt(t_tilde - t)[:, None]
    ratio = np.where(upper, excess / root, -np.inf)
    k = np.unravel_index(np.argmax(ratio), ratio.shape)
    C = max(0.0, float(ratio[k]))
    worst = (int(k[0]), int(k[1])) if C > 0 else None
    max_raw = float(np.max(np.where(upper, raw, -np.inf)))
    norm = None
    if M is not None and params is not None:
        norm = C / (M + M**params.p) ** 2
    return AuditReport(C, max_raw, worst, len(records), norm)


def energy_bound_check(records, M: float, params: Params) -> float:
    """``max |E| / (M + M^p)²`` over the records."""
    if not M > 0:
        raise ValueError("M must be positive")
    if len(records) == 0:
        return 0.0
    top = max(abs(r.E) for r in records)
    return float(top / (M + M**params.p) ** 2)
