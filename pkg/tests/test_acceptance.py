"""The eleven acceptance criteria, each at its stated tolerance and time budget.

Every test logs one PASS/FAIL line that is printed in the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from blowup_lab.energy import (EnergyCenter, energy_records, quasimonotonicity_audit, rescaled_energy,
                               to_similarity, weighted_energy)
from blowup_lab.epsreg import concentration_scan, scaling_quantity, singular_set_estimate
from blowup_lab.grid import RadialField, RadialGrid, make_params, rescale_field
from blowup_lab.kernels import bound_lattice, kernel_bound_check, semigroup_defect
from blowup_lab.norms import (NormTrace, compact_bump, lq_norm, norm_trace, rate_fit,
                              self_similar_snapshots)
from blowup_lab.profile import CONSTANT, DECAYING, qc_integral_growth, shoot
from blowup_lab.solver import SimConfig, homogeneous_data, homogeneous_exact, run_to_blowup

from conftest import bounded_run, homogeneous_snapshots, supercritical_run

# frozen oracles (mpmath, 30 digits)
E_HOM_N3_P3 = 2.78416399841585392        # κ²(4π)^{3/2}/8 with κ² = 1/2
PI_OVER_6 = 0.523598775598298873
J0_ORACLE_N3 = 0.0224483902656458202     # (4π)^{-3/2}
J1_ORACLE_N3 = 0.0136156369573088176     # (4π)^{-3/2} e^{-1/2}


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_criterion_01_exponent_table(record):
    with Clock() as clk:
        expected = {
            (3, 5): (5.0, 6.0, 2.0),
            (3, 7): (5.0, 9.0, 2.25),
            (4, 3): (3.0, 4.0, 2.0),
            (5, 4): (7.0 / 3.0, 7.5, 3.0),
        }
        exact = all(
            (P.p_S, P.q_c, P.q_star) == v
            for (n, p), v in expected.items()
            for P in [make_params(n, p)]
        )
        rng = np.random.default_rng(20261015)
        ns = rng.integers(3, 13, size=100)
        sweep_ok = True
        for n in ns:
            p_S = (n + 2) / (n - 2)
            p = rng.uniform(1.01, 3.0 * p_S)
            while abs(p - p_S) < 1e-6:
                p = rng.uniform(1.01, 3.0 * p_S)
            P = make_params(int(n), p)
            sweep_ok &= (P.q_c > P.p + 1) == (P.p > P.p_S) == (P.q_star > 2)
    ok = exact and sweep_ok and clk.elapsed < 1.0
    record(1, ok, f"table exact={exact}, sweep={sweep_ok}, {clk.elapsed:.2f}s")
    assert ok


def test_criterion_02_homogeneous_oracle(record):
    details, ok = [], True
    with Clock() as clk:
        for p in (2.0, 3.0):
            P = make_params(3, p)
            g = RadialGrid.graded(20.0, 200, 3, 2.0)
            tr = run_to_blowup(SimConfig(P, g, homogeneous_data(g, p, 1.0)))
            fit = rate_fit(NormTrace(math.inf, None, tr.times, tr.linf), tr.blowup_time)
            dT = abs(tr.blowup_time - 1.0)
            ds = abs(fit.slope + 1.0 / (p - 1.0))
            ok &= tr.blowup_flag and dT <= 1e-3 and ds <= 1e-3
            details.append(f"p={p:g}: |T-1|={dT:.1e} slope err={ds:.1e}")
    ok &= clk.elapsed < 30.0
    record(2, ok, "; ".join(details) + f", {clk.elapsed:.1f}s")
    assert ok


def test_criterion_03_energy_closed_form(record):
    with Clock() as clk:
        P = make_params(3, 3)
        g = RadialGrid.graded(20.0, 400, 3, 2.0)
        center = EnergyCenter(0.0, 1.0)
        errs = []
        for gap in (1e-1, 1e-2, 1e-3):
            u = RadialField.constant(g, homogeneous_exact(3.0, 1.0, 1.0 - gap))
            E = weighted_energy(u, None, center, 1.0 - gap, P).E
            errs.append(abs(E / E_HOM_N3_P3 - 1.0))
    ok = max(errs) <= 1e-4 and clk.elapsed < 10.0
    record(3, ok, f"max rel err {max(errs):.1e} over three gaps, {clk.elapsed:.2f}s")
    assert ok


def test_criterion_04_similarity_identity(record, super_trace, p7):
    with Clock() as clk:
        T = super_trace.blowup_time
        snaps = [(t, u) for t, u in super_trace.snapshots if t < T]
        pick = np.unique(np.linspace(0, len(snaps) - 1, 20).round().astype(int))
        center = EnergyCenter(0.0, T)
        worst = 0.0
        for k in pick:
            t, u = snaps[k]
            E = weighted_energy(u, None, center, t, p7).E
            E2 = rescaled_energy(to_similarity(u, center, t, p7), p7)
            worst = max(worst, abs(E2 - E) / abs(E))
    ok = pick.size == 20 and worst <= 1e-6 and clk.elapsed < 30.0
    record(4, ok, f"{pick.size} snapshots, max rel diff {worst:.1e}, {clk.elapsed:.2f}s")
    assert ok


def test_criterion_05_quasimonotonicity(record, p3):
    with Clock() as clk:
        tr = supercritical_run()
        P = tr.params
        T = tr.blowup_time
        snaps = [(t, u) for t, u in tr.snapshots if t < T]
        center = EnergyCenter(0.0, T, cutoff_radius=10.0)
        recs = energy_records(snaps, center, P)
        M = max(lq_norm(u, P.q_c) for _, u in snaps)
        audit = quasimonotonicity_audit(recs, T, M, P)
        limit = 1e-3 * (M + M**P.p) ** 2
        # homogeneous oracle: E is constant and the frames do not move
        g = RadialGrid.graded(20.0, 400, 3, 2.0)
        hom = homogeneous_snapshots(g, 3.0, 1.0, 1.0 - np.geomspace(0.5, 1e-4, 40))
        hom_audit = quasimonotonicity_audit(energy_records(hom, EnergyCenter(0.0, 1.0), p3), 1.0)
    ok = audit.C_fit <= limit and hom_audit.C_fit <= 1e-6 and clk.elapsed < 60.0
    record(5, ok, f"C_fit={audit.C_fit:.2e} (limit {limit:.2e}), homogeneous C_fit={hom_audit.C_fit:.1e}, "
                  f"{clk.elapsed:.1f}s")
    assert ok


def _homogeneous_cylinder(P, delta, lam=1.0, grid=None):
    """Snapshots of κ(-t)^{-1/(p-1)} on (-2δ², -δ²), optionally rescaled by λ."""
    times = np.linspace(-2.0 * delta**2, -delta**2, 401)
    grid = grid or RadialGrid.graded(1.0, 400, 3, 2.0)
    snaps = homogeneous_snapshots(grid, P.p, 0.0, times)
    if lam != 1.0:
        snaps = [(t / lam**2, rescale_field(u, lam, P.p)) for t, u in snaps]
    return snaps


def test_criterion_06_epsilon_quantity(record, p3):
    with Clock() as clk:
        errs, inv = [], []
        for delta in (0.1, 0.05, 0.025):
            I = scaling_quantity(_homogeneous_cylinder(p3, delta), 0.0, -delta**2, delta, p3).value
            errs.append(abs(I - PI_OVER_6))
            lam = 2.0
            I2 = scaling_quantity(_homogeneous_cylinder(p3, delta, lam), 0.0, -delta**2 / lam**2,
                                  delta / lam, p3).value
            inv.append(abs(I2 - I))
        # invariance on a non-constant field as well
        tr = run_to_blowup(SimConfig(p3, (g := RadialGrid.graded(20.0, 800, 3, 3.0)),
                                     RadialField(g, np.where(np.arange(800) < 799, 2.0 * np.exp(-g.nodes**2), 0.0)),
                                     data_width=1.0, t_end=0.05, snapshot_dt=0.0005))
        snaps = [(t, u) for t, u in tr.snapshots]
        d = 0.1
        base = scaling_quantity(snaps, 0.3, 0.05, d, p3).value
        lam = 2.0
        scaled = [(t / lam**2, rescale_field(u, lam, 3.0)) for t, u in snaps]
        other = scaling_quantity(scaled, 0.3 / lam, 0.05 / lam**2, d / lam, p3).value
        inv.append(abs(other / base - 1.0))
    ok = max(errs) <= 1e-4 and max(inv) <= 1e-6 and clk.elapsed < 10.0
    record(6, ok, f"max |I - π/6|={max(errs):.1e}, max invariance defect={max(inv):.1e}, {clk.elapsed:.2f}s")
    assert ok


def test_criterion_07_detector(record, super_trace, bounded_trace, p7):
    centers = np.linspace(0.0, 2.0, 9)
    deltas = [0.2, 0.1, 0.05, 0.02, 0.01]
    with Clock() as clk:
        tr = supercritical_run()
        sing = singular_set_estimate(concentration_scan(tr.snapshots, centers, deltas, p7))
        br = bounded_run()
        none = singular_set_estimate(concentration_scan(br.snapshots, centers, deltas, p7))
    at_origin = sing.count == 1 and abs(sing.representatives[0]) <= 2 * deltas[-1]
    ok = at_origin and none.count == 0 and clk.elapsed < 120.0
    record(7, ok, f"localized run: {sing.count} cluster(s) at {[float(c) for c in sing.representatives]}, "
                  f"bounded run: {none.count}, {clk.elapsed:.1f}s")
    assert ok


def test_criterion_08_critical_norms(record, p7):
    with Clock() as clk:
        tr = supercritical_run()
        T = tr.blowup_time
        snaps = [(t, u) for t, u in tr.snapshots if t < T]
        s = T - np.array([t for t, _ in snaps])
        win = s <= s.min() * 100.0
        sel = [sn for sn, w in zip(snaps, win) if w]
        mono = {}
        for r in (0.1, 0.5):
            v = norm_trace(sel, p7.q_c, r).values
            running = np.maximum.accumulate(v)
            mono[r] = bool(np.all(v >= 0.99 * running))
        lor = norm_trace(sel, p7.q_star, kind="lorentz_grad").values
        spread = float(lor.max() / np.median(lor))
    ok = all(mono.values()) and spread < 3.0 and clk.elapsed < 120.0
    record(8, ok, f"{len(sel)} snapshots, L^qc monotone {mono}, Lorentz max/median={spread:.3f}, "
                  f"{clk.elapsed:.1f}s")
    assert ok


def test_criterion_09_rate_exponents(record, p7):
    with Clock() as clk:
        g = RadialGrid.graded(1.0, 2000, 3, 4.0)
        times = 1.0 - np.geomspace(1e-2, 1e-6, 61)
        snaps = self_similar_snapshots(p7, g, compact_bump, 1.0, times)
        errs = {}
        for q in (p7.q_c, 2 * p7.q_c, math.inf):
            slope = rate_fit(norm_trace(snaps, q), 1.0).slope
            pred = -1.0 / (p7.p - 1.0) + (0.0 if math.isinf(q) else p7.n / (2.0 * q))
            errs[q] = abs(slope - pred)
    ok = max(errs.values()) <= 1e-3 and clk.elapsed < 10.0
    record(9, ok, "slope errors " + ", ".join(f"q={q:g}: {e:.1e}" for q, e in errs.items())
           + f", {clk.elapsed:.2f}s")
    assert ok


def test_criterion_10_profiles(record, p7):
    from blowup_lab.profile import find_decaying_profiles

    with Clock() as clk:
        const = shoot(p7.kappa, p7)
        dev = float(np.max(np.abs(const.U - p7.kappa)))
        found = find_decaying_profiles(p7)
        tails, r2 = [], []
        for s in found:
            tails.append(abs(s.tail_exponent - 1.0 / 3.0))
            r2.append(qc_integral_growth(s, np.geomspace(4.0, 40.0, 25)).r_squared)
    ok = (const.classification == CONSTANT and dev <= 1e-8 and len(found) > 0
          and all(s.classification == DECAYING for s in found)
          and max(tails) <= 0.05 and min(r2) > 0.99 and clk.elapsed < 60.0)
    record(10, ok, f"κ deviation {dev:.1e}; {len(found)} decaying profile(s) U(0)="
                   + ", ".join(f"{s.a:.6f}" for s in found)
                   + f"; max tail err {max(tails, default=math.nan):.3f}; min R²={min(r2, default=math.nan):.5f}; "
                   f"{clk.elapsed:.1f}s")
    assert ok


def test_criterion_11_kernel_bounds(record):
    with Clock() as clk:
        whole = bound_lattice(3, "wholespace")
        r0 = kernel_bound_check(0, whole, 4.0)
        r1 = kernel_bound_check(1, whole, 8.0)
        e0 = abs(r0 / J0_ORACLE_N3 - 1.0)
        e1 = abs(r1 / J1_ORACLE_N3 - 1.0)
        pts = [([0.3, -0.2, 0.5], [0.1, 0.4, 0.7], 0.5), ([0.0, 0.0, 0.2], [0.1, 0.0, 0.05], 0.01),
               ([1.0, 0.5, 1.5], [0.5, 0.0, 1.0], 1.0)]
        semi = max(semigroup_defect(x, y, t) for x, y, t in pts)
    ok = e0 <= 1e-4 and e1 <= 1e-4 and semi <= 1e-6 and clk.elapsed < 30.0
    record(11, ok, f"j=0 rel err {e0:.1e}, j=1 rel err {e1:.1e}, semigroup defect {semi:.1e}, "
                   f"{clk.elapsed:.2f}s")
    assert ok
