import math

import numpy as np
import pytest

from blowup_lab.grid import RadialField, RadialGrid, make_params, rescale_field
from blowup_lab.norms import NormTrace, rate_fit
from blowup_lab.solver import (SimConfig, SimTrace, StepError, adaptive_dt, estimate_blowup_time,
                               gaussian_data, homogeneous_data, homogeneous_exact, run_to_blowup, step)

from conftest import supercritical_run


@pytest.fixture(scope="module")
def setup3():
    P = make_params(3, 3)
    g = RadialGrid.graded(20.0, 400, 3, 2.0)
    return P, g


def _cfg(P, g, u0, **kw):
    return SimConfig(P, g, u0, **kw)


class TestStep:
    def test_zero_stays_zero(self, setup3):
        P, g = setup3
        u = RadialField.constant(g, 0.0)
        assert np.all(step(u, 0.01, _cfg(P, g, u)).values == 0.0)

    def test_constant_state_follows_ode(self, setup3):
        P, g = setup3
        c, dt = 1.3, 1e-3
        u = RadialField(g, np.where(g.nodes < g.r_max, c, 0.0))
        new = step(u, dt, _cfg(P, g, u)).values
        ode = c * (1 - (P.p - 1) * dt * c ** (P.p - 1)) ** (-1 / (P.p - 1))
        inside = g.nodes < g.r_max / 2
        assert np.allclose(new[inside], ode, rtol=1e-12)

    def test_constant_state_first_order(self, setup3):
        # (step(c) - c)/dt -> c^p with an O(dt) error
        P, g = setup3
        c = 1.3
        u = RadialField(g, np.where(g.nodes < g.r_max, c, 0.0))
        cfg = _cfg(P, g, u)
        errs = [abs((step(u, dt, cfg).values[0] - c) / dt - c**3) for dt in (1e-3, 5e-4)]
        assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.02)

    def test_richardson_first_order(self, setup3):
        P, g = setup3
        u0 = gaussian_data(g, 1.0, 1.0)
        cfg = _cfg(P, g, u0)

        def integrate(dt, t=0.04):
            u = u0
            for _ in range(int(round(t / dt))):
                u = step(u, dt, cfg)
            return u.values

        a, b, c = integrate(4e-3), integrate(2e-3), integrate(1e-3)
        ratio = np.max(np.abs(a - b)) / np.max(np.abs(b - c))
        assert 1.8 < ratio < 2.2

    def test_wall_and_positivity(self, setup3):
        P, g = setup3
        u0 = gaussian_data(g, 2.0, 1.0)
        new = step(u0, 1e-3, _cfg(P, g, u0))
        assert new.values[-1] == 0.0
        assert np.all(new.values >= 0)

    def test_bad_dt(self, setup3):
        P, g = setup3
        u = gaussian_data(g, 1.0, 1.0)
        with pytest.raises(ValueError):
            step(u, 0.0, _cfg(P, g, u))

    def test_reaction_overflow(self, setup3):
        P, g = setup3
        u = gaussian_data(g, 10.0, 1.0)
        with pytest.raises(StepError):
            step(u, 1.0, _cfg(P, g, u))

    def test_scaling_equivariance(self):
        # the scheme commutes with u -> λ^{2/(p-1)} u(λ r, λ² t) when grid and dt scale along
        P = make_params(3, 5)
        g = RadialGrid.graded(20.0, 500, 3, 2.0)
        u = gaussian_data(g, 1.0, 1.0)
        cfg = _cfg(P, g, u)
        for lam in (2.0, 4.0):
            v = rescale_field(u, lam, P.p)
            cfg_l = _cfg(P, v.grid, v)
            a, b = u, v
            for _ in range(20):
                a = step(a, 1e-3, cfg)
                b = step(b, 1e-3 / lam**2, cfg_l)
            back = rescale_field(b, 1.0 / lam, P.p)
            assert np.allclose(back.values, a.values, rtol=1e-10, atol=1e-13)


class TestAdaptiveDt:
    def test_examples(self, setup3):
        P, g = setup3
        for m, cap in ((1.0, 0.1), (1e2, 1e-5)):
            u = RadialField.constant(g, m)
            dt = adaptive_dt(u, _cfg(P, g, u, beta=0.1, dt_max=1.0))
            assert dt <= cap * (1 + 1e-12)

    def test_doubling_quarters_step(self, setup3):
        P, g = setup3
        u = RadialField.constant(g, 10.0)
        cfg = _cfg(P, g, u, dt_max=1.0)
        assert adaptive_dt(u.with_values(2 * u.values), cfg) == pytest.approx(adaptive_dt(u, cfg) / 4)

    def test_zero_state_uses_dt_max(self, setup3):
        P, g = setup3
        u = RadialField.constant(g, 0.0)
        assert adaptive_dt(u, _cfg(P, g, u, beta=0.5)) == 0.5 * 1e-2


class TestConfig:
    def test_beta_range(self, setup3):
        P, g = setup3
        u = RadialField.constant(g, 0.0)
        for beta in (0.0, 1.5):
            with pytest.raises(ValueError):
                _cfg(P, g, u, beta=beta)

    def test_whole_space_width(self, setup3):
        P, g = setup3
        with pytest.raises(ValueError):
            _cfg(P, g, gaussian_data(g, 1.0, 2.0), data_width=2.0)

    def test_grid_must_match(self, setup3):
        P, g = setup3
        other = RadialGrid.graded(20.0, 400, 3, 2.0)
        with pytest.raises(ValueError):
            _cfg(P, g, RadialField.constant(other, 0.0))


class TestHomogeneous:
    def test_exact(self):
        assert homogeneous_exact(3.0, 1.0, 0.0) == pytest.approx(math.sqrt(0.5))
        assert homogeneous_exact(2.0, 1.0, 0.5) == pytest.approx(2.0)
        with pytest.raises(ValueError):
            homogeneous_exact(3.0, 1.0, 1.0)

    @pytest.mark.parametrize("p", [2.0, 3.0])
    def test_run_recovers_T(self, p):
        P = make_params(3, p)
        g = RadialGrid.graded(20.0, 200, 3, 2.0)
        tr = run_to_blowup(SimConfig(P, g, homogeneous_data(g, p, 1.0)))
        assert tr.blowup_flag
        assert tr.blowup_time == pytest.approx(1.0, abs=1e-3)


class TestRun:
    def test_zero_data(self, setup3):
        P, g = setup3
        u = RadialField.constant(g, 0.0)
        tr = run_to_blowup(_cfg(P, g, u, t_end=0.5))
        assert not tr.blowup_flag and tr.stop_reason == "t_end"
        assert np.all(tr.linf == 0.0)

    def test_supercritical_rate(self, super_trace):
        fit = rate_fit(NormTrace(math.inf, None, super_trace.times, super_trace.linf), super_trace.blowup_time)
        assert super_trace.blowup_flag
        assert fit.slope == pytest.approx(-1 / 6, abs=0.05)

    def test_type_one_lower_bound(self, super_trace):
        # measured rates never fall below the type I exponent by more than the fit tolerance
        fit = rate_fit(NormTrace(math.inf, None, super_trace.times, super_trace.linf), super_trace.blowup_time)
        assert fit.slope >= -1 / 6 - 0.05

    def test_positivity(self, super_trace):
        assert all(np.all(u.values >= 0) for _, u in super_trace.snapshots)

    def test_below_homogeneous_envelope(self, setup3):
        # data under κ T^{-1/2} stays under κ (T - t)^{-1/2}
        P, g = setup3
        T = P.kappa**2 / 4.0
        tr = run_to_blowup(_cfg(P, g, gaussian_data(g, 2.0, 1.0), data_width=1.0, t_end=0.9 * T))
        env = np.array([homogeneous_exact(3.0, T, t) for t in tr.times])
        assert np.all(tr.linf <= env * (1 + 1e-3))

    def test_snapshots_ordered(self, super_trace):
        t = super_trace.snapshot_times
        assert np.all(np.diff(t) > 0)
        assert super_trace.snapshots[-1][0] == super_trace.times[-1]


class TestBlowupTime:
    def test_exact_samples(self):
        t = 1.0 - np.geomspace(0.5, 1e-6, 40)
        tr = SimTrace(t, [homogeneous_exact(3.0, 1.0, s) for s in t])
        assert estimate_blowup_time(tr, 3.0) == pytest.approx(1.0, abs=1e-10)

    def test_scaling_covariance(self):
        t = 1.0 - np.geomspace(0.5, 1e-6, 40)
        lam = 3.0
        base = SimTrace(t, [homogeneous_exact(3.0, 1.0, s) for s in t])
        scaled = SimTrace(t / lam**2, [lam * homogeneous_exact(3.0, 1.0, s) for s in t])
        assert estimate_blowup_time(scaled, 3.0) == pytest.approx(estimate_blowup_time(base, 3.0) / lam**2,
                                                                   rel=1e-10)

    def test_rejects_short_or_decreasing(self):
        with pytest.raises(ValueError):
            estimate_blowup_time(SimTrace(np.arange(4.0), np.arange(1.0, 5.0)), 3.0)
        t = np.linspace(0, 1, 20)
        with pytest.raises(ValueError):
            estimate_blowup_time(SimTrace(t, 1.0 / (1.5 - t) * (1 + 0.3 * np.sin(20 * t))), 3.0)

    @pytest.mark.slow
    def test_grid_doubling(self, super_trace):
        # spatial error of T̂ between 2000 and 4000 nodes (observed 4.8e-5)
        fine = supercritical_run(num_nodes=4000)
        rel = abs(fine.blowup_time - super_trace.blowup_time) / fine.blowup_time
        assert rel <= 1e-4
