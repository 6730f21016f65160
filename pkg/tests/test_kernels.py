import math

import numpy as np
import pytest
from scipy.special import erf

from blowup_lab.kernels import (DEFAULT_C_EXP, bound_lattice, gaussian_kernel, halfspace_kernel, halfspace_mass,
                                kernel_bound_check, semigroup_defect, wholespace_kernel)

J1_ORACLE_N3 = 0.0136156369573088176   # (4π)^{-3/2} e^{-1/2}


def test_vanishes_on_wall():
    k = halfspace_kernel([0.3, 0.1, 0.5], [0.2, -0.4, 0.0], 0.3)
    assert k.G[0] == pytest.approx(0.0, abs=1e-300)


def test_far_from_wall_on_diagonal():
    # x = y at height h: (4πt)^{-3/2} (1 - e^{-h²/t})
    t, h = 0.5, 1.2
    k = halfspace_kernel([0.0, 0.0, h], [0.0, 0.0, h], t)
    assert k.G[0] == pytest.approx((4 * math.pi * t) ** -1.5 * (1 - math.exp(-h * h / t)), rel=1e-14)


@pytest.mark.parametrize("xn,t", [(0.3, 0.1), (0.05, 1.0), (2.0, 0.5)])
def test_halfspace_mass(xn, t):
    m = halfspace_mass([0.0, 0.0, xn], t)
    assert m == pytest.approx(erf(xn / (2 * math.sqrt(t))), rel=1e-10)
    assert m <= 1.0


def test_mass_defect_example():
    # mass lost through the wall: erfc(x_n / (2√t))
    assert 1.0 - halfspace_mass([0.0, 0.0, 0.3], 0.1) == pytest.approx(0.50233495436, rel=1e-10)


def test_halfspace_below_wholespace_and_positive():
    s = bound_lattice(3, "halfspace")
    w = wholespace_kernel(s.x, s.y, s.t)
    assert np.all(s.G >= -1e-300)
    assert np.all(s.G <= w.G)


def test_symmetry():
    rng = np.random.default_rng(1)
    x = rng.uniform(0, 2, (50, 3))
    y = rng.uniform(0, 2, (50, 3))
    t = rng.uniform(0.05, 1.0, 50)
    assert np.allclose(halfspace_kernel(x, y, t).G, halfspace_kernel(y, x, t).G, rtol=1e-14, atol=0)


def test_derivatives_match_finite_differences():
    x = np.array([0.3, -0.1, 0.6])
    y = np.array([0.1, 0.2, 0.4])
    t, h = 0.2, 1e-5
    k = halfspace_kernel(x, y, t)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        kp, km = halfspace_kernel(x + e, y, t), halfspace_kernel(x - e, y, t)
        assert (kp.G[0] - km.G[0]) / (2 * h) == pytest.approx(k.grad[0, i], rel=1e-7)
        assert (kp.grad[0] - km.grad[0]) / (2 * h) == pytest.approx(k.hess[0, i], rel=1e-6)


def test_gaussian_kernel_normalised():
    # 1-d Riemann sum of Γ over a wide interval
    z = np.linspace(-20, 20, 40001)[:, None]
    g, _, _ = gaussian_kernel(z, np.full(z.shape[0], 1.0))
    assert np.sum(g) * (z[1, 0] - z[0, 0]) == pytest.approx(1.0, rel=1e-10)


def test_rejects_nonpositive_t():
    with pytest.raises(ValueError):
        halfspace_kernel([0, 0, 1], [0, 0, 1], 0.0)
    with pytest.raises(ValueError):
        halfspace_kernel([0, 0, -1], [0, 0, 1], 1.0)


class TestBounds:
    def test_j0_every_sample_is_the_constant(self):
        s = bound_lattice(3, "wholespace")
        d = s.x - s.y
        ratio = s.G * s.t**1.5 * np.exp(np.sum(d * d, axis=1) / (4 * s.t))
        assert np.allclose(ratio, (4 * math.pi) ** -1.5, rtol=1e-12)
        assert kernel_bound_check(0, s, 4.0) == pytest.approx((4 * math.pi) ** -1.5, rel=1e-12)

    def test_j1_oracle(self):
        assert kernel_bound_check(1, bound_lattice(3, "wholespace"), 8.0) == pytest.approx(J1_ORACLE_N3, rel=1e-4)

    @pytest.mark.parametrize("n", [3, 4])
    def test_j2_stable_under_refinement(self, n):
        a = kernel_bound_check(2, bound_lattice(n, "halfspace"), DEFAULT_C_EXP[2])
        b = kernel_bound_check(2, bound_lattice(n, "halfspace", num_t=17, num_s=481, num_dir=16), DEFAULT_C_EXP[2])
        assert b == pytest.approx(a, rel=1e-2)

    @pytest.mark.parametrize("j", [0, 1, 2])
    def test_halfspace_ratios_finite(self, j):
        r = kernel_bound_check(j, bound_lattice(3, "halfspace"), DEFAULT_C_EXP[j])
        assert 0 < r < math.inf

    def test_wider_gaussian_helps(self):
        s = bound_lattice(3, "halfspace")
        assert kernel_bound_check(1, s, 16.0) <= kernel_bound_check(1, s, 8.0)

    def test_rejects_small_C(self):
        with pytest.raises(ValueError):
            kernel_bound_check(0, bound_lattice(3, "wholespace"), 3.0)
        with pytest.raises(ValueError):
            kernel_bound_check(3, bound_lattice(3, "wholespace"))


class TestSemigroup:
    @pytest.mark.parametrize("x,y,t", [
        ([0.3, -0.2, 0.5], [0.1, 0.4, 0.7], 0.5),
        ([0.0, 0.0, 0.2], [0.1, 0.0, 0.05], 0.01),
        ([1.0, 0.5, 1.5], [0.5, 0.0, 1.0], 1.0),
        ([0.2, 0.1, 0.0, 0.4], [0.0, 0.3, 0.1, 0.2], 0.3),
    ])
    def test_identity(self, x, y, t):
        assert semigroup_defect(x, y, t) <= 1e-6

    def test_underflow_reported(self):
        with pytest.raises(ValueError):
            semigroup_defect([0.0, 0.0, 1.0], [100.0, 0.0, 1.0], 1e-3)
