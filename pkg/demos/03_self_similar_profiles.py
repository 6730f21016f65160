"""
Backward self-similar profiles
==============================

Radial solutions of U'' + ((n-1)/z - z/2) U' - U/(p-1) + |U|^{p-1} U = 0 with
U'(0) = 0.  For n = 3, p = 7 there are nonconstant profiles that decay like
z^{-2/(p-1)}; the partial integrals of |U|^{q_c} then grow like log Z, so these
profiles are not in L^{q_c}.
"""
import numpy as np

from blowup_lab import make_params
from blowup_lab.profile import find_decaying_profiles, qc_integral_growth, shoot

P = make_params(3, 7)

# most starting values leave the neighbourhood of kappa quickly
for a in (0.5, 1.0, P.kappa, 2.0, 4.0):
    s = shoot(a, P)
    print("U(0) = %.4f: %s" % (a, s.classification))

# decaying profiles by matching an inner shot to the algebraic tail at z = 3
found = find_decaying_profiles(P)
for s in found:
    g = qc_integral_growth(s, np.geomspace(4.0, 40.0, 25))
    print("U(0) = %.8f  tail exponent %.4f (expected %.4f)  log slope %.4f  R^2 %.6f"
          % (s.a, s.tail_exponent, 2 / (P.p - 1), g.log_slope, g.r_squared))
    print("   U at z = 1, 5, 20, 40:", np.round(s(np.array([1.0, 5.0, 20.0, 40.0])), 5))
