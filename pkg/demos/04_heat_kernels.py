"""
Heat kernel bounds on the half-space
====================================

The Dirichlet heat kernel of {x_n > 0} is the difference of two Gaussians.
Its derivatives obey |D^j G| <= C t^{-n/2-j/2} exp(-|x-y|²/(C' t)); we measure
the best constant on a lattice of (x, y, t).
"""
import math

from blowup_lab.kernels import DEFAULT_C_EXP, bound_lattice, halfspace_mass, kernel_bound_check, semigroup_defect

n = 3
whole = bound_lattice(n, "wholespace")
half = bound_lattice(n, "halfspace")
for j in (0, 1, 2):
    C = DEFAULT_C_EXP[j]
    print("j=%d C'=%g  whole space %.6e  half space %.6e"
          % (j, C, kernel_bound_check(j, whole, C), kernel_bound_check(j, half, C)))
print("calculus values: %.6e, %.6e" % ((4 * math.pi) ** -1.5, (4 * math.pi) ** -1.5 * math.exp(-0.5)))

# heat leaks out through the wall
for xn in (0.05, 0.3, 1.0):
    print("mass left at x_n = %.2f, t = 0.1: %.6f" % (xn, halfspace_mass([0, 0, xn], 0.1)))

print("semigroup defect:", semigroup_defect([0.3, -0.2, 0.5], [0.1, 0.4, 0.7], 0.5))
