"""
The spatially constant solution
===============================

The constant solution kappa (T - t)^{-1/(p-1)} blows up everywhere at once.  It
is the simplest check of the solver and the rate fit: both T and the exponent
-1/(p-1) are known exactly.
"""
import math

import numpy as np

from blowup_lab import RadialGrid, SimConfig, make_params, run_to_blowup
from blowup_lab.solver import homogeneous_data
from blowup_lab.norms import NormTrace, rate_fit

# p = 3 in three dimensions, data chosen to blow up at T = 1
P = make_params(3, 3)
grid = RadialGrid.graded(20.0, 200, 3, gamma=2.0)
trace = run_to_blowup(SimConfig(P, grid, homogeneous_data(grid, P.p, 1.0)))
print("stopped on", trace.stop_reason, "after", trace.times.size - 1, "steps")
print("estimated blow-up time", trace.blowup_time)

# sup norm against T - t on log-log axes, last two decades
fit = rate_fit(NormTrace(math.inf, None, trace.times, trace.linf), trace.blowup_time)
print("rate exponent %.6f (exact %.6f)" % (fit.slope, -1 / (P.p - 1)))
print("95% interval", fit.confidence_interval())

# the far wall is pinned to zero, so the centre only feels it through diffusion
s = trace.blowup_time - trace.times[-1]
print("u(0) / exact at the last step:", trace.linf[-1] / (P.kappa * s ** -0.5))
