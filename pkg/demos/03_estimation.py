"""
From measurement statistics to an estimate of <sigma_x>
=======================================================

Repeat the spin measurement n times and average the readings.  When the
pointer is unbiased, the scaled variance of that average exceeds the
intrinsic spread by exactly the squared measurement error.
"""
import numpy as np

from qmeasure import estimation_error, estimator_statistics, run_from_context, spin_context
from qmeasure.operators import KET_PLUS_X

for n in (10, 1_000, 100_000):
    stats = estimator_statistics(run_from_context(spin_context(0.0), n, seed=7))
    print(f"n={n:>7d}  mean={stats.empirical_mean:+.5f}  n*Var={stats.empirical_scaled_var:.5f}"
          f"  (exact {stats.analytic_mean:+.1f}, {stats.analytic_scaled_var:.1f})")

print("estimation error at phi=0:", estimation_error(spin_context(0.0)))

###############################################################################
# A detuned pointer is biased, so its average converges to the wrong value.
# On |+x> the target is <sigma_x> = 1 but the readings average cos(pi/4).

ctx = spin_context(np.pi / 4, KET_PLUS_X)
stats = estimator_statistics(run_from_context(ctx, 100_000, seed=7))
print(f"phi=pi/4 on |+x>: mean {stats.empirical_mean:+.4f}, but <sigma_x> = 1")
