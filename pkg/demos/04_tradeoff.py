"""
The error-error frontier for unbiased joint measurements
========================================================

Search unitary couplings to a four-level apparatus for models where both
pointers are unbiased, asking for ever smaller errors on sigma_x and
recording the best error on sigma_y.  The product stays above the
commutator bound and the N pointer has to stretch.
"""
from qmeasure import SIGMA_X, SIGMA_Y, tradeoff_search
from qmeasure.operators import KET_PLUS_Z

points = tradeoff_search(SIGMA_X, SIGMA_Y, KET_PLUS_Z, [2, 1, 0.5, 0.25],
                         seed=0, budget=1500, restarts=6)
print(f"{'target':>8} {'eps_A^2':>9} {'eps_B^2':>9} {'product':>9} {'||N||':>7}")
for p in points:
    if p.feasible:
        print(f"{p.target:8.3f} {p.eps_A_sq:9.4f} {p.eps_B_sq:9.4f} {p.product:9.4f} {p.pointer_N_norm:7.3f}")
    else:
        print(f"{p.target:8.3f}  no feasible model found")
print("commutator bound:", points[0].rhs_bound)

###############################################################################
# With this small budget the pointer norm can wobble between neighbouring
# levels; the library defaults (32 restarts, 3000 evaluations) smooth it out.
