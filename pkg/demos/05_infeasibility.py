"""
Why a bounded pointer cannot be both precise and unbiased
=========================================================

Keep both pointers unbiased and cap the norm of the sigma_y pointer.  The
smallest error on sigma_x that the optimizer finds stays above
|<[A,B]>| / (2 cap), so precision is only approached as the cap grows.
"""
from qmeasure import SIGMA_X, SIGMA_Y, infeasibility_sweep
from qmeasure.operators import KET_PLUS_Z

for r in infeasibility_sweep(SIGMA_X, SIGMA_Y, KET_PLUS_Z, [5, 10, 20, 40], budget=1500, restarts=4):
    print(f"cap={r.cap:5.1f}  best eps(A)={r.residual:.4f}  floor={r.floor:.4f}")
