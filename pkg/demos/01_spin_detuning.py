"""
Spin detuning: error, disturbance and which inequalities survive
=================================================================

A qubit prepared in |+z> is coupled to a two-level pointer that reads out
the spin along a direction detuned by an angle phi from x.  We want to
estimate sigma_x while learning how much sigma_y gets disturbed.
"""
import numpy as np

from qmeasure import disturbance_eta, error_epsilon, evaluate_all, spin_context

###############################################################################
# The error grows with the detuning while the disturbance of sigma_y shrinks.

for phi in np.linspace(0, np.pi / 2, 7):
    ctx = spin_context(phi)
    print(f"phi={phi:5.3f}  eps(A)={error_epsilon(ctx):.4f}  eta(B)={disturbance_eta(ctx):.4f}")

###############################################################################
# Evaluate the whole catalog at one interior angle.  Relations that need
# unbiased pointers fail here, and each report carries the defects that
# explain why.

print()
for r in evaluate_all(spin_context(np.pi / 6)):
    tag = "holds" if r.holds else "FAILS"
    defects = ", ".join(f"{a}={d:.3f}" for a, d in zip(r.assumptions, r.assumption_defects))
    print(f"{r.name:40s} {tag:5s} lhs={r.lhs:7.4f} rhs={r.rhs:7.4f}  [{defects}]")
