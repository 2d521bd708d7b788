"""
Randomized audit of the universally valid relations
====================================================

Random system and apparatus dimensions, random couplings, random commuting
pointers and Haar states.  Every universal relation must hold in every
trial; the margin histogram shows how close the random models come.
"""
from qmeasure import CATALOG, universality_audit
from qmeasure.audit import HISTOGRAM_EDGES

res = universality_audit(500, seed=1)
print(f"{res.trials} trials, {len(res.violations)} violations")

###############################################################################
# Margins are ``lhs - rhs``.  Conditional relations land in the negative bins
# whenever a random pointer happens to be biased.

edges = [f"{e:g}" for e in HISTOGRAM_EDGES]
print("bins:", " | ".join(f"[{a},{b})" for a, b in zip(edges, edges[1:])))
for name in CATALOG:
    print(f"{name:40s} {res.histogram(name).tolist()}")
