"""Source-channel feasibility of DSBS(0.25) over a binary symmetric broadcast channel.

Sweeps the bandwidth ratio and prints the cut-set and CR-achievability verdicts.
"""
import warnings

from twrn_rd import (NoConvergence, binary_symmetric_broadcast, dsbs_source, jscc_cr_achievable,
                     jscc_cut_set_feasible)

warnings.simplefilter("ignore", NoConvergence)
s = dsbs_source(0.25)
d = 0.1
print(f"{'kappa':>6} {'cut-set':>12} {'achievable':>12}")
for kappa in (0.25, 0.5, 1.0, 2.0):
    bc = binary_symmetric_broadcast(0.1, 0.2, kappa)
    c = jscc_cut_set_feasible(s, bc, d, d)
    a = jscc_cr_achievable(s, bc, d, d)
    print(f"{kappa:6.2f} {c.status:>12} {a.status:>12}")
