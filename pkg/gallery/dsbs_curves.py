"""DSBS curves: closed form next to the numerical CR rate-distortion function.

    python gallery/dsbs_curves.py [rho]
"""
import sys
import warnings

import numpy as np

from twrn_rd import NoConvergence, cr_rd, dsbs_cr_upper, dsbs_d_star, dsbs_rd, dsbs_source

rho = float(sys.argv[1]) if len(sys.argv) > 1 else 0.25
s = dsbs_source(rho)
ds = dsbs_d_star(rho)
print(f"DSBS({rho}): d* = {ds:.6f}")
print(f"{'d':>6} {'R(d)':>10} {'R_CR(d,d)':>10} {'upper':>10}")
warnings.simplefilter("ignore", NoConvergence)
for d in np.linspace(0.0, min(rho, 0.45), 10):
    up = dsbs_cr_upper(rho, d) if d > ds else float("nan")
    print(f"{d:6.3f} {dsbs_rd(rho, d):10.6f} {cr_rd(s, d, d).rate:10.6f} {up:10.6f}")
