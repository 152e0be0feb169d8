"""Bound ladder R_L <= R_U** <= R_U* <= R_U on a source file.

    python gallery/bound_ladder.py gallery/data/dsbs25.json 0.1 0.15
"""
import sys
import warnings

from twrn_rd import NoConvergence, bound_bundle
from twrn_rd.io import load_source

path = sys.argv[1] if len(sys.argv) > 1 else "gallery/data/dsbs25.json"
d1 = float(sys.argv[2]) if len(sys.argv) > 2 else 0.1
d2 = float(sys.argv[3]) if len(sys.argv) > 3 else 0.15
warnings.simplefilter("ignore", NoConvergence)
b = bound_bundle(load_source(path), d1, d2)
for name in ("r_l", "r_cr", "r_u_dstar", "r_u_star", "r_u"):
    v = getattr(b, name)
    print(f"{name:>10} = {v:.6f}" if v is not None else f"{name:>10} = n/a")
print(f"ordering ok: {b.ordering_ok}")
