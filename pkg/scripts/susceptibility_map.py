"""Ground-state susceptibility over (phi, g), with the perturbative cross-check.

    python scripts/susceptibility_map.py out/chi.csv [--points 41] [--threads 4]
"""

import argparse
import warnings
from dataclasses import replace

import numpy as np

from squidlind.model import derive_params
from squidlind.operators import FockSpace
from squidlind.spectroscopy import DEFAULT_G, ground_curvature, susceptibility

ap = argparse.ArgumentParser()
ap.add_argument("out")
ap.add_argument("--points", type=int, default=41)
ap.add_argument("--threads", type=int, default=1)
args = ap.parse_args()

phis = np.linspace(0, 1, args.points)
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    res = susceptibility(None, phis, DEFAULT_G, threads=args.threads)
res.to_csv(args.out)
for w in caught:
    print("warning:", w.message)
print("flagged:", res.flagged)

p = derive_params()
space = FockSpace(128, 32)
chi = res.grid()
print(f"\n{'phi':>6} {'g':>5} {'chi0 (FD)':>14} {'chi0 (pert.)':>14}")
for i in (0, args.points // 4, args.points // 2):
    for j, g in enumerate(DEFAULT_G):
        pert = -p.chi_scale * ground_curvature(replace(p, phi=phis[i], g=g), space)
        print(f"{phis[i]:6.3f} {g:5.2f} {chi[i, j]:14.6g} {pert:14.6g}")
