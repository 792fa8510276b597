"""Lowest levels against external flux for several couplings; writes CSV.

    python scripts/flux_spectrum.py out/flux_spectrum.csv [--points 101] [--threads 4]
"""

import argparse
import time

import numpy as np

from squidlind.operators import FockSpace
from squidlind.spectroscopy import DEFAULT_G, SweepSpec, spectrum_sweep

ap = argparse.ArgumentParser()
ap.add_argument("out")
ap.add_argument("--points", type=int, default=101)
ap.add_argument("--levels", type=int, default=5)
ap.add_argument("--threads", type=int, default=1)
ap.add_argument("--include", default="XP+XS+PS", help="terms added to H_S, or 'none'")
args = ap.parse_args()

include = () if args.include == "none" else args.include
spec = SweepSpec(np.linspace(0, 1, args.points), DEFAULT_G, args.levels, include, FockSpace(128, 32))
t0 = time.perf_counter()
res = spectrum_sweep(spec, threads=args.threads)
res.to_csv(args.out)
e = res.energies()
print(f"{len(res.rows)} rows in {time.perf_counter() - t0:.1f}s -> {args.out}")
for j, g in enumerate(DEFAULT_G):
    print(f"g={g}: E0 in [{e[:, j, 0].min():.3f}, {e[:, j, 0].max():.3f}], "
          f"E1-E0 at phi=1/2: {e[args.points // 2, j, 1] - e[args.points // 2, j, 0]:.3e}")
