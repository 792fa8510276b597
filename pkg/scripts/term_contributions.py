"""Lowest eigenvalue of H_S plus each combination of bath-induced terms.

    python scripts/term_contributions.py [--dim 128] [--convention force]
"""

import argparse

from squidlind.model import DeviceInputs
from squidlind.operators import FockSpace
from squidlind.spectroscopy import non_additivity, spiderweb

ap = argparse.ArgumentParser()
ap.add_argument("--dim", type=int, default=128)
ap.add_argument("--pad", type=int, default=32)
ap.add_argument("--convention", default="force", choices=("force", "literal"))
args = ap.parse_args()

rows = spiderweb(DeviceInputs(phi=0.5, g=1.8), FockSpace(args.dim, args.pad), sine_convention=args.convention)
print(f"{'terms':<10} {'E0':>8} {'chart':>6} {'dev':>7}")
for r in rows:
    print(f"{r.label:<10} {r.energy:8.4f} {r.reference:6.1f} {r.deviation:+7.3f}")
print("\npairwise non-additivity (hbar omega0):")
for k, v in non_additivity(rows).items():
    print(f"  {k:<6} {v:+.4f}")
