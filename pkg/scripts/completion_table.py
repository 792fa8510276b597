"""Completed coefficient matrix across the coupling range.

Prints a_SS from the det = 0 solve next to the literal closed form, the
eigenvalues and the dominant jump operator for both sine conventions.
"""

import warnings
from dataclasses import replace

import numpy as np

from squidlind.errors import GRangeWarning
from squidlind.lindblad import coefficient_matrix, exact_a_ss, extract_lindblads
from squidlind.model import DeviceInputs, derive_params

warnings.simplefilter("ignore", GRangeWarning)
for conv in ("force", "literal"):
    base = derive_params(DeviceInputs(), sine_convention=conv)
    print(f"\nsine convention: {conv} (K = {base.sine_amplitude:.5f})")
    print(f"{'g':>5} {'a_SS':>12} {'closed form':>12} {'rel diff':>9} {'cofactor':>12} "
          f"{'min eig':>10} {'|c_X|':>6} {'|c_P|':>6} {'|c_S|':>6}")
    for g in (0.227, 0.5, 1.0, 1.8, 3.0, 4.4, 5.0):
        p = replace(base, g=g)
        m = coefficient_matrix(p, complete=True)
        c = np.abs(extract_lindblads(m, require_completed=False).coeffs[0])
        print(f"{g:5.3f} {m.a_ss:12.6f} {m.closed_form_a_ss:12.6f} {m.closed_form_discrepancy:9.2e} "
              f"{exact_a_ss(g, p.xi, p.sine_amplitude):12.6f} {m.min_eigenvalue:10.2e} "
              f"{c[0]:6.3f} {c[1]:6.3f} {c[2]:6.3f}")
