"""Open-system model of a capacitively and inductively damped SQUID.

Hamiltonian assembly on a truncated Fock basis, Born-Markov and completed
Lindblad master equations, RK4 dynamics and flux/coupling spectroscopy.
"""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    DeviceInputs,
    PhysicalConstants,
    SquidParams,
    build_correction_terms,
    build_sine_operator,
    build_system_hamiltonian,
    derive_params,
    effective_hamiltonian,
)
from .operators import FockSpace  # noqa: E402

__all__ = [
    "DeviceInputs",
    "FockSpace",
    "PhysicalConstants",
    "SquidParams",
    "build_correction_terms",
    "build_sine_operator",
    "build_system_hamiltonian",
    "derive_params",
    "effective_hamiltonian",
]
