"""SQUID device parameters and Hamiltonian assembly.

All energies are in units of hbar*omega0 and all operators live on a
truncated Fock basis (see :mod:`squidlind.operators`). Products entering a
Hamiltonian are formed on the padded basis and compressed afterwards.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from .errors import InvalidDevice
from .operators import FockSpace, anticommutator, position_trig, quadratures

TERMS = ("XP", "XS", "PS")
SINE_CONVENTIONS = ("force", "literal")


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.054571817e-34
    flux_quantum: float = 2.067833848e-15


CODATA = PhysicalConstants()


@dataclass(frozen=True)
class DeviceInputs:
    """SI device constants plus dimensionless bath and control settings.

    Defaults are the reference device used throughout the package:
    hbar*nu = 6.693e-22 J, C = 5 fF, L = 0.3 nH, gamma = 0.05 omega0,
    Omega = 10 omega0, g = 1.8, Phi_x = Phi_0 / 2.
    """

    josephson_energy: float = 6.693e-22
    capacitance: float = 5e-15
    inductance: float = 3e-10
    gamma_ratio: float = 0.05
    cutoff_ratio: float = 10.0
    g: float = 1.8
    phi: float = 0.5

    def validate(self):
        if not self.capacitance > 0:
            raise InvalidDevice("capacitance must be > 0")
        if not self.inductance > 0:
            raise InvalidDevice("inductance must be > 0")
        if not self.josephson_energy >= 0:
            raise InvalidDevice("josephson_energy must be >= 0")
        if not self.gamma_ratio >= 0:
            raise InvalidDevice("gamma_ratio must be >= 0")
        if not self.cutoff_ratio > 0:
            raise InvalidDevice("cutoff_ratio must be > 0")
        return self


@dataclass(frozen=True)
class SquidParams:
    """Dimensionless model parameters.

    ``s`` scales X inside the Josephson cosine, so that ``s*X`` is the
    superconducting phase 2*pi*Phi/Phi0. ``sine_amplitude`` K weights
    sin(s X + 2 pi phi) wherever it enters the bath-induced terms. With the
    default ``sine_convention="force"`` K = nu_ratio * s, the
    Heisenberg-picture force of the Josephson term,
    dP/dt = -X - nu_ratio*s*sin(s*X + 2*pi*phi). ``"literal"`` uses K = s.
    """

    omega0: float
    nu_ratio: float
    s: float
    xi: float
    gamma_ratio: float
    g: float
    phi: float
    chi_scale: float
    inductance: float = field(default=1.0, repr=False)
    sine_convention: str = "force"

    def __post_init__(self):
        if self.sine_convention not in SINE_CONVENTIONS:
            raise ValueError(f"sine_convention must be one of {SINE_CONVENTIONS}")

    @property
    def sine_amplitude(self) -> float:
        if self.sine_convention == "literal":
            return self.s
        return self.nu_ratio * self.s

    @property
    def beta_nu_ratio(self) -> float:
        return self.s**2

    @property
    def phase(self) -> float:
        return 2 * np.pi * self.phi

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sine_amplitude"] = self.sine_amplitude
        return d


def derive_params(inputs: DeviceInputs | None = None, constants: PhysicalConstants = CODATA,
                  sine_convention: str = "force") -> SquidParams:
    inputs = (inputs or DeviceInputs()).validate()
    hbar, phi0 = constants.hbar, constants.flux_quantum
    C, L = inputs.capacitance, inputs.inductance

    omega0 = 1.0 / np.sqrt(L * C)
    nu_ratio = inputs.josephson_energy / (hbar * omega0)
    beta_nu = 4 * np.pi**2 * hbar / (phi0**2 * C)
    s = np.sqrt(beta_nu / omega0)
    chi_scale = L * hbar * omega0 / phi0**2

    # L*omega0 == 1/(C*omega0): both routes to s must agree
    if not np.isclose(s**2, 4 * np.pi**2 * chi_scale, rtol=1e-12, atol=0):
        raise InvalidDevice("inconsistent derived parameters: s^2 != 4 pi^2 chi_scale")

    return SquidParams(
        omega0=float(omega0),
        nu_ratio=float(nu_ratio),
        s=float(s),
        xi=1.0 / (2.0 * inputs.cutoff_ratio),
        gamma_ratio=float(inputs.gamma_ratio),
        g=float(inputs.g),
        phi=float(inputs.phi),
        chi_scale=float(chi_scale),
        inductance=float(L),
        sine_convention=sine_convention,
    )


# -- coefficients of the effective-Hamiltonian terms (units of hbar*omega0) --

def squeezing_coefficient(p: SquidParams) -> float:
    """Weight of {X, P}."""
    return p.gamma_ratio * (1.5 * p.g**2 - p.g + 0.5)


def xs_coefficient(p: SquidParams) -> float:
    """Weight of {X, S}; equals -(gamma g / 2 Omega) K * (1/2)."""
    return -0.5 * p.gamma_ratio * p.g * p.xi * p.sine_amplitude


def ps_coefficient(p: SquidParams) -> float:
    """Weight of {P, S}."""
    return -0.5 * p.gamma_ratio * p.g**2 * p.sine_amplitude


def josephson_renormalization(p: SquidParams) -> float:
    """Weight of cos(s X + 2 pi phi) contributed by the P-S coupling.

    Arises from i[P, S] = s cos(s X + 2 pi phi); the bare ``beta`` of the
    literal coefficient gamma g^2 beta / 4 Omega is read as
    ``nu_ratio * s**2`` (the same K*s product), see README.
    """
    return -0.5 * p.gamma_ratio * p.g**2 * p.xi * p.sine_amplitude * p.s


def _normalize_include(include: Iterable[str] | None) -> tuple[str, ...]:
    if include is None:
        return ()
    if isinstance(include, str):
        include = [t for t in include.replace("+", ",").split(",") if t.strip()]
    out = []
    for term in include:
        term = term.strip().upper()
        if term not in TERMS:
            raise ValueError(f"unknown correction term {term!r}; expected one of {TERMS}")
        if term not in out:
            out.append(term)
    return tuple(t for t in TERMS if t in out)


def build_cosine_operator(p: SquidParams, space: FockSpace) -> np.ndarray:
    return position_trig(space, p.s, p.phase, "cos")


def build_sine_operator(p: SquidParams, space: FockSpace) -> np.ndarray:
    return position_trig(space, p.s, p.phase, "sin")


def build_system_hamiltonian(p: SquidParams, space: FockSpace) -> np.ndarray:
    """X^2/2 + P^2/2 - nu_ratio*cos(s X + 2 pi phi).

    The Lamb-shift Hamiltonian is not added: it only cancels the two
    quadratic renormalisation terms of the Born-Markov equation.
    """
    big = space.padded()
    X, P = quadratures(big)
    kinetic = space.compress(X @ X + P @ P) / 2
    H = kinetic - p.nu_ratio * build_cosine_operator(p, space)
    return 0.5 * (H + H.conj().T)


def build_correction_terms(p: SquidParams, space: FockSpace) -> dict[str, np.ndarray]:
    """Bath-induced Hamiltonian terms ``{"XP", "XS", "PS"}``.

    H_XS uses the symmetrised product (X S + S X)/2 so that it is Hermitian.
    """
    big = space.padded()
    X, P = quadratures(big)
    S = position_trig(big, p.s, p.phase, "sin")
    C = position_trig(big, p.s, p.phase, "cos")

    terms = {
        "XP": squeezing_coefficient(p) * anticommutator(X, P),
        "XS": xs_coefficient(p) * anticommutator(X, S),
        "PS": ps_coefficient(p) * anticommutator(P, S) + josephson_renormalization(p) * C,
    }
    out = {}
    for name, op in terms.items():
        op = space.compress(op)
        out[name] = 0.5 * (op + op.conj().T)
    return out


def effective_hamiltonian(p: SquidParams, space: FockSpace, include=TERMS) -> np.ndarray:
    """H_S plus the selected correction terms; ``include=TERMS`` gives H'."""
    include = _normalize_include(include)
    H = build_system_hamiltonian(p, space)
    if not include:
        return H
    corrections = build_correction_terms(p, space)
    for name in include:
        H = H + corrections[name]
    return H
