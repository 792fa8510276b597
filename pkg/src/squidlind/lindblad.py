"""Coefficient matrix of the NRW master equation and its Lindblad completion.

The dissipator is written as a quadratic form over the operator basis
``(X, P, S)``::

    D[rho] = prefactor * sum_ij a_ij (A_i rho A_j - 1/2 {A_j A_i, rho})

With this index order the Born-Markov right-hand side regroups exactly into
``-i[H', rho] + D[rho]`` (see :func:`regrouped_hamiltonian`), and the
eigen-decomposition ``a = sum_k w_k v_k v_k^dag`` yields Lindblad operators
``L_k = sqrt(prefactor * w_k) * sum_i v_k[i] A_i``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateMinor, DimMismatch, GRangeWarning, NotCompleted
from .model import SquidParams, build_sine_operator, build_system_hamiltonian
from .operators import FockSpace, anticommutator, commutator, quadratures

G_MIN = 0.227
G_MAX = 4.40
BASIS = ("X", "P", "S")
RANK_CUTOFF = 1e-12


class Operators(NamedTuple):
    X: np.ndarray
    P: np.ndarray
    S: np.ndarray


def system_operators(p: SquidParams, space: FockSpace) -> Operators:
    X, P = quadratures(space)
    return Operators(X, P, build_sine_operator(p, space))


def g_range_check(g: float) -> str:
    return "inside" if G_MIN <= g <= G_MAX else "outside"


@dataclass(frozen=True)
class CoefficientMatrix:
    """3x3 Hermitian coefficient matrix over (X, P, S).

    ``entries`` are in units of ``prefactor`` (= gamma/omega0).
    """

    entries: np.ndarray
    prefactor: float
    g: float
    xi: float
    a_ss: float = 0.0
    completed: bool = False
    eigenvalues: np.ndarray = field(default=None)
    closed_form_a_ss: float | None = None

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.entries).real)

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def closed_form_discrepancy(self) -> float | None:
        """Relative gap between the literal closed form and the det=0 solve."""
        if self.closed_form_a_ss is None:
            return None
        scale = max(abs(self.a_ss), np.finfo(float).tiny)
        return abs(self.closed_form_a_ss - self.a_ss) / scale

    def rank(self, cutoff: float = RANK_CUTOFF) -> int:
        return int(np.sum(self.eigenvalues > cutoff * self.norm))


def raw_entries(g: float, xi: float, amplitude: float, a_ss: float = 0.0) -> np.ndarray:
    """Entries of the NRW coefficient matrix in units of gamma/omega0.

    ``amplitude`` multiplies every S row/column entry. The (X,S) entry is
    g*K*(1 + i xi), the Hermitian partner of (S,X) = g*K*(1 - i xi).
    """
    K = amplitude
    xp = -1j * (1 + g**2 - g) - xi * (1 - g**2)
    return np.array(
        [
            [2 * g + 1, xp, g * K * (1 + 1j * xi)],
            [np.conj(xp), 2 * g + g**2, g**2 * K * (xi + 1j)],
            [g * K * (1 - 1j * xi), g**2 * K * (xi - 1j), a_ss],
        ],
        dtype=complex,
    )


def closed_form_a_ss(g: float, xi: float, amplitude: float) -> float:
    """Reference closed form for a_SS, exact at xi = 0, scaled by ``amplitude**2``.

    Not exact: it differs from the det=0 root at O(xi^2).
    """
    num = -(xi**2) * g**5 + 4 * g**4 + 8 * xi**2 * g**3
    den = (-(g**4) + 2 * g**2 - 1) * (1 + xi**2) + 4 * g * (g**2 + 1)
    return amplitude**2 * num / den


def exact_a_ss(g: float, xi: float, amplitude: float) -> float:
    """Closed-form root of det(a) = 0, derived from the cofactor expansion.

    a_SS = (|a_XS|^2 a_PP + |a_PS|^2 a_XX - 2 Re(a_XP a_PS a_SX)) / M
    with M = a_XX a_PP - |a_XP|^2.
    """
    m = raw_entries(g, xi, amplitude)
    minor = (m[0, 0] * m[1, 1] - abs(m[0, 1]) ** 2).real
    num = abs(m[0, 2]) ** 2 * m[1, 1].real + abs(m[1, 2]) ** 2 * m[0, 0].real
    num -= 2 * (m[0, 1] * m[1, 2] * m[2, 0]).real
    return float(num / minor)


def solve_a_ss(entries: np.ndarray) -> float:
    """Return the a_SS that makes det(entries) vanish.

    det is affine in a_SS: det = a_SS * M + det(entries with a_SS = 0), where
    M is the (S,S) cofactor.
    """
    m = np.array(entries, dtype=complex)
    m[2, 2] = 0.0
    minor = np.linalg.det(m[:2, :2]).real
    block_scale = np.linalg.norm(m[:2, :2]) ** 2
    if abs(minor) <= 1e-12 * max(block_scale, 1.0):
        raise DegenerateMinor(f"(S,S) cofactor {minor:.3e} is numerically zero")
    return float(-np.linalg.det(m).real / minor)


def coefficient_matrix(p: SquidParams, complete: bool = False) -> CoefficientMatrix:
    """Build the (X, P, S) coefficient matrix, optionally completed to PSD.

    Completion touches only a_SS. Outside ``G_MIN <= g <= G_MAX`` a
    GRangeWarning is issued and the det=0 matrix is returned with
    ``completed=False`` when it is not PSD.
    """
    K = p.sine_amplitude
    entries = raw_entries(p.g, p.xi, K)
    a_ss = 0.0
    closed = None
    completed = False
    if complete:
        if g_range_check(p.g) == "outside":
            warnings.warn(
                f"g={p.g} outside [{G_MIN}, {G_MAX}]; minimal completion may not be PSD",
                GRangeWarning,
                stacklevel=2,
            )
        a_ss = solve_a_ss(entries)
        entries[2, 2] = a_ss
        closed = closed_form_a_ss(p.g, p.xi, K)
    eig = np.linalg.eigvalsh(entries)
    if complete:
        norm = np.linalg.norm(entries)
        det = abs(np.linalg.det(entries))
        completed = bool(eig[0] >= -1e-12 * norm and det <= 1e-10 * norm**3)
    return CoefficientMatrix(
        entries=entries,
        prefactor=p.gamma_ratio,
        g=p.g,
        xi=p.xi,
        a_ss=a_ss,
        completed=completed,
        eigenvalues=eig,
        closed_form_a_ss=closed,
    )


@dataclass(frozen=True)
class LindbladSet:
    """Jump operators as coefficient triples over (X, P, S).

    ``weights`` share the units of the coefficient matrix entries; the jump
    operators carry ``sqrt(prefactor * weight)``.
    """

    weights: np.ndarray
    coeffs: np.ndarray
    prefactor: float
    operators: list = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.weights)

    def reconstruct(self) -> np.ndarray:
        return (self.coeffs.T * self.weights) @ self.coeffs.conj()

    @property
    def items(self):
        return list(zip(self.weights, self.coeffs))

    def products(self) -> list:
        return [L.conj().T @ L for L in self.operators]


def extract_lindblads(m: CoefficientMatrix, ops: Sequence[np.ndarray] | None = None,
                      require_completed: bool = True) -> LindbladSet:
    """Diagonalise the coefficient matrix and keep eigenvalues > cutoff*||m||.

    With ``require_completed=False`` a non-PSD matrix is accepted and its
    negative part is dropped.
    """
    if require_completed and not m.completed:
        raise NotCompleted("coefficient matrix is not completed/PSD")
    vals, vecs = np.linalg.eigh(m.entries)
    keep = vals > RANK_CUTOFF * m.norm
    vals, vecs = vals[keep][::-1], vecs[:, keep][:, ::-1]
    coeffs = []
    for v in vecs.T:
        k = np.argmax(np.abs(v))
        v = v * np.exp(-1j * np.angle(v[k]))
        coeffs.append(v / np.linalg.norm(v))
    coeffs = np.array(coeffs, dtype=complex).reshape(-1, 3)
    operators = []
    if ops is not None:
        for w, c in zip(vals, coeffs):
            L = sum(ci * A for ci, A in zip(c, ops))
            operators.append(np.sqrt(m.prefactor * w) * L)
    return LindbladSet(np.asarray(vals, dtype=float), coeffs, m.prefactor, operators)


# -- right-hand sides -------------------------------------------------------

def _check_rho(rho, ref):
    if rho.shape != ref.shape:
        raise DimMismatch(f"rho has shape {rho.shape}, operators have {ref.shape}")


def bm_rhs(rho: np.ndarray, p: SquidParams, ops: Sequence[np.ndarray], H_S: np.ndarray) -> np.ndarray:
    """Born-Markov (NRW) right-hand side, Schroedinger picture.

    The quadratic X^2 and P^2 renormalisations are absent (cancelled by the
    Lamb shift); every remaining term is an outer commutator, so the trace
    of the output vanishes.
    """
    X, P, S = ops
    _check_rho(rho, X)
    g, xi, K = p.g, p.xi, p.sine_amplitude
    com, acom = commutator, anticommutator

    d = -1j * (1 + g**2 - g) * com(X, acom(P, rho))
    d -= 1j * g * (g - 0.5) * com(acom(X, P), rho)
    d -= (g + 0.5) * com(X, com(X, rho))
    d += xi * (1 - g**2) * com(X, com(P, rho))
    d -= g * (1 + g / 2) * com(P, com(P, rho))
    d += 1j * g * K * com(xi * X + g * P, acom(S, rho))
    d -= g * K * com(X + g * xi * P, com(S, rho))
    return -1j * com(H_S, rho) + p.gamma_ratio * d


def quadratic_dissipator(rho: np.ndarray, m: CoefficientMatrix | np.ndarray,
                         ops: Sequence[np.ndarray], prefactor: float | None = None) -> np.ndarray:
    """sum_ij a_ij (A_i rho A_j - 1/2 {A_j A_i, rho}), times the prefactor."""
    if isinstance(m, CoefficientMatrix):
        entries = m.entries
        prefactor = m.prefactor if prefactor is None else prefactor
    else:
        entries = np.asarray(m)
        prefactor = 1.0 if prefactor is None else prefactor
    _check_rho(rho, ops[0])
    out = np.zeros_like(rho, dtype=complex)
    left = [A @ rho for A in ops]
    for i, Ai in enumerate(ops):
        for j, Aj in enumerate(ops):
            a = entries[i, j]
            if a == 0:
                continue
            AjAi = Aj @ Ai
            out += a * (left[i] @ Aj - 0.5 * (AjAi @ rho + rho @ AjAi))
    return prefactor * out


def lindblad_rhs(rho: np.ndarray, H_eff: np.ndarray, L: LindbladSet | Sequence[np.ndarray]) -> np.ndarray:
    """-i[H', rho] + sum_j (L_j rho L_j^dag - 1/2 {L_j^dag L_j, rho})."""
    _check_rho(rho, H_eff)
    out = -1j * commutator(H_eff, rho)
    if isinstance(L, LindbladSet):
        jumps, products = L.operators, L.products()
    else:
        jumps = list(L)
        products = [A.conj().T @ A for A in jumps]
    for A, AdA in zip(jumps, products):
        out += A @ rho @ A.conj().T - 0.5 * (AdA @ rho + rho @ AdA)
    return out


def regrouped_hamiltonian(p: SquidParams, ops: Sequence[np.ndarray], H_S: np.ndarray) -> np.ndarray:
    """Effective Hamiltonian H' split off from :func:`bm_rhs`, exact on the truncated basis.

    Besides the anticommutator terms of :func:`squidlind.model.build_correction_terms`
    it keeps the commutator pieces i[X,P], i[X,S] and i[P,S] as matrices.
    On an untruncated basis these reduce to a constant, zero and
    s*cos(s X + 2 pi phi), so away from the basis edge this operator matches
    :func:`squidlind.model.effective_hamiltonian` up to a constant shift.
    """
    X, P, S = ops
    g, xi, K = p.g, p.xi, p.sine_amplitude
    com, acom = commutator, anticommutator
    extra = (1.5 * g**2 - g + 0.5) * acom(X, P)
    extra -= 0.5 * g * K * xi * acom(X, S)
    extra -= 0.5 * g**2 * K * acom(P, S)
    extra += 0.5j * xi * (1 - g**2) * com(X, P)
    extra -= 0.5j * g * K * com(X, S)
    extra -= 0.5j * g**2 * K * xi * com(P, S)
    H = H_S + p.gamma_ratio * extra
    return 0.5 * (H + H.conj().T)


@dataclass
class MasterEquation:
    """Operators and generators for one parameter point, ready for dynamics."""

    params: SquidParams
    space: FockSpace
    ops: Operators
    H_S: np.ndarray
    H_eff: np.ndarray
    coefficients: CoefficientMatrix
    lindblads: LindbladSet

    @classmethod
    def build(cls, p: SquidParams, space: FockSpace) -> "MasterEquation":
        ops = system_operators(p, space)
        H_S = build_system_hamiltonian(p, space)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GRangeWarning)
            m = coefficient_matrix(p, complete=True)
        L = extract_lindblads(m, ops, require_completed=False)
        return cls(p, space, ops, H_S, regrouped_hamiltonian(p, ops, H_S), m, L)

    def bm(self, rho):
        return bm_rhs(rho, self.params, self.ops, self.H_S)

    def lindblad(self, rho):
        return lindblad_rhs(rho, self.H_eff, self.lindblads)

    def completion_term(self, rho):
        S = self.ops.S
        S2 = S @ S
        return self.coefficients.prefactor * self.coefficients.a_ss * (S @ rho @ S - 0.5 * (S2 @ rho + rho @ S2))
