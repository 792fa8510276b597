"""Truncated Fock-space operator algebra.

Operators are plain ``numpy`` complex arrays of shape ``(N, N)``. Matrix
functions are evaluated by spectral calculus, optionally on a padded basis
of ``N + pad`` levels whose result is then compressed back to ``N x N``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimMismatch, NoConvergence, NotHermitian

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class FockSpace:
    dim: int
    pad: int = 0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"dim must be an integer >= 2, got {self.dim}")
        if int(self.pad) != self.pad or self.pad < 0:
            raise ValueError(f"pad must be a nonnegative integer, got {self.pad}")

    @classmethod
    def with_default_pad(cls, dim: int) -> "FockSpace":
        return cls(dim, dim // 4)

    @property
    def total(self) -> int:
        return self.dim + self.pad

    def padded(self) -> "FockSpace":
        return FockSpace(self.total, 0)

    def compress(self, op: np.ndarray) -> np.ndarray:
        """Top-left ``dim x dim`` block of an operator on the padded space."""
        return np.ascontiguousarray(op[: self.dim, : self.dim])


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self, f=None) -> np.ndarray:
        vals = self.values if f is None else f(self.values)
        return (self.vectors * vals) @ self.vectors.conj().T


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.linalg.norm(m - m.conj().T))


def is_hermitian(m: np.ndarray, rtol: float = 1e-12) -> bool:
    return hermiticity_defect(m) <= rtol * max(1.0, float(np.linalg.norm(m)))


def annihilator(space: FockSpace | int) -> np.ndarray:
    n = space.dim if isinstance(space, FockSpace) else int(space)
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def quadratures(space: FockSpace | int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(X, P)`` with X = (a + a^dag)/sqrt2, P = i(a^dag - a)/sqrt2."""
    a = annihilator(space)
    ad = a.conj().T
    X = (a + ad) / np.sqrt(2)
    P = 1j * (ad - a) / np.sqrt(2)
    return X, P


def number_operator(space: FockSpace | int) -> np.ndarray:
    n = space.dim if isinstance(space, FockSpace) else int(space)
    return np.diag(np.arange(n, dtype=float)).astype(complex)


def parity_operator(space: FockSpace | int) -> np.ndarray:
    n = space.dim if isinstance(space, FockSpace) else int(space)
    return np.diag((-1.0) ** np.arange(n)).astype(complex)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_dims(a, b)
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_dims(a, b)
    return a @ b + b @ a


def _check_dims(a, b):
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimMismatch(f"incompatible operator shapes {a.shape} and {b.shape}")


def hermitian_eig(m: np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises NotHermitian when ``||M - M^dag||_F > 1e-10 ||M||_F``.
    """
    m = np.asarray(m)
    norm = float(np.linalg.norm(m))
    if hermiticity_defect(m) > HERMITIAN_TOL * max(norm, np.finfo(float).tiny):
        raise NotHermitian(
            f"hermiticity defect {hermiticity_defect(m):.3e} exceeds tolerance"
        )
    try:
        values, vectors = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return EigenDecomposition(values, vectors)


def eigvalsh(m: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


@lru_cache(maxsize=16)
def _position_eig(dim: int) -> EigenDecomposition:
    X, _ = quadratures(dim)
    eig = hermitian_eig(X)
    eig.values.setflags(write=False)
    eig.vectors.setflags(write=False)
    return eig


def operator_trig(a, scale: float, phase: float, kind: str) -> np.ndarray:
    """``sin`` or ``cos`` of ``scale*A + phase*I`` by spectral calculus."""
    funcs = {"sin": np.sin, "cos": np.cos}
    if kind not in funcs:
        raise ValueError(f"kind must be 'sin' or 'cos', got {kind!r}")
    eig = hermitian_eig(a) if not isinstance(a, EigenDecomposition) else a
    out = eig.reconstruct(lambda lam: funcs[kind](scale * lam + phase))
    return 0.5 * (out + out.conj().T)


def position_trig(space: FockSpace, scale: float, phase: float, kind: str) -> np.ndarray:
    """``f(scale*X + phase)`` evaluated on the padded space and compressed.

    The eigendecomposition of X on ``space.total`` levels is cached, so flux
    sweeps only pay for the reconstruction.
    """
    eig = _position_eig(space.total)
    return space.compress(operator_trig(eig, scale, phase, kind))
