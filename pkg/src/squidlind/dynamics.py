"""Fixed-step RK4 evolution of density matrices with invariant monitors."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .errors import Diverged, OutOfBasis, StabilityWarning
from .lindblad import MasterEquation
from .model import SquidParams
from .operators import FockSpace, hermitian_eig, number_operator

Rhs = Callable[[np.ndarray], np.ndarray]

TRACE_WARN = 1e-6
DIVERGENCE_NORM = 10.0


def check_density_matrix(rho: np.ndarray, min_eig: float = -1e-8) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    if abs(np.trace(rho) - 1) > 1e-10:
        raise ValueError(f"trace {np.trace(rho).real:.12f} != 1")
    if np.linalg.norm(rho - rho.conj().T) > 1e-12:
        raise ValueError("density matrix is not Hermitian")
    if np.linalg.eigvalsh(rho)[0] < min_eig:
        raise ValueError("density matrix has negative eigenvalues")
    return rho


def _check_in_basis(psi: np.ndarray):
    n = len(psi)
    top = max(1, int(np.ceil(0.1 * n)))
    weight = float(np.sum(np.abs(psi[-top:]) ** 2))
    if weight > 1e-6:
        raise OutOfBasis(f"state puts weight {weight:.2e} in the top {top} of {n} levels")


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    psi = np.zeros(dim, dtype=complex)
    if alpha == 0:
        psi[0] = 1.0
        return psi
    n = np.arange(dim)
    log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag + 1j * n * np.angle(alpha))


def initial_state(kind: str, space: FockSpace | int | None = None, *, H: np.ndarray | None = None,
                  n: int = 0, alpha: complex = 0.0) -> np.ndarray:
    """Pure-state density matrix: ``"ground"`` of ``H``, ``"fock"`` or ``"coherent"``."""
    if kind == "ground":
        if H is None:
            raise ValueError("ground state needs a Hamiltonian")
        psi = hermitian_eig(H).vectors[:, 0]
    else:
        if space is None:
            if H is None:
                raise ValueError("need a space or a Hamiltonian to size the state")
            dim = H.shape[0]
        else:
            dim = space.dim if isinstance(space, FockSpace) else int(space)
        if kind == "fock":
            if not 0 <= n < dim:
                raise OutOfBasis(f"fock level {n} outside basis of size {dim}")
            psi = np.zeros(dim, dtype=complex)
            psi[n] = 1.0
        elif kind == "coherent":
            psi = coherent_amplitudes(alpha, dim)
        else:
            raise ValueError(f"unknown initial state kind {kind!r}")
    _check_in_basis(psi)
    psi = psi / np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    return 0.5 * (rho + rho.conj().T)


def rk4_step(rhs: Rhs, rho: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(rho)
    k2 = rhs(rho + 0.5 * dt * k1)
    k3 = rhs(rho + 0.5 * dt * k2)
    k4 = rhs(rho + dt * k3)
    return rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass
class Trajectory:
    times: np.ndarray
    trace_dev: np.ndarray
    herm_defect: np.ndarray
    min_eig: np.ndarray
    energy: np.ndarray
    snapshot_times: np.ndarray
    states: list = field(repr=False)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "trace_dev", "herm_defect", "min_eig", "energy"])
            for row in zip(self.times, self.trace_dev, self.herm_defect, self.min_eig, self.energy):
                w.writerow([f"{x:.17e}" for x in row])

    def dump_snapshots(self, path) -> None:
        """One row per snapshot: t then (re, im) pairs of rho, row-major."""
        dim = self.states[0].shape[0]
        with open(path, "w", newline="") as fh:
            fh.write(f"# t, then re,im pairs of rho[i,j] row-major; dim={dim}\n")
            w = csv.writer(fh)
            for t, rho in zip(self.snapshot_times, self.states):
                flat = np.column_stack([rho.real.ravel(), rho.imag.ravel()]).ravel()
                w.writerow([f"{t:.17e}"] + [f"{x:.17e}" for x in flat])


def evolve(rho0: np.ndarray, rhs: Rhs, dt: float, steps: int, snapshot_stride: int = 0,
           hamiltonian: np.ndarray | None = None, monitor_eigs: bool = True) -> Trajectory:
    """Integrate ``drho/dt = rhs(rho)`` with classical RK4 at fixed ``dt``.

    After every step rho is re-symmetrised as (rho + rho^dag)/2; the defect
    recorded is the one before that repair. No positivity projection is
    applied. ``snapshot_stride=0`` keeps only the initial and final states.

    The step is stable for roughly ``dt <= 0.01 / max|eig(H)|``.
    """
    if dt <= 0 or steps < 0:
        raise ValueError("dt must be > 0 and steps >= 0")
    rho = np.array(rho0, dtype=complex)
    n = steps + 1
    times = dt * np.arange(n)
    trace_dev = np.empty(n)
    herm = np.empty(n)
    min_eig = np.full(n, np.nan)
    energy = np.full(n, np.nan)

    def record(k, rho, defect):
        trace_dev[k] = abs(np.trace(rho) - 1)
        herm[k] = defect
        if monitor_eigs:
            min_eig[k] = np.linalg.eigvalsh(rho)[0]
        if hamiltonian is not None:
            energy[k] = np.real(np.vdot(hamiltonian.conj().T, rho))

    record(0, rho, float(np.linalg.norm(rho - rho.conj().T)))
    snap_t, snaps = [0.0], [rho.copy()]
    warned = False
    for k in range(1, n):
        rho = rk4_step(rhs, rho, dt)
        defect = float(np.linalg.norm(rho - rho.conj().T))
        rho = 0.5 * (rho + rho.conj().T)
        record(k, rho, defect)
        if not np.isfinite(rho).all() or np.linalg.norm(rho) > DIVERGENCE_NORM:
            raise Diverged(f"||rho||_F exceeded {DIVERGENCE_NORM} at step {k}")
        if trace_dev[k] > TRACE_WARN and not warned:
            warnings.warn(f"trace deviation {trace_dev[k]:.2e} at step {k}", StabilityWarning, stacklevel=2)
            warned = True
        if snapshot_stride and k % snapshot_stride == 0 and k != n - 1:
            snap_t.append(times[k])
            snaps.append(rho.copy())
    if n > 1:
        snap_t.append(times[-1])
        snaps.append(rho.copy())
    return Trajectory(times, trace_dev, herm, min_eig, energy, np.array(snap_t), snaps)


def mean_number(rho: np.ndarray) -> float:
    return float(np.real(np.trace(number_operator(rho.shape[0]) @ rho)))


@dataclass
class PositivityReport:
    times: np.ndarray
    bm_min_eig: np.ndarray
    lindblad_min_eig: np.ndarray
    state_gap: np.ndarray
    predicted_slope: float
    measured_slope: float
    bm: Trajectory = field(repr=False)
    lindblad: Trajectory = field(repr=False)

    @property
    def bm_dips(self) -> bool:
        return bool(np.nanmin(self.bm_min_eig) < -1e-4)

    @property
    def lindblad_dips(self) -> bool:
        return bool(np.nanmin(self.lindblad_min_eig) < -1e-4)

    @property
    def contrast(self) -> bool:
        """BM trajectory goes below -1e-4 while the Lindblad one does not."""
        return self.bm_dips and not self.lindblad_dips

    def summary(self) -> str:
        return (
            f"BM min eig {np.nanmin(self.bm_min_eig):.3e}, "
            f"Lindblad min eig {np.nanmin(self.lindblad_min_eig):.3e}, "
            f"contrast={self.contrast}, slope {self.measured_slope:.4e} "
            f"(predicted {self.predicted_slope:.4e})"
        )


def positivity_comparison(rho0: np.ndarray, p: SquidParams, space: FockSpace, dt: float,
                          steps: int, slope_steps: int = 4) -> PositivityReport:
    """Evolve the same state under the Born-Markov and completed Lindblad equations.

    The gap between the two states grows initially as
    ``t * ||prefactor * a_SS * (S rho S - {S^2, rho}/2)||_F``; the measured
    slope uses the first ``slope_steps`` steps.
    """
    eq = MasterEquation.build(p, space)
    bm = evolve(rho0, eq.bm, dt, steps, hamiltonian=eq.H_eff)
    lb = evolve(rho0, eq.lindblad, dt, steps, hamiltonian=eq.H_eff)
    gap = np.array([0.0] + [np.nan] * steps)
    # only endpoints are stored; rebuild the early gap explicitly
    rb, rl = np.array(rho0, dtype=complex), np.array(rho0, dtype=complex)
    for k in range(1, min(slope_steps, steps) + 1):
        rb = rk4_step(eq.bm, rb, dt)
        rl = rk4_step(eq.lindblad, rl, dt)
        gap[k] = np.linalg.norm(rb - rl)
    if steps:
        gap[-1] = np.linalg.norm(bm.final - lb.final)
    k = min(slope_steps, steps)
    measured = gap[k] / (k * dt) if k else float("nan")
    predicted = float(np.linalg.norm(eq.completion_term(np.asarray(rho0, dtype=complex))))
    return PositivityReport(bm.times, bm.min_eig, lb.min_eig, gap, predicted, measured, bm, lb)
