"""Flux and coupling sweeps: level diagrams, term contributions, susceptibility."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .errors import FDStepTooLarge
from .model import TERMS, DeviceInputs, SquidParams, _normalize_include, derive_params, effective_hamiltonian
from .operators import FockSpace, eigvalsh

DEFAULT_G = (0.3, 1.0, 1.8, 3.0)
DEFAULT_STEP = 1.0 / 400

# (label, include-set, reference lowest eigenvalue / hbar*omega0), in chart axis order;
# references are read off a radial grid with 0.1 resolution
SPIDERWEB_CONFIGS = (
    ("H'", ("XP", "XS", "PS"), 3.8),
    ("H0", (), 5.6),
    ("H0+XS", ("XS",), 5.7),
    ("H0+XP", ("XP",), 4.7),
    ("H0+PS", ("PS",), 5.4),
    ("H0+XP+XS", ("XP", "XS"), 4.8),
    ("H0+XP+PS", ("XP", "PS"), 3.8),
    ("H0+PS+XS", ("PS", "XS"), 5.5),
)


def _check_grid(name, grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d grid")
    if np.any(np.diff(grid) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    return grid


@dataclass(frozen=True)
class SweepSpec:
    phi_grid: np.ndarray
    g_grid: np.ndarray
    levels: int = 5
    include: tuple = TERMS
    space: FockSpace = FockSpace(128, 32)

    def __post_init__(self):
        object.__setattr__(self, "phi_grid", _check_grid("phi_grid", self.phi_grid))
        object.__setattr__(self, "g_grid", _check_grid("g_grid", self.g_grid))
        object.__setattr__(self, "include", _normalize_include(self.include))
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if self.levels > self.space.dim:
            raise ValueError("levels cannot exceed the basis size")


def write_table(path, columns: Sequence[str], rows: Iterable[Sequence], metadata: dict | None = None) -> None:
    """CSV with ``# key=value`` metadata lines, a header row, then rows.

    Floats are written in full double precision scientific notation.
    """
    with open(path, "w", newline="") as fh:
        for key, value in (metadata or {}).items():
            fh.write(f"# {key}={value}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17e}"
    return str(x)


def read_table(path) -> tuple[dict, list[str], list[list[str]]]:
    meta, header, rows = {}, None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, _, value = line[2:].partition("=")
                meta[key] = value
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append(line.split(","))
    return meta, header, rows


@dataclass
class SweepResult:
    rows: list
    metadata: dict
    failures: list = field(default_factory=list)

    columns = ("phi", "g", "level", "energy")

    def energies(self, phi_index: int | None = None) -> np.ndarray:
        """Energies reshaped to ``(n_phi, n_g, levels)``."""
        n_phi, n_g, k = (self.metadata[key] for key in ("n_phi", "n_g", "levels"))
        e = np.array([r[3] for r in self.rows], dtype=float).reshape(n_phi, n_g, k)
        return e if phi_index is None else e[phi_index]

    def to_csv(self, path) -> None:
        write_table(path, self.columns, self.rows, self.metadata)


def _metadata(p: SquidParams, space: FockSpace, **extra) -> dict:
    meta = {
        "code_version": __version__,
        "N": space.dim,
        "pad": space.pad,
        "omega0": p.omega0,
        "nu_ratio": p.nu_ratio,
        "s": p.s,
        "sine_amplitude": p.sine_amplitude,
        "sine_convention": p.sine_convention,
        "xi": p.xi,
        "gamma_ratio": p.gamma_ratio,
        "chi_scale": p.chi_scale,
    }
    meta.update(extra)
    return meta


def lowest_levels(p: SquidParams, space: FockSpace, include=TERMS, levels: int = 5) -> np.ndarray:
    return eigvalsh(effective_hamiltonian(p, space, include))[:levels]


def _map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def spectrum_sweep(spec: SweepSpec, inputs: DeviceInputs | None = None, *, threads: int = 1,
                   sine_convention: str = "force") -> SweepResult:
    """Lowest ``spec.levels`` eigenvalues of the effective Hamiltonian on the (phi, g) grid.

    Levels are tracked by sorted order. A failing grid point is recorded in
    ``failures`` and its energies are NaN; the sweep carries on.
    """
    base = derive_params(inputs, sine_convention=sine_convention)
    points = [(phi, g) for phi in spec.phi_grid for g in spec.g_grid]

    def work(pt):
        phi, g = pt
        try:
            return lowest_levels(replace(base, phi=float(phi), g=float(g)), spec.space, spec.include, spec.levels), None
        except Exception as exc:  # recorded, sweep continues
            return np.full(spec.levels, np.nan), f"phi={phi} g={g}: {exc}"

    results = _map(work, points, threads)
    rows, failures = [], []
    for (phi, g), (energies, err) in zip(points, results):
        if err:
            failures.append(err)
        rows.extend((float(phi), float(g), k, float(e)) for k, e in enumerate(energies))
    meta = _metadata(
        base, spec.space,
        include="+".join(spec.include) or "none",
        levels=spec.levels,
        n_phi=len(spec.phi_grid),
        n_g=len(spec.g_grid),
    )
    return SweepResult(rows, meta, failures)


@dataclass
class SpiderwebRow:
    label: str
    include: tuple
    energy: float
    reference: float

    @property
    def deviation(self) -> float:
        return self.energy - self.reference


def spiderweb(inputs: DeviceInputs | None = None, space: FockSpace = FockSpace(128, 32),
              sine_convention: str = "force") -> list[SpiderwebRow]:
    """Lowest eigenvalue of H_S plus each combination of correction terms."""
    inputs = inputs or DeviceInputs(phi=0.5, g=1.8)
    p = derive_params(inputs, sine_convention=sine_convention)
    return [
        SpiderwebRow(label, include, float(lowest_levels(p, space, include, 1)[0]), ref)
        for label, include, ref in SPIDERWEB_CONFIGS
    ]


def non_additivity(rows: Sequence[SpiderwebRow]) -> dict[str, float]:
    """Pairwise residuals E(A+B) - E0 - (E(A) - E0) - (E(B) - E0)."""
    by_inc = {frozenset(r.include): r.energy for r in rows}
    e0 = by_inc[frozenset()]
    out = {}
    for a, b in (("XP", "XS"), ("XP", "PS"), ("PS", "XS")):
        pair = by_inc[frozenset((a, b))]
        out[f"{a}+{b}"] = (pair - e0) - (by_inc[frozenset((a,))] - e0) - (by_inc[frozenset((b,))] - e0)
    return out


@dataclass
class SusceptibilityResult:
    rows: list
    metadata: dict
    flagged: list = field(default_factory=list)

    columns = ("phi", "g", "chi0", "chi0_over_L", "fd_step", "richardson_error", "step_halving_rel")

    def grid(self, column: str = "chi0") -> np.ndarray:
        idx = self.columns.index(column)
        n_phi, n_g = self.metadata["n_phi"], self.metadata["n_g"]
        return np.array([r[idx] for r in self.rows], dtype=float).reshape(n_phi, n_g)

    def to_csv(self, path) -> None:
        write_table(path, self.columns, self.rows, self.metadata)


def second_derivative(f, x: float, h: float, rtol: float = 1e-3, max_halvings: int = 40,
                      noise: float = 0.0) -> tuple[float, float, float, float]:
    """Central second difference with step halving.

    Starting from ``h``, the step is halved until the estimates at h and h/2
    agree to ``rtol`` relative, or until the rounding floor ``4*noise/h**2``
    reaches the estimate. Near an avoided crossing the curvature of the
    lowest level is concentrated in a window of width gap/slope, so the
    step has to shrink below that.

    Returns ``(value, error, step, consistency)``: the Richardson
    extrapolation (4 D(h/2) - D(h)) / 3, the error estimate |D(h/2) - D(h)| / 3,
    the final step h and the relative change |D(h) - D(h/2)| / |D(h/2)|.
    """
    cache = {}

    def fx(y):
        if y not in cache:
            cache[y] = f(y)
        return cache[y]

    def diff(step):
        return (fx(x + step) - 2 * fx(x) + fx(x - step)) / step**2

    d_h, d_h2 = diff(h), diff(h / 2)
    for _ in range(max_halvings):
        change = abs(d_h - d_h2)
        if change <= rtol * abs(d_h2):
            break
        if 4 * noise / (h / 4) ** 2 >= abs(d_h2):
            break
        h /= 2
        d_h, d_h2 = d_h2, diff(h / 2)
    change = abs(d_h - d_h2)
    consistency = change / abs(d_h2) if d_h2 != 0 else (0.0 if change == 0 else np.inf)
    return (4 * d_h2 - d_h) / 3, change / 3, h, consistency


def susceptibility(inputs: DeviceInputs | None, phi_grid, g_grid, h: float = DEFAULT_STEP, *,
                   space: FockSpace = FockSpace(128, 32), include=TERMS, threads: int = 1,
                   rtol: float = 1e-3, sine_convention: str = "force") -> SusceptibilityResult:
    """Ground-state susceptibility chi0 = -chi_scale * d^2 e0 / d phi^2.

    ``e0`` is the ground energy in hbar*omega0 and ``phi = Phi_x / Phi_0``;
    ``chi_scale = L hbar omega0 / Phi_0^2``. The second column ``chi0_over_L``
    is chi0 divided by the inductance, in 1/H. ``h`` is the starting step;
    the step actually used at each point is reported in ``fd_step``.
    """
    if not 0 < h <= 0.05:
        raise ValueError("fd step h must lie in (0, 0.05]")
    phi_grid = _check_grid("phi_grid", phi_grid)
    g_grid = _check_grid("g_grid", g_grid)
    include = _normalize_include(include)
    base = derive_params(inputs, sine_convention=sine_convention)
    if not np.isclose(base.chi_scale * 4 * np.pi**2, base.s**2, rtol=1e-12, atol=0):
        raise ArithmeticError("chi_scale identity violated")

    def work(pt):
        phi, g = pt
        p = replace(base, g=float(g))

        def e0(x):
            return float(eigvalsh(effective_hamiltonian(replace(p, phi=x), space, include))[0])

        noise = 8 * np.finfo(float).eps * float(np.abs(eigvalsh(effective_hamiltonian(replace(p, phi=float(phi)), space, include))).max())
        d2, err, step, rel = second_derivative(e0, float(phi), h, rtol=rtol, noise=noise)
        return -base.chi_scale * d2, base.chi_scale * err, step, rel

    points = [(phi, g) for phi in phi_grid for g in g_grid]
    rows, flagged = [], []
    for (phi, g), (chi, err, step, rel) in zip(points, _map(work, points, threads)):
        rows.append((float(phi), float(g), chi, chi / base.inductance, step, err, rel))
        if err > 0.05 * abs(chi):
            flagged.append((float(phi), float(g)))
    if flagged:
        warnings.warn(f"Richardson error above 5% at {len(flagged)} point(s)", FDStepTooLarge, stacklevel=2)
    meta = _metadata(base, space, include="+".join(include) or "none", n_phi=len(phi_grid),
                     n_g=len(g_grid), fd_step=h, inductance_H=base.inductance)
    return SusceptibilityResult(rows, meta, flagged)


@dataclass
class ConvergenceRow:
    dim: int
    levels: np.ndarray
    delta_e0: float


def convergence_audit(inputs: DeviceInputs | None, dims: Sequence[int], phi: float = 0.5, g: float = 1.8,
                      pad: int = 32, include=TERMS, levels: int = 5,
                      sine_convention: str = "force") -> list[ConvergenceRow]:
    """Lowest levels per truncation and the change of E0 from the previous one."""
    dims = list(dims)
    if any(b <= a for a, b in zip(dims, dims[1:])):
        raise ValueError("dims must be ascending")
    p = replace(derive_params(inputs, sine_convention=sine_convention), phi=phi, g=g)
    out, prev = [], None
    for n in dims:
        lv = lowest_levels(p, FockSpace(n, pad), include, min(levels, n))
        out.append(ConvergenceRow(n, lv, float("nan") if prev is None else abs(lv[0] - prev)))
        prev = lv[0]
    return out


def ground_curvature(p: SquidParams, space: FockSpace, include=TERMS) -> float:
    """d^2 e0 / d phi^2 from second-order perturbation theory.

    The flux enters only through cos and sin of (s X + 2 pi phi), so with
    H(phi) = A + B(phi): dH/dphi = 2 pi (H(phi + 1/4) - A) and
    d^2H/dphi^2 = -(2 pi)^2 (H(phi) - A), where A = (H(phi) + H(phi + 1/2)) / 2.
    Independent of any finite-difference step, but ill-conditioned when the
    lowest gap approaches rounding level.
    """
    H = effective_hamiltonian(p, space, include)
    A = 0.5 * (H + effective_hamiltonian(replace(p, phi=p.phi + 0.5), space, include))
    dH = 2 * np.pi * (effective_hamiltonian(replace(p, phi=p.phi + 0.25), space, include) - A)
    d2H = -((2 * np.pi) ** 2) * (H - A)
    vals, vecs = np.linalg.eigh(H)
    v0 = vecs[:, 0]
    couplings = vecs.conj().T @ (dH @ v0)
    second = np.real(np.vdot(v0, d2H @ v0))
    second -= 2 * np.sum(np.abs(couplings[1:]) ** 2 / (vals[1:] - vals[0]))
    return float(second)
