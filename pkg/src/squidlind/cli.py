"""Command-line driver.

    squidlind [--config cfg.json] [--out DIR] [--threads N] [--dim N] <command>

Commands: spectrum, spiderweb, susceptibility, lindblads, evolve. Each
writes CSV output plus a ``<prefix><command>.manifest.json`` run manifest.
Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import warnings
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, parse_config
from .dynamics import evolve, initial_state, positivity_comparison
from .errors import ConfigError, GRangeWarning, SquidLindError
from .lindblad import BASIS, MasterEquation, coefficient_matrix, extract_lindblads
from .model import derive_params
from .operators import FockSpace
from .spectroscopy import (
    SweepSpec,
    non_additivity,
    spectrum_sweep,
    spiderweb,
    susceptibility,
    write_table,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class NumericalFailure(Exception):
    """Raised by a command after writing partial output."""


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_json_atomic(path: Path, payload: dict) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
    os.replace(tmp, path)


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serialisable: {type(x)}")


class Run:
    """Collects outputs and extra manifest fields for one command."""

    def __init__(self, command: str, cfg: RunConfig, out: Path):
        self.command = command
        self.cfg = cfg
        self.out = out
        self.outputs: list[Path] = []
        self.extra: dict = {}
        self.started = datetime.now(timezone.utc).isoformat()

    def path(self, name: str) -> Path:
        p = self.out / f"{self.cfg.output.prefix}{name}"
        self.outputs.append(p)
        return p

    def manifest(self, status: str, error: str | None = None) -> Path:
        cfg = self.cfg
        params = derive_params(cfg.device.inputs(cfg.point.g, cfg.point.phi),
                               sine_convention=cfg.device.sine_convention)
        payload = {
            "command": self.command,
            "code_version": __version__,
            "status": status,
            "error": error,
            "config": cfg.to_dict(),
            "defaults_applied": cfg.defaults_applied,
            "warnings": cfg.warnings,
            "derived_params": params.to_dict(),
            "started": self.started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "outputs": {p.name: sha256(p) for p in self.outputs if p.exists()},
            **self.extra,
        }
        path = self.out / f"{cfg.output.prefix}{self.command}.manifest.json"
        write_json_atomic(path, payload)
        return path


def _space(cfg: RunConfig) -> FockSpace:
    return FockSpace(cfg.space.N, cfg.space.pad)


def cmd_spectrum(run: Run, threads: int) -> None:
    cfg = run.cfg
    spec = SweepSpec(cfg.sweep.phi_grid(), cfg.sweep.g_grid(), cfg.sweep.levels,
                     tuple(cfg.sweep.include), _space(cfg))
    result = spectrum_sweep(spec, cfg.device.inputs(), threads=threads,
                            sine_convention=cfg.device.sine_convention)
    result.to_csv(run.path("spectrum.csv"))
    run.extra["rows"] = len(result.rows)
    if result.failures:
        run.extra["failures"] = result.failures
        raise NumericalFailure(f"{len(result.failures)} grid point(s) failed")


def cmd_spiderweb(run: Run, threads: int) -> None:
    cfg = run.cfg
    rows = spiderweb(cfg.device.inputs(cfg.point.g, cfg.point.phi), _space(cfg),
                     sine_convention=cfg.device.sine_convention)
    write_table(
        run.path("spiderweb.csv"),
        ("label", "include", "energy", "reference", "deviation"),
        [(r.label, "+".join(r.include) or "none", r.energy, r.reference, r.deviation) for r in rows],
        {"phi": cfg.point.phi, "g": cfg.point.g, "N": cfg.space.N, "pad": cfg.space.pad},
    )
    run.extra["non_additivity"] = non_additivity(rows)
    run.extra["max_abs_deviation"] = max(abs(r.deviation) for r in rows)


def cmd_susceptibility(run: Run, threads: int) -> None:
    cfg = run.cfg
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = susceptibility(cfg.device.inputs(), cfg.sweep.phi_grid(), cfg.sweep.g_grid(),
                                cfg.sweep.fd_step, space=_space(cfg), include=tuple(cfg.sweep.include),
                                threads=threads, sine_convention=cfg.device.sine_convention)
    result.to_csv(run.path("susceptibility.csv"))
    run.extra["fd_flagged_points"] = result.flagged
    run.extra["fd_warnings"] = [str(w.message) for w in caught]


def cmd_lindblads(run: Run, threads: int) -> None:
    cfg = run.cfg
    rows, report = [], []
    for g in cfg.sweep.g_grid():
        p = derive_params(cfg.device.inputs(float(g), cfg.point.phi), sine_convention=cfg.device.sine_convention)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GRangeWarning)
            m = coefficient_matrix(p, complete=True)
        lset = extract_lindblads(m, require_completed=False)
        e = m.eigenvalues
        for c in lset.coeffs:
            rows.append((float(g), p.xi, e[0], e[1], e[2], m.a_ss,
                         c[0].real, c[0].imag, c[1].real, c[1].imag, c[2].real, c[2].imag))
        report.append({
            "g": float(g),
            "completed": m.completed,
            "min_eigenvalue": m.min_eigenvalue,
            "a_ss": m.a_ss,
            "a_ss_closed_form": m.closed_form_a_ss,
            "closed_form_rel_discrepancy": m.closed_form_discrepancy,
            "n_lindblads": len(lset),
        })
    cols = ["g", "xi", "eig1", "eig2", "eig3", "a_ss"]
    cols += [f"c{b}_{part}" for b in BASIS for part in ("re", "im")]
    write_table(run.path("lindblads.csv"), cols, rows,
                {"basis": "X,P,S", "units": "gamma/omega0", "sine_convention": cfg.device.sine_convention})
    run.extra["lindblad_report"] = report


def cmd_evolve(run: Run, threads: int) -> None:
    cfg = run.cfg
    dy = cfg.dynamics
    p = derive_params(cfg.device.inputs(cfg.point.g, cfg.point.phi), sine_convention=cfg.device.sine_convention)
    space = FockSpace(dy.N, dy.pad)
    eq = MasterEquation.build(p, space)
    rho0 = initial_state(dy.initial, space, H=eq.H_eff, n=dy.n, alpha=dy.alpha)
    run.extra["completed"] = eq.coefficients.completed
    if dy.rhs == "both":
        rep = positivity_comparison(rho0, p, space, dy.dt, dy.steps)
        rep.lindblad.to_csv(run.path("evolve.csv"))
        rep.bm.to_csv(run.path("evolve_bm.csv"))
        run.extra["positivity"] = {
            "bm_min_eig": float(np.nanmin(rep.bm_min_eig)),
            "lindblad_min_eig": float(np.nanmin(rep.lindblad_min_eig)),
            "bm_dips_below_1e-4": rep.bm_dips,
            "contrast": rep.contrast,
            "gap_slope_measured": rep.measured_slope,
            "gap_slope_predicted": rep.predicted_slope,
        }
        traj = rep.lindblad
    else:
        rhs = eq.lindblad if dy.rhs == "lindblad" else eq.bm
        traj = evolve(rho0, rhs, dy.dt, dy.steps, dy.stride, hamiltonian=eq.H_eff)
        traj.to_csv(run.path("evolve.csv"))
    if dy.snapshots:
        traj.dump_snapshots(run.path("evolve_snapshots.csv"))
    run.extra["final"] = {
        "trace_dev_max": float(np.max(traj.trace_dev)),
        "herm_defect_max": float(np.max(traj.herm_defect)),
        "min_eig_min": float(np.nanmin(traj.min_eig)),
    }


COMMANDS = {
    "spectrum": cmd_spectrum,
    "spiderweb": cmd_spiderweb,
    "susceptibility": cmd_susceptibility,
    "lindblads": cmd_lindblads,
    "evolve": cmd_evolve,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="squidlind", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", type=Path, default=None, help="JSON run configuration")
    parser.add_argument("--out", type=Path, default=None, help="output directory (overrides config)")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for grid sweeps")
    parser.add_argument("--dim", type=int, default=None, help="Fock truncation N (overrides config)")
    parser.add_argument("--seedless", action="store_true",
                        help="deterministic mode; accepted for scripts, every command is already deterministic")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.dim is not None:
            if args.dim < 2:
                raise ConfigError("--dim must be >= 2")
            cfg.space = replace(cfg.space, N=args.dim, pad=args.dim // 4)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
    except (ConfigError, OSError) as exc:
        print(f"squidlind: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    for msg in cfg.warnings:
        print(f"squidlind: {msg}", file=sys.stderr)

    run = Run(args.command, cfg, out)
    try:
        COMMANDS[args.command](run, args.threads)
    except (NumericalFailure, SquidLindError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"squidlind: numerical failure: {exc}", file=sys.stderr)
        run.manifest("partial", str(exc))
        return EXIT_NUMERIC
    run.manifest("ok")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
