import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import squidlind.spectroscopy as spec_mod
from squidlind.errors import FDStepTooLarge
from squidlind.model import DeviceInputs, derive_params
from squidlind.operators import FockSpace
from squidlind.spectroscopy import (
    SweepSpec,
    convergence_audit,
    ground_curvature,
    non_additivity,
    read_table,
    second_derivative,
    spectrum_sweep,
    spiderweb,
    susceptibility,
    write_table,
)

HARMONIC = DeviceInputs(josephson_energy=0.0)


@pytest.fixture(scope="module")
def web():
    return spiderweb()


def test_spiderweb_matches_chart(web):
    assert len(web) == 8
    for row in web:
        assert abs(row.deviation) <= 0.15, row


def test_spiderweb_ordering(web):
    e = {r.label: r.energy for r in web}
    # squeezing lowers the ground level most; the sine couplings act little alone
    assert e["H0+XP"] < e["H0+PS"] < e["H0"] < e["H0+XS"]
    assert e["H'"] < e["H0+XP"]


def test_non_additivity_keys(web):
    res = non_additivity(web)
    assert set(res) == {"XP+XS", "XP+PS", "PS+XS"}
    assert all(np.isfinite(v) for v in res.values())


def test_harmonic_levels_flat():
    s = SweepSpec(np.linspace(0, 1, 5), [0.5, 1.8], levels=4, include=(), space=FockSpace(32, 8))
    res = spectrum_sweep(s, HARMONIC)
    e = res.energies()
    assert e.shape == (5, 2, 4)
    assert np.allclose(e, np.arange(4) + 0.5, atol=1e-9)


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec([0.5, 0.2], [1.0])
    with pytest.raises(ValueError):
        SweepSpec([], [1.0])
    with pytest.raises(ValueError):
        SweepSpec([0.5], [1.0], levels=0)
    with pytest.raises(ValueError):
        SweepSpec([0.5], [1.0], levels=9, space=FockSpace(8))
    with pytest.raises(ValueError):
        SweepSpec([0.5], [1.0], include=("YY",))


def test_sweep_deterministic_across_threads(tmp_path):
    s = SweepSpec(np.linspace(0, 1, 7), [1.0, 1.8], levels=3, space=FockSpace(48, 12))
    spectrum_sweep(s, threads=1).to_csv(tmp_path / "a.csv")
    spectrum_sweep(s, threads=4).to_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_sweep_records_failures(monkeypatch):
    real = spec_mod.lowest_levels

    def flaky(p, space, include, levels):
        if p.g == 3.0:
            raise np.linalg.LinAlgError("synthetic")
        return real(p, space, include, levels)

    monkeypatch.setattr(spec_mod, "lowest_levels", flaky)
    res = spectrum_sweep(SweepSpec([0.5], [1.0, 3.0], levels=2, space=FockSpace(32, 8)))
    assert len(res.failures) == 1
    e = res.energies()
    assert np.all(np.isnan(e[0, 1])) and np.all(np.isfinite(e[0, 0]))


@settings(max_examples=30)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=6))
def test_table_roundtrip(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("t") / "x.csv"
    write_table(path, ["k", "v"], [(i, v) for i, v in enumerate(values)], {"a": 1.5, "b": "x"})
    meta, cols, rows = read_table(path)
    assert cols == ["k", "v"]
    assert meta["b"] == "x"
    assert [float(r[1]) for r in rows] == values


def test_second_derivative_known():
    val, err, h, rel = second_derivative(np.sin, 0.7, 0.05)
    assert val == pytest.approx(-np.sin(0.7), rel=1e-8)
    assert rel <= 1e-3 and err >= 0
    val, *_ = second_derivative(lambda x: 3 * x**2, 0.2, 0.01)
    assert val == pytest.approx(6.0, rel=1e-8)


def test_second_derivative_resolves_narrow_feature():
    # curvature concentrated in a window much narrower than the start step
    w = 1e-3
    f = lambda x: -np.sqrt(x**2 + w**2)  # noqa: E731
    val, _, h, rel = second_derivative(f, 0.0, 0.05)
    assert val == pytest.approx(-1 / w, rel=1e-3)
    assert h < w


def test_susceptibility_harmonic_zero():
    res = susceptibility(HARMONIC, [0.1, 0.5, 0.8], [1.0, 1.8], space=FockSpace(32, 8))
    assert np.abs(res.grid()).max() <= 1e-10


def test_susceptibility_symmetric_and_consistent():
    phi = [0.2, 0.35, 0.65, 0.8]
    res = susceptibility(None, phi, [1.0, 1.8], space=FockSpace(64, 16))
    chi, err = res.grid(), res.grid("richardson_error")
    assert np.all(np.abs(chi - chi[::-1]) <= err + err[::-1])
    assert res.grid("step_halving_rel").max() <= 1e-2
    p = derive_params()
    assert np.allclose(res.grid("chi0_over_L"), chi / p.inductance)


def test_susceptibility_matches_perturbative_curvature():
    p = derive_params()
    sp = FockSpace(64, 16)
    for phi, g in ((0.3, 1.0), (0.5, 0.3), (0.5, 1.8)):
        res = susceptibility(None, [phi], [g], space=sp)
        curv = ground_curvature(replace(p, phi=phi, g=g), sp)
        assert res.grid()[0, 0] == pytest.approx(-p.chi_scale * curv, rel=1e-2)


def test_susceptibility_flags_unresolved_doublet():
    # at g = 3 the tunnel splitting at half flux is ~1e-13: not resolvable
    with pytest.warns(FDStepTooLarge):
        res = susceptibility(None, [0.5], [3.0], space=FockSpace(128, 32))
    assert res.flagged == [(0.5, 3.0)]


def test_susceptibility_step_validation():
    with pytest.raises(ValueError):
        susceptibility(None, [0.5], [1.0], h=0.1)


def test_convergence_harmonic():
    rows = convergence_audit(HARMONIC, [2, 8, 32], include=())
    assert all(r.levels[0] == pytest.approx(0.5, abs=1e-12) for r in rows)


def test_convergence_monotone():
    rows = convergence_audit(None, [24, 32, 40, 48, 64])
    d = [r.delta_e0 for r in rows[1:]]
    assert all(b <= 1.1 * a for a, b in zip(d, d[1:]))
    with pytest.raises(ValueError):
        convergence_audit(None, [64, 32])


def test_metadata_header(tmp_path):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = susceptibility(None, [0.3], [1.0], space=FockSpace(48, 12))
    res.to_csv(tmp_path / "chi.csv")
    meta, cols, rows = read_table(tmp_path / "chi.csv")
    assert cols == list(res.columns)
    assert float(meta["N"]) == 48 and meta["sine_convention"] == "force"
