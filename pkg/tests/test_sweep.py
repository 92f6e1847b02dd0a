"""Grid/line/thermal scans: contracts, determinism, serialization."""

import json
from dataclasses import replace

import numpy as np
import pytest

import dwcavity
from dwcavity.errors import BracketError, InvalidParamsError
from dwcavity.params import SystemParams
from dwcavity.steadystate import bifurcation_geff
from dwcavity.sweep import (DEFAULT_CUT_INSET, DEFAULT_CUT_RANGE_UNITS,
                            bifurcation_cut, cut_point_entanglement, cut_to_csv,
                            find_cutoff_temperature, phase_diagram,
                            phase_to_csv, run_manifest, scaled_params,
                            thermal_scan, thermal_to_csv, with_kappa_ratio,
                            write_manifest)


@pytest.fixture(scope="module")
def cut50(base):
    return bifurcation_cut(base)


@pytest.fixture(scope="module")
def cold(base):
    return replace(base, temperature=0.0)


# ---------------------------------------------------------------------------
# line cuts


def test_cut_defaults_and_line_drive(base, cut50):
    w1 = base.omega[0]
    assert cut50.records.shape[0] == 50
    assert cut50.delta_axis[0] == DEFAULT_CUT_RANGE_UNITS[0] * w1
    assert cut50.delta_axis[-1] == DEFAULT_CUT_RANGE_UNITS[1] * w1
    assert cut50.inset == DEFAULT_CUT_INSET
    expected = np.array([bifurcation_geff(base, dt) * (1 - DEFAULT_CUT_INSET)
                         for dt in cut50.delta_axis])
    assert np.array_equal(cut50.geff_line, expected)
    assert np.all(cut50.error_bits == 0)


def test_cut_degenerate_walls_have_equal_cavity_entanglement(cut50):
    # identical walls couple identically to the cavity
    ea1, ea2 = cut50.E_a1, cut50.E_a2
    finite = np.isfinite(ea1)
    assert np.array_equal(finite, np.isfinite(ea2))
    assert finite.any()
    assert np.max(np.abs(ea1[finite] - ea2[finite])) < 1e-10


def test_cut_validation(base):
    w1 = base.omega[0]
    with pytest.raises(InvalidParamsError):
        bifurcation_cut(base, delta_range=(-2.0 * w1, 0.5 * w1))
    with pytest.raises(InvalidParamsError):
        bifurcation_cut(base, resolution=1)
    with pytest.raises(InvalidParamsError):
        bifurcation_cut(base, inset=1.0)
    with pytest.raises(InvalidParamsError):
        bifurcation_cut(base, threads=0)


def test_cut_thread_schedule_determinism(base, tmp_path):
    w1 = base.omega[0]
    one = bifurcation_cut(base, (-30.0 * w1, -5.0 * w1), resolution=24, threads=1)
    four = bifurcation_cut(base, (-30.0 * w1, -5.0 * w1), resolution=24, threads=4)
    assert np.array_equal(one.records, four.records, equal_nan=True)
    p1, p4 = tmp_path / "one.csv", tmp_path / "four.csv"
    cut_to_csv(one, p1)
    cut_to_csv(four, p4)
    assert p1.read_bytes() == p4.read_bytes()


def test_cut_point_matches_cut_record(base):
    w1 = base.omega[0]
    two = bifurcation_cut(base, (-40.0 * w1, -20.0 * w1), resolution=2)
    assert cut_point_entanglement(base, -40.0) == two.E_12[0]
    assert cut_point_entanglement(base, -20.0) == two.E_12[1]


# ---------------------------------------------------------------------------
# phase diagrams


@pytest.fixture(scope="module")
def phase16(base):
    w1 = base.omega[0]
    return phase_diagram(base, (-3.0 * w1, 1.0 * w1), (0.0, 1.0), 16)


def test_phase_grid_contract(base, phase16):
    assert phase16.records.shape == (16, 16, phase16.records.shape[2])
    assert phase16.delta_axis.size == 16 and phase16.geff_axis.size == 16
    assert np.all(phase16.error_bits == 0)
    # undriven column: a single, stable, unentangled root
    assert np.all(phase16.n_real_roots[:, 0] == 1)
    assert np.all(phase16.n_stable_roots[:, 0] == 1)
    assert np.all(phase16.E_12[:, 0] == 0.0)
    assert np.all(phase16.root_field("nbar", 0)[:, 0] == 0.0)


def test_phase_cells_without_stable_root_report_nan(phase16):
    mask0 = phase16.stable_mask == 0
    assert mask0.any()  # the box includes a driven unstable region
    for arr in (phase16.E_a1, phase16.E_12, phase16.best_root["a1"],
                phase16.nu_min["12"]):
        assert np.all(np.isnan(arr[mask0]))
    labels = phase16.phase_label()
    assert labels[mask0].ravel()[0] == ()
    assert labels[0, 0] == (0,)


def test_phase_resolution_validation(base):
    w1 = base.omega[0]
    with pytest.raises(InvalidParamsError):
        phase_diagram(base, (-2.0 * w1, 0.0), (0.0, 1.0), 8)
    pd = phase_diagram(base, (-2.0 * w1, 0.0), (0.0, 1.0), (16, 20))
    assert pd.records.shape[:2] == (16, 20)


def test_phase_thread_schedule_determinism(base, tmp_path):
    w1 = base.omega[0]
    box = ((-2.0 * w1, 0.5 * w1), (0.0, 0.8))
    one = phase_diagram(base, *box, (20, 16), threads=1)
    thr = phase_diagram(base, *box, (20, 16), threads=3)
    assert np.array_equal(one.records, thr.records, equal_nan=True)
    p1, p3 = tmp_path / "t1.csv", tmp_path / "t3.csv"
    phase_to_csv(one, p1)
    phase_to_csv(thr, p3)
    assert p1.read_bytes() == p3.read_bytes()


def test_scans_require_two_modes():
    single = SystemParams(omega=(1e9,), g=(1e6,), kappa=(1e6,),
                          kappa_a=2e6, Delta_a=0.0, xi=0.0)
    with pytest.raises(InvalidParamsError):
        bifurcation_cut(single)


# ---------------------------------------------------------------------------
# parameter transforms and their invariances


def test_kappa_ratio_and_scaling_arithmetic(base):
    p = with_kappa_ratio(base, 0.2)
    assert p.kappa_a == 0.2 * base.kappa[0]
    with pytest.raises(InvalidParamsError):
        with_kappa_ratio(base, 0.0)

    s = scaled_params(base, 10.0, "scaled")
    assert s.omega == tuple(10 * w for w in base.omega)
    assert s.kappa == tuple(10 * k for k in base.kappa)
    assert s.g == tuple(10 * g for g in base.g)
    assert s.kappa_a == 10 * base.kappa_a

    f = scaled_params(base, 10.0, "fixed_rates")
    assert f.omega == tuple(10 * w for w in base.omega)
    assert f.kappa == base.kappa and f.g == base.g
    assert f.kappa_a == base.kappa_a

    with pytest.raises(InvalidParamsError):
        scaled_params(base, -1.0)
    with pytest.raises(InvalidParamsError):
        scaled_params(base, 10.0, "adiabatic")


def test_scaled_mode_preserves_zero_temperature_entanglement(cold):
    e0 = cut_point_entanglement(cold, -40.0)
    e1 = cut_point_entanglement(scaled_params(cold, 10.0, "scaled"), -40.0)
    assert e0 > 0.1
    assert abs(e1 - e0) <= 1e-12 * e0


def test_fixed_rates_mode_changes_dimensionless_coupling(cold):
    e0 = cut_point_entanglement(cold, -40.0)
    ef = cut_point_entanglement(scaled_params(cold, 10.0, "fixed_rates"), -40.0)
    assert abs(ef - e0) > 0.05  # physics genuinely changes


def test_entanglement_depends_on_damping_ratio_not_scale(cold):
    # kappa_a/kappa_1 = 0.2 reached from either side gives the same E_12
    a = with_kappa_ratio(cold, 0.2)
    b = with_kappa_ratio(replace(cold, kappa=(1e7, 1e7)), 0.2)
    ea, eb = cut_point_entanglement(a, -40.0), cut_point_entanglement(b, -40.0)
    assert ea > 0.1
    assert abs(ea - eb) <= 1e-6 * ea


# ---------------------------------------------------------------------------
# thermal scans and the cutoff search


def test_thermal_scan_temperature_decays_to_zero(base):
    values = [1e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2]
    scan = thermal_scan(base, "temperature", values)
    assert scan.kind == "temperature" and scan.scaling_mode is None
    assert np.array_equal(scan.axis, np.asarray(values))
    assert scan.E_12[0] > 0.1 and scan.E_12[-1] == 0.0
    assert scan.monotone_tail
    assert scan.T_c is None


def test_thermal_scan_kappa_ratio_axis(base):
    scan = thermal_scan(base, "kappa_ratio", [0.1, 0.2, 1.0])
    assert np.all(scan.E_12 > 0.0)


def test_thermal_scan_validation(base):
    with pytest.raises(InvalidParamsError):
        thermal_scan(base, "pressure", [1.0])
    with pytest.raises(InvalidParamsError):
        thermal_scan(base, "temperature", [])
    with pytest.raises(InvalidParamsError):
        thermal_scan(base, "temperature", [[1e-3, 2e-3]])


def test_find_cutoff_temperature_brackets_decay(base):
    Tc = find_cutoff_temperature(base)
    assert 1e-3 < Tc < 1e-2
    below = cut_point_entanglement(replace(base, temperature=0.5 * Tc))
    above = cut_point_entanglement(replace(base, temperature=2.0 * Tc))
    assert below > 1e-4 > above


def test_find_cutoff_temperature_bracket_errors(base):
    with pytest.raises(BracketError, match="endpoint excesses"):
        find_cutoff_temperature(base, bracket=(10.0, 50.0))
    with pytest.raises(InvalidParamsError):
        find_cutoff_temperature(base, threshold=0.0)
    with pytest.raises(InvalidParamsError):
        find_cutoff_temperature(base, bracket=(2.0, 1.0))


# ---------------------------------------------------------------------------
# serialization


def test_cut_csv_layout(cut50, tmp_path):
    path = tmp_path / "cut.csv"
    cut_to_csv(cut50, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 51
    header = lines[0].split(",")
    assert header[:6] == ["delta_tilde", "g_eff", "n_real", "n_stable",
                          "stable_mask", "error_bits"]
    assert "nbar_0" in header and "E_12_2" in header and "nu_12_min" in header
    assert len(lines[1].split(",")) == len(header)
    # full-precision round trip of the first data row
    row = lines[1].split(",")
    assert float(row[0]) == cut50.delta_axis[0]
    assert float(row[1]) == cut50.geff_line[0]


def test_phase_csv_row_count(phase16, tmp_path):
    path = tmp_path / "phase.csv"
    phase_to_csv(phase16, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 257
    assert lines[0].startswith("delta_tilde,g_eff,")


def test_thermal_csv_layout(base, tmp_path):
    scan = thermal_scan(base, "temperature", [1e-3, 2e-3])
    path = tmp_path / "thermal.csv"
    thermal_to_csv(scan, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "temperature,E_12"
    assert len(lines) == 3


def test_manifest_round_trip(base, tmp_path):
    spec = {"resolution": [16, 16], "delta_range": [-3e9, 1e9],
            "geff_range": [0.0, 1.0]}
    manifest = run_manifest("phase", base, spec, ["phase.csv"], wall_time=1.25)
    assert manifest["version"] == dwcavity.__version__
    assert manifest["outputs"] == ["phase.csv"]
    assert manifest["wall_time_s"] == 1.25
    restored = SystemParams.from_dict(manifest["params"])
    assert restored == base

    path = tmp_path / "manifest.json"
    write_manifest(path, manifest)
    assert json.loads(path.read_text()) == manifest
