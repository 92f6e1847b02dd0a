"""Command-line interface: flags, outputs, manifests, exit codes."""

import argparse
import json
import subprocess

import numpy as np
import pytest

import dwcavity
from dwcavity.cli import build_parser, main
from dwcavity.params import baseline


def run(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


# ---------------------------------------------------------------------------
# help and self-description


def test_top_level_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "SUBCOMMAND" in capsys.readouterr().out


@pytest.mark.parametrize("sub", ["point", "phase", "cut", "spectrum",
                                 "thermal", "material", "rerun"])
def test_subcommand_help_exits_zero(capsys, sub):
    with pytest.raises(SystemExit) as exc:
        main([sub, "--help"])
    assert exc.value.code == 0
    assert "--help" in capsys.readouterr().out


def test_every_flag_is_documented():
    top = build_parser()
    parsers = [top]
    for action in top._actions:
        if isinstance(action, argparse._SubParsersAction):
            parsers += list(action.choices.values())
    assert len(parsers) == 8  # top level + seven subcommands
    for parser in parsers:
        for action in parser._actions:
            if isinstance(action, argparse._SubParsersAction):
                continue
            assert action.help, (
                f"undocumented option {action.option_strings or action.dest} "
                f"of {parser.prog}"
            )


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert dwcavity.__version__ in capsys.readouterr().out


def test_console_script_installed():
    proc = subprocess.run(["dwcavity", "--version"], capture_output=True,
                          text=True, timeout=120)
    assert proc.returncode == 0
    assert dwcavity.__version__ in proc.stdout


# ---------------------------------------------------------------------------
# point


def test_point_json_to_stdout(capsys):
    rc, out, _ = run(capsys, "point", "--baseline", "--delta-tilde", "-40",
                     "--on-line")
    assert rc == 0
    doc = json.loads(out)
    assert doc["delta_units"] == -40
    assert doc["n_real"] in (1, 3)
    assert set(doc["best"]) == {"a1", "a2", "12"}
    # identical walls: symmetric cavity entanglement
    assert doc["best"]["a1"]["E"] == pytest.approx(doc["best"]["a2"]["E"],
                                                   abs=1e-10)
    assert len(doc["roots"]) == doc["n_real"]
    assert set(doc["roots"][0]["negativity"]) <= {"a1", "a2", "12"}


def test_point_with_matrices_and_reduced_model(capsys):
    rc, out, _ = run(capsys, "point", "--baseline", "--delta-tilde", "-40",
                     "--on-line", "--dump-matrices", "--adiabatic",
                     "--root", "1")
    assert rc == 0
    doc = json.loads(out)
    mats = doc["matrices"]
    assert np.asarray(mats["1"]["drift"]).shape == (6, 6)
    assert len(mats["1"]["noise_diag"]) == 6
    ad = doc["adiabatic"]
    assert ad["converged"] is True and ad["iterations"] < 100
    assert ad["coupling_model"] == "direct"
    assert ad["E_12_reduced"] > 0.0 and ad["E_12_full"] > 0.0
    assert np.asarray(ad["drift"]).shape == (4, 4)


def test_point_output_file_and_manifest(tmp_path, capsys):
    out = tmp_path / "point.json"
    rc, _, _ = run(capsys, "point", "--baseline", "--delta-tilde", "-20",
                   "--geff", "0.1", "--output", str(out))
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["g_eff"] == 0.1
    manifest = json.loads((tmp_path / "point.json.manifest.json").read_text())
    assert manifest["kind"] == "point"
    assert manifest["spec"]["delta_units"] == -20


def test_point_requires_drive(capsys):
    rc, _, err = run(capsys, "point", "--baseline", "--delta-tilde", "-20")
    assert rc == 1
    assert "configuration error" in err and "--geff or --on-line" in err


def test_point_numerical_error_exit_code(capsys):
    # the root-exchange line does not exist at positive detuning
    rc, _, err = run(capsys, "point", "--baseline", "--delta-tilde", "0.5",
                     "--on-line")
    assert rc == 2
    assert "numerical error" in err


# ---------------------------------------------------------------------------
# parameter loading


def test_params_file_with_overrides(tmp_path, capsys):
    pfile = tmp_path / "params.json"
    pfile.write_text(json.dumps(baseline().to_dict()))
    rc, out, _ = run(capsys, "point", "--params", str(pfile),
                     "--temperature", "0.005", "--kappa-a", "3e6",
                     "--delta-tilde", "-20", "--geff", "0.1")
    assert rc == 0
    assert json.loads(out)["n_real"] >= 1


def test_params_and_baseline_conflict(tmp_path, capsys):
    pfile = tmp_path / "params.json"
    pfile.write_text(json.dumps(baseline().to_dict()))
    rc, _, err = run(capsys, "point", "--params", str(pfile), "--baseline",
                     "--delta-tilde", "-20", "--geff", "0.1")
    assert rc == 1 and "mutually exclusive" in err


def test_params_file_invalid_field_names_it(tmp_path, capsys):
    data = baseline().to_dict()
    data["kappa"] = [-1e6, 1e6]
    pfile = tmp_path / "bad.json"
    pfile.write_text(json.dumps(data))
    rc, _, err = run(capsys, "point", "--params", str(pfile),
                     "--delta-tilde", "-20", "--geff", "0.1")
    assert rc == 1
    assert "configuration error" in err and "kappa" in err


def test_frequency_convention_conflict(tmp_path, capsys):
    data = baseline().to_dict()
    data["frequency_input"] = "angular"
    pfile = tmp_path / "params.json"
    pfile.write_text(json.dumps(data))
    rc, _, err = run(capsys, "point", "--params", str(pfile),
                     "--frequency-convention", "ordinary",
                     "--delta-tilde", "-20", "--geff", "0.1")
    assert rc == 1 and "conflicts" in err


def test_missing_params_source(capsys):
    rc, _, err = run(capsys, "cut")
    assert rc == 1 and "configuration error" in err


# ---------------------------------------------------------------------------
# scans


def test_phase_smoke_grid(tmp_path, capsys):
    out = tmp_path / "phase.csv"
    rc, _, _ = run(capsys, "phase", "--baseline", "--resolution", "16",
                   "--output", str(out))
    assert rc == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 257
    manifest = json.loads((tmp_path / "phase.csv.manifest.json").read_text())
    assert manifest["spec"]["res_delta"] == 16
    assert manifest["outputs"] == [str(out)]


def test_cut_rerun_reproduces_bytes(tmp_path, capsys):
    out = tmp_path / "cut.csv"
    rc, _, _ = run(capsys, "cut", "--baseline", "--delta-range", "-30", "-5",
                   "--resolution", "20", "--output", str(out))
    assert rc == 0
    first = out.read_bytes()

    out2 = tmp_path / "cut2.csv"
    rc, _, _ = run(capsys, "rerun", str(tmp_path / "cut.csv.manifest.json"),
                   "--output", str(out2))
    assert rc == 0
    assert out2.read_bytes() == first


def test_cut_rejects_positive_range(tmp_path, capsys):
    rc, _, err = run(capsys, "cut", "--baseline", "--delta-range", "-3", "1",
                     "--output", str(tmp_path / "cut.csv"))
    assert rc == 1 and "negative" in err


def test_rerun_manifest_validation(tmp_path, capsys):
    bad = tmp_path / "m.json"
    bad.write_text(json.dumps({"kind": "phase"}))
    rc, _, err = run(capsys, "rerun", str(bad))
    assert rc == 1 and "missing" in err
    rc, _, err = run(capsys, "rerun", str(tmp_path / "absent.json"))
    assert rc == 1 and "cannot read manifest" in err


def test_spectrum_csv_layout(tmp_path, capsys):
    out = tmp_path / "spec.csv"
    rc, _, _ = run(capsys, "spectrum", "--baseline",
                   "--delta-range", "-30", "-15", "--delta-points", "5",
                   "--omega-points", "16", "--root", "1",
                   "--output", str(out))
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ("delta_tilde,omega,S,"
                        "re_lambda_1,re_lambda_2,re_lambda_3,re_lambda_4,"
                        "re_lambda_5,re_lambda_6,"
                        "im_lambda_1,im_lambda_2,im_lambda_3,im_lambda_4,"
                        "im_lambda_5,im_lambda_6")
    assert len(lines) == 1 + 5 * 16


def test_thermal_scan_with_cutoff(tmp_path, capsys):
    out = tmp_path / "thermal.csv"
    rc, stdout, _ = run(capsys, "thermal", "--baseline", "--axis",
                        "temperature", "--values", "1e-3", "2e-3", "5e-3",
                        "--cutoff", "--output", str(out))
    assert rc == 0
    assert "T_c = " in stdout and " K" in stdout
    lines = out.read_text().splitlines()
    assert lines[0] == "temperature,E_12" and len(lines) == 4
    manifest = json.loads((tmp_path / "thermal.csv.manifest.json").read_text())
    assert 1e-3 < manifest["result"]["T_c"] < 1e-2


def test_thermal_cutoff_bracket_failure_exit_code(tmp_path, capsys):
    rc, _, err = run(capsys, "thermal", "--baseline", "--axis", "temperature",
                     "--values", "20.0", "--cutoff", "--bracket", "10", "50",
                     "--output", str(tmp_path / "t.csv"))
    assert rc == 2 and "numerical error" in err


def test_thermal_axis_needs_values(tmp_path, capsys):
    rc, _, err = run(capsys, "thermal", "--baseline", "--axis", "temperature",
                     "--output", str(tmp_path / "t.csv"))
    assert rc == 1 and "--values or --start/--stop" in err
    rc, _, err = run(capsys, "thermal", "--baseline", "--axis", "temperature",
                     "--start", "0", "--stop", "1", "--log",
                     "--output", str(tmp_path / "t.csv"))
    assert rc == 1 and "positive" in err


# ---------------------------------------------------------------------------
# material derivation


def test_material_subcommand(tmp_path, capsys):
    from test_material import SPEC_KW

    spec_file = tmp_path / "material.json"
    spec_file.write_text(json.dumps(SPEC_KW))
    out = tmp_path / "derived.json"
    rc, _, _ = run(capsys, "material", "--spec", str(spec_file),
                   "--to-params", "--material-kappa-a", "2e6",
                   "--output", str(out))
    assert rc == 0
    doc = json.loads(out.read_text())
    assert len(doc["modes"]) == 2
    assert doc["modes"][0]["omega"] > 0
    sp = doc["system_params"]
    assert len(sp["omega"]) == 2 and sp["kappa_a"] == 2e6


def test_material_bad_spec_is_config_error(tmp_path, capsys):
    spec_file = tmp_path / "bad.json"
    spec_file.write_text("{not json")
    rc, _, err = run(capsys, "material", "--spec", str(spec_file),
                     "--output", str(tmp_path / "out.json"))
    assert rc == 1 and "configuration error" in err


# ---------------------------------------------------------------------------
# environment


def test_outdir_environment_variable(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DWCAVITY_OUTDIR", str(tmp_path))
    rc, _, _ = run(capsys, "cut", "--baseline", "--delta-range", "-30", "-5",
                   "--resolution", "8", "--output", "cut.csv")
    assert rc == 0
    assert (tmp_path / "cut.csv").exists()
    assert (tmp_path / "cut.csv.manifest.json").exists()


def test_no_subcommand_is_config_error(capsys):
    rc, _, err = run(capsys)
    assert rc == 1 and "subcommand is required" in err
