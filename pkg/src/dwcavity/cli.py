"""Command-line front end.

Dispatches the scan pipelines and single-point analyses, emitting CSV or
JSON data files plus a JSON manifest per run.  The manifest echoes the
fully resolved configuration — parameters in angular units and every
grid specification — so ``dwcavity rerun`` can replay a run and produce
bit-identical data files.

Axis conventions: detunings and probe frequencies are given in units of
the first oscillator frequency (the natural axis of the survey plots);
drive strengths are the dimensionless reduced amplitude.  Exit status is
0 on success, 1 on a configuration error, and 2 on a numerical error,
with the offending point recorded in the manifest when one was written.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__, sweep
from .entanglement import analyze_point
from .errors import DWCavityError, InvalidParamsError
from .linearized import build_drift, build_noise
from .params import ANGULAR, ORDINARY, SystemParams, baseline
from .spectrum import input_spectral_matrix, output_spectrum, track_branches
from .steadystate import bifurcation_geff, roots_from_reduced, reduced_to_drive
from .adiabatic import reduced_covariance, reduced_dw_model, solve_shifts
from .material import derive_all_modes, load_material_spec, to_system_params

__all__ = ["main", "build_parser"]

_SUBCOMMANDS = ("point", "phase", "cut", "spectrum", "thermal", "material", "rerun")


class _ConfigError(Exception):
    """Raised for any configuration problem; mapped to exit status 1."""


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as config errors."""

    def error(self, message):  # noqa: A003 - argparse API
        raise _ConfigError(message)


def _outdir() -> str | None:
    """Output directory override; the only environment-driven setting."""
    return os.environ.get("DWCAVITY_OUTDIR") or None


def _resolve_path(path: str) -> str:
    base = _outdir()
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _add_params_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("system parameters")
    g.add_argument("--params", metavar="FILE",
                   help="JSON file with the system parameters "
                        "(keys as in SystemParams.to_dict)")
    g.add_argument("--frequency-convention", choices=(ANGULAR, ORDINARY),
                   help="unit convention for rate-like entries of --params; "
                        "'ordinary' multiplies them by 2*pi at ingestion "
                        "(error if the file declares a conflicting one)")
    g.add_argument("--baseline", action="store_true",
                   help="use the built-in two-oscillator configuration "
                        "instead of --params")
    g.add_argument("--omega2-ratio", type=float, default=1.0,
                   help="with --baseline: second oscillator frequency over "
                        "the first (default 1)")
    g.add_argument("--temperature", type=float, default=None,
                   help="override the bath temperature in kelvin")
    g.add_argument("--kappa-a", type=float, default=None,
                   help="override the cavity decay rate in rad/s")


def _add_output_options(p: argparse.ArgumentParser, default_output: str) -> None:
    g = p.add_argument_group("output")
    g.add_argument("--output", default=default_output,
                   help=f"data file path (default {default_output}); relative "
                        "paths honour the DWCAVITY_OUTDIR environment variable")
    g.add_argument("--manifest", default=None,
                   help="manifest path (default: the data file plus "
                        "'.manifest.json')")
    g.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="data file format (default csv)")
    g.add_argument("--threads", type=int, default=None,
                   help="worker threads for grid evaluation (default: up to 8)")


def _load_params(args) -> SystemParams:
    if args.params and args.baseline:
        raise _ConfigError("--params and --baseline are mutually exclusive")
    if args.params:
        try:
            with open(args.params) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise _ConfigError(f"cannot read --params file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise _ConfigError(f"--params file is not valid JSON: {exc}") from exc
        conv = args.frequency_convention
        declared = data.get("frequency_input")
        if conv is not None:
            if declared is not None and declared != conv:
                raise _ConfigError(
                    f"--frequency-convention {conv} conflicts with "
                    f"frequency_input={declared!r} declared in the file"
                )
            data["frequency_input"] = conv
        try:
            p = SystemParams.from_dict(data)
        except InvalidParamsError as exc:
            raise _ConfigError(str(exc)) from exc
    elif args.baseline:
        try:
            p = baseline(omega2_ratio=args.omega2_ratio)
        except InvalidParamsError as exc:
            raise _ConfigError(str(exc)) from exc
    else:
        raise _ConfigError("one of --params or --baseline is required")
    from dataclasses import replace
    try:
        if args.temperature is not None:
            p = replace(p, temperature=args.temperature)
        if args.kappa_a is not None:
            p = replace(p, kappa_a=args.kappa_a)
    except InvalidParamsError as exc:
        raise _ConfigError(str(exc)) from exc
    return p


def _emit_rows(path: str, fmt: str, header: list[str], rows) -> None:
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join("%.17g" % v for v in row) + "\n")
    else:
        with open(path, "w") as fh:
            json.dump({"header": header, "rows": [list(map(float, r)) for r in rows]},
                      fh)
            fh.write("\n")


def _write_run(kind: str, params: SystemParams, config: dict, out_path: str,
               manifest_path: str | None, writer, t0: float) -> None:
    writer(out_path)
    manifest = sweep.run_manifest(kind, params, config, [out_path],
                                  wall_time=time.perf_counter() - t0)
    mp = manifest_path or out_path + ".manifest.json"
    sweep.write_manifest(mp, manifest)


def _fail_manifest(kind: str, params: SystemParams, config: dict,
                   out_path: str, manifest_path: str | None,
                   exc: DWCavityError, where: dict) -> None:
    manifest = sweep.run_manifest(kind, params, config, [],
                                  error={"message": str(exc),
                                         "type": type(exc).__name__, **where})
    mp = manifest_path or out_path + ".manifest.json"
    try:
        sweep.write_manifest(mp, manifest)
    except OSError:
        pass


# ---------------------------------------------------------------------------
# subcommand cores (shared by direct runs and manifest replay)

def _json_root(ra, dump_matrices: bool) -> dict:
    root = ra.root
    out = {
        "label": root.label,
        "is_real": root.is_real,
        "degenerate": root.degenerate,
        "nbar": root.nbar,
        "alpha": [root.alpha.real, root.alpha.imag],
        "beta": [[b.real, b.imag] for b in root.beta],
        "delta_eff": root.Delta_eff,
        "stable": None if ra.stability is None else ra.stability.stable,
        "max_re": None if ra.stability is None else ra.stability.max_real,
        "physical": ra.physical,
        "negativity": ra.negativity,
        "pt_symplectic": ra.pt_symplectic,
        "min_variance": ra.min_variance,
        "symplectic": None if ra.symplectic is None else list(ra.symplectic),
        "error": ra.error,
    }
    if dump_matrices and ra.covariance is not None:
        out["covariance"] = ra.covariance.tolist()
    return out


def _run_point(params: SystemParams, config: dict, out_path: str | None) -> dict:
    w1 = params.omega[0]
    dt = config["delta_units"] * w1
    if config.get("on_line"):
        geff = bifurcation_geff(params, dt) * (1.0 - config["inset"])
    else:
        geff = config["geff"]
    analysis = analyze_point(params, dt, geff)
    doc = {
        "delta_units": config["delta_units"],
        "delta_tilde": dt,
        "g_eff": geff,
        "n_real": analysis.n_real,
        "n_stable": analysis.n_stable,
        "best": {k: {"E": v[0], "root": v[1]} for k, v in analysis.best.items()},
        "roots": [_json_root(ra, config.get("dump_matrices", False))
                  for ra in analysis.roots],
    }
    if config.get("dump_matrices"):
        work = analysis.params
        mats = {}
        for ra in analysis.roots:
            if not ra.root.is_real:
                continue
            A = build_drift(work, ra.root)
            D, D0 = build_noise(work)
            mats[str(ra.root.label)] = {
                "drift": A.tolist(),
                "noise_diag": list(np.diag(D)),
                "input_coupling_diag": list(np.diag(D0)),
            }
        doc["matrices"] = mats
    if config.get("adiabatic"):
        doc["adiabatic"] = _adiabatic_section(analysis, config)
    return doc


def _adiabatic_section(analysis, config: dict) -> dict:
    """Reduced wall-only model at the point's requested root."""
    label = config.get("root", 0)
    work = analysis.params
    ra = next((r for r in analysis.roots if r.root.label == label), None)
    if ra is None or not ra.root.is_real:
        return {"error": f"root {label} is not real at this point"}
    try:
        eff = solve_shifts(work, ra.root,
                           coupling_model=config.get("coupling_model", "direct"))
        model = reduced_dw_model(work, ra.root, effective=eff,
                                 coupling_model=eff.coupling_model)
        out = {
            "converged": eff.converged,
            "iterations": eff.iterations,
            "omega_eff": list(eff.omega_eff),
            "kappa_eff": list(eff.kappa_eff),
            "coupling_model": eff.coupling_model,
            "drift": model.drift.tolist(),
        }
        Vr = reduced_covariance(work, ra.root, model=model)
        from .entanglement import log_negativity
        out["E_12_reduced"] = log_negativity(Vr, (0, 1)).E
        if "12" in ra.negativity:
            out["E_12_full"] = ra.negativity["12"]
        return out
    except DWCavityError as exc:
        return {"error": str(exc), "type": type(exc).__name__}


def _run_phase(params, config, out_path, fmt, threads):
    diagram = sweep.phase_diagram(
        params,
        (config["delta_lo"], config["delta_hi"]),
        (config["geff_lo"], config["geff_hi"]),
        (config["res_delta"], config["res_geff"]),
        threads=threads,
    )
    if fmt == "csv":
        sweep.phase_to_csv(diagram, out_path)
    else:
        header = ["delta_tilde", "g_eff"] + sweep._record_header()
        _emit_rows(out_path, fmt, header,
                   ([dt, ge] + sweep._record_row(diagram.records[i, j])
                    for i, dt in enumerate(diagram.delta_axis)
                    for j, ge in enumerate(diagram.geff_axis)))


def _run_cut(params, config, out_path, fmt, threads):
    cut = sweep.bifurcation_cut(
        params,
        (config["delta_lo"], config["delta_hi"]),
        resolution=config["resolution"],
        inset=config["inset"],
        threads=threads,
    )
    if fmt == "csv":
        sweep.cut_to_csv(cut, out_path)
    else:
        header = ["delta_tilde", "g_eff"] + sweep._record_header()
        _emit_rows(out_path, fmt, header,
                   ([dt, cut.geff_line[i]] + sweep._record_row(cut.records[i])
                    for i, dt in enumerate(cut.delta_axis)))


def _run_spectrum(params, config, out_path, fmt):
    w1 = params.omega[0]
    delta_axis = np.linspace(config["delta_lo"], config["delta_hi"],
                             config["delta_points"])
    omega_axis = np.linspace(config["omega_lo"], config["omega_hi"],
                             config["omega_points"])
    label = config["root"]
    inset = config["inset"]
    roots, works, mats = [], [], []
    for dt in delta_axis:
        geff = bifurcation_geff(params, dt) * (1.0 - inset)
        root = roots_from_reduced(params, dt, geff)[label]
        Da, xi = reduced_to_drive(params, dt, geff)
        work = params.with_drive(Da, xi)
        roots.append(root)
        works.append(work)
        mats.append(build_drift(work, root))
    branches = track_branches(delta_axis, mats)
    header = (["delta_tilde", "omega", "S"]
              + [f"re_lambda_{b}" for b in range(1, 7)]
              + [f"im_lambda_{b}" for b in range(1, 7)])

    def rows():
        for i, dt in enumerate(delta_axis):
            lam = branches.lambdas[i]
            eig_cols = list(lam.real) + list(lam.imag)
            stable = bool(np.max(lam.imag) < 0.0)
            if stable:
                _, D0 = build_noise(works[i])
                chi = input_spectral_matrix(works[i])
                grid = output_spectrum(mats[i], D0, chi, omega_axis,
                                       root_index=label)
                svals = grid.S
            else:
                svals = np.full(omega_axis.size, np.nan)
            for j, w in enumerate(omega_axis):
                yield [dt, w, svals[j]] + eig_cols

    _emit_rows(out_path, fmt, header, rows())


def _run_thermal(params, config, out_path, fmt, threads):
    scan = sweep.thermal_scan(
        params, config["axis"], np.asarray(config["values"], dtype=float),
        delta_units=config["delta_units"],
        inset=config["inset"],
        scaling_mode=config["scaling_mode"],
        threads=threads,
    )
    result = {"monotone_tail": scan.monotone_tail}
    if config.get("cutoff"):
        tc = sweep.find_cutoff_temperature(
            params, threshold=config["threshold"],
            bracket=tuple(config["bracket"]),
            delta_units=config["delta_units"], inset=config["inset"],
        )
        result["T_c"] = tc
    if fmt == "csv":
        sweep.thermal_to_csv(scan, out_path)
    else:
        _emit_rows(out_path, fmt, [scan.kind, "E_12"],
                   ([a, e] for a, e in zip(scan.axis, scan.E_12)))
    return result


def _run_material(config, out_path) -> SystemParams | None:
    spec = load_material_spec(config["spec_file"])
    modes = derive_all_modes(spec)
    doc = {"modes": [m.to_dict() for m in modes]}
    params = None
    if config.get("to_params"):
        params = to_system_params(spec, kappa_a=config["material_kappa_a"],
                                  Delta_a=config.get("Delta_a", 0.0),
                                  xi=config.get("xi", 0.0),
                                  temperature=config.get("temperature", 0.0))
        doc["system_params"] = params.to_dict()
    with open(out_path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return params


# ---------------------------------------------------------------------------
# argument wiring

def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="dwcavity",
                  description="Steady states, entanglement, spectra and scans "
                              "of a driven cavity coupled to two pinned "
                              "domain-wall oscillators.")
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="subcommand", metavar="SUBCOMMAND",
                             parser_class=_Parser)

    p = sub.add_parser("point",
                       help="analyze all roots at one (detuning, drive) point",
                       description="Full per-root analysis at one working "
                                   "point; JSON output.")
    _add_params_options(p)
    p.add_argument("--delta-tilde", type=float, required=True,
                   help="effective detuning in units of the first oscillator "
                        "frequency (negative for the driven regimes)")
    p.add_argument("--geff", type=float, default=None,
                   help="dimensionless drive strength")
    p.add_argument("--on-line", action="store_true",
                   help="place the drive on the root-exchange line instead "
                        "of giving --geff")
    p.add_argument("--inset", type=float, default=sweep.DEFAULT_CUT_INSET,
                   help="relative drive reduction below the line with "
                        "--on-line (default %(default)g)")
    p.add_argument("--dump-matrices", action="store_true",
                   help="include drift/noise/covariance matrices in the output")
    p.add_argument("--adiabatic", action="store_true",
                   help="append the reduced wall-only model at --root")
    p.add_argument("--root", type=int, default=0,
                   help="root label for --adiabatic (default 0)")
    p.add_argument("--coupling-model", default="direct",
                   choices=("direct", "resolved", "dispersive"),
                   help="coupling treatment for --adiabatic (default direct)")
    p.add_argument("--output", default=None,
                   help="JSON output path (default: stdout); relative paths "
                        "honour DWCAVITY_OUTDIR")
    p.add_argument("--manifest", default=None,
                   help="manifest path (with --output; default: output + "
                        "'.manifest.json')")

    p = sub.add_parser("phase",
                       help="two-dimensional (detuning, drive) survey",
                       description="Per-cell root/stability/entanglement "
                                   "records over a rectangular grid.")
    _add_params_options(p)
    p.add_argument("--delta-range", type=float, nargs=2, default=(-3.0, 1.0),
                   metavar=("LO", "HI"),
                   help="detuning range in units of the first oscillator "
                        "frequency (default %(default)s)")
    p.add_argument("--geff-range", type=float, nargs=2, default=(0.0, 1.0),
                   metavar=("LO", "HI"),
                   help="drive range, dimensionless (default %(default)s)")
    p.add_argument("--resolution", type=int, nargs="+", default=[64],
                   help="grid points per axis: one value for both axes or "
                        "two values (detuning, drive); minimum 16")
    _add_output_options(p, "phase.csv")

    p = sub.add_parser("cut",
                       help="scan along the root-exchange line",
                       description="Per-point records along the "
                                   "stability-exchange drive line.")
    _add_params_options(p)
    p.add_argument("--delta-range", type=float, nargs=2,
                   default=list(sweep.DEFAULT_CUT_RANGE_UNITS),
                   metavar=("LO", "HI"),
                   help="detuning range in units of the first oscillator "
                        "frequency, negative (default %(default)s)")
    p.add_argument("--resolution", type=int, default=50,
                   help="number of cut points (default %(default)s)")
    p.add_argument("--inset", type=float, default=sweep.DEFAULT_CUT_INSET,
                   help="relative drive reduction below the line "
                        "(default %(default)g)")
    _add_output_options(p, "cut.csv")

    p = sub.add_parser("spectrum",
                       help="reflected-noise spectra along the line",
                       description="Output spectrum and eigenvalue branches "
                                   "for one root along the exchange line.")
    _add_params_options(p)
    p.add_argument("--delta-range", type=float, nargs=2, required=True,
                   metavar=("LO", "HI"),
                   help="detuning sweep range in units of the first "
                        "oscillator frequency")
    p.add_argument("--delta-points", type=int, default=101,
                   help="sweep points (default %(default)s)")
    p.add_argument("--omega-range", type=float, nargs=2, default=(0.0, 2.5),
                   metavar=("LO", "HI"),
                   help="probe frequency range in units of the first "
                        "oscillator frequency (default %(default)s)")
    p.add_argument("--omega-points", type=int, default=201,
                   help="probe frequency points (default %(default)s)")
    p.add_argument("--root", type=int, default=0, choices=(0, 1, 2),
                   help="root branch label (default %(default)s)")
    p.add_argument("--inset", type=float, default=sweep.DEFAULT_CUT_INSET,
                   help="relative drive reduction below the line "
                        "(default %(default)g)")
    _add_output_options(p, "spectrum.csv")

    p = sub.add_parser("thermal",
                       help="thermal-stability scans and cutoff search",
                       description="Pair entanglement against temperature, "
                                   "damping ratio or frequency scale.")
    _add_params_options(p)
    p.add_argument("--axis", required=True,
                   choices=("temperature", "kappa_ratio", "omega_scale"),
                   help="swept quantity")
    p.add_argument("--start", type=float, default=None,
                   help="axis start (kelvin, ratio, or scale factor)")
    p.add_argument("--stop", type=float, default=None, help="axis end")
    p.add_argument("--points", type=int, default=33,
                   help="number of axis points (default %(default)s)")
    p.add_argument("--log", action="store_true",
                   help="space the axis geometrically instead of linearly")
    p.add_argument("--values", type=float, nargs="+", default=None,
                   help="explicit axis values (overrides --start/--stop)")
    p.add_argument("--delta-units", type=float,
                   default=sweep.DEFAULT_THERMAL_DELTA_UNITS,
                   help="operating detuning in units of the first oscillator "
                        "frequency (default %(default)s)")
    p.add_argument("--inset", type=float, default=sweep.DEFAULT_CUT_INSET,
                   help="line inset at the operating point "
                        "(default %(default)g)")
    p.add_argument("--scaling-mode", default="scaled",
                   choices=("scaled", "fixed_rates"),
                   help="how dampings/couplings follow an omega_scale axis "
                        "(default %(default)s)")
    p.add_argument("--cutoff", action="store_true",
                   help="also bisect for the cutoff temperature")
    p.add_argument("--threshold", type=float, default=1e-4,
                   help="entanglement extinction threshold for --cutoff "
                        "(default %(default)g)")
    p.add_argument("--bracket", type=float, nargs=2, default=(1e-4, 50.0),
                   metavar=("LO", "HI"),
                   help="temperature bracket in kelvin for --cutoff "
                        "(default %(default)s)")
    _add_output_options(p, "thermal.csv")

    p = sub.add_parser("material",
                       help="derive oscillator parameters from material data",
                       description="Closed-form mode frequencies, dampings "
                                   "and couplings from a material JSON spec.")
    p.add_argument("--spec", required=True, metavar="FILE",
                   help="material specification JSON file")
    p.add_argument("--to-params", action="store_true",
                   help="also emit a full system-parameter set")
    p.add_argument("--material-kappa-a", type=float, default=2e6,
                   help="cavity decay rate in rad/s for --to-params "
                        "(default %(default)g)")
    p.add_argument("--temperature", type=float, default=0.0,
                   help="bath temperature in kelvin for --to-params "
                        "(default %(default)g)")
    p.add_argument("--output", default="material.json",
                   help="JSON output path (default %(default)s); relative "
                        "paths honour DWCAVITY_OUTDIR")
    p.add_argument("--manifest", default=None,
                   help="manifest path (default: output + '.manifest.json')")

    p = sub.add_parser("rerun",
                       help="replay a run from its manifest",
                       description="Re-execute a recorded run; with the same "
                                   "output path the data file is reproduced "
                                   "bit for bit.")
    p.add_argument("manifest_file", metavar="MANIFEST",
                   help="manifest JSON written by a previous run")
    p.add_argument("--output", default=None,
                   help="override the recorded data file path")

    return top


def _thermal_values(args) -> list[float]:
    if args.values is not None:
        return [float(v) for v in args.values]
    if args.start is None or args.stop is None:
        raise _ConfigError("thermal scans need --values or --start/--stop")
    if args.points < 1:
        raise _ConfigError(f"--points must be >= 1, got {args.points}")
    if args.log:
        if args.start <= 0 or args.stop <= 0:
            raise _ConfigError("--log spacing needs positive --start/--stop")
        return list(np.geomspace(args.start, args.stop, args.points))
    return list(np.linspace(args.start, args.stop, args.points))


def _dispatch(args) -> int:
    kind = args.subcommand
    if kind is None:
        raise _ConfigError("a subcommand is required (see --help)")

    if kind == "rerun":
        return _dispatch_rerun(args)

    if kind == "material":
        config = {
            "spec_file": args.spec,
            "to_params": args.to_params,
            "material_kappa_a": args.material_kappa_a,
            "temperature": args.temperature,
        }
        out_path = _resolve_path(args.output)
        t0 = time.perf_counter()
        try:
            params = _run_material(config, out_path)
        except (OSError, json.JSONDecodeError) as exc:
            raise _ConfigError(f"cannot read material spec: {exc}") from exc
        except InvalidParamsError as exc:
            raise _ConfigError(str(exc)) from exc
        echo = params if params is not None else baseline()
        _write_run("material", echo, config, out_path, args.manifest, lambda _: None, t0)
        return 0

    params = _load_params(args)
    w1 = params.omega[0]

    if kind == "point":
        config = {
            "delta_units": args.delta_tilde,
            "on_line": args.on_line,
            "inset": args.inset,
            "geff": args.geff,
            "dump_matrices": args.dump_matrices,
            "adiabatic": args.adiabatic,
            "root": args.root,
            "coupling_model": args.coupling_model,
        }
        if not args.on_line and args.geff is None:
            raise _ConfigError("point needs --geff or --on-line")
        out_path = _resolve_path(args.output) if args.output else None
        t0 = time.perf_counter()
        try:
            doc = _run_point(params, config, out_path)
        except DWCavityError as exc:
            if out_path:
                _fail_manifest("point", params, config, out_path, args.manifest,
                               exc, {"delta_units": args.delta_tilde})
            print(f"numerical error: {exc}", file=sys.stderr)
            return 2
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        if out_path:
            with open(out_path, "w") as fh:
                fh.write(text)
            _write_run("point", params, config, out_path, args.manifest,
                       lambda _: None, t0)
        else:
            sys.stdout.write(text)
        return 0

    # grid-style subcommands share the output/threads/format options
    out_path = _resolve_path(args.output)
    manifest_path = args.manifest and _resolve_path(args.manifest)
    t0 = time.perf_counter()

    if kind == "phase":
        res = args.resolution
        if len(res) == 1:
            res = [res[0], res[0]]
        if len(res) != 2:
            raise _ConfigError("--resolution takes one or two integers")
        config = {
            "delta_lo": args.delta_range[0] * w1,
            "delta_hi": args.delta_range[1] * w1,
            "geff_lo": args.geff_range[0],
            "geff_hi": args.geff_range[1],
            "res_delta": res[0],
            "res_geff": res[1],
            "format": args.format,
        }
        runner = lambda path: _run_phase(params, config, path, args.format,
                                         args.threads)
    elif kind == "cut":
        if args.delta_range[0] >= 0 or args.delta_range[1] >= 0:
            raise _ConfigError("cut --delta-range must be negative")
        config = {
            "delta_lo": args.delta_range[0] * w1,
            "delta_hi": args.delta_range[1] * w1,
            "resolution": args.resolution,
            "inset": args.inset,
            "format": args.format,
        }
        runner = lambda path: _run_cut(params, config, path, args.format,
                                       args.threads)
    elif kind == "spectrum":
        config = {
            "delta_lo": args.delta_range[0] * w1,
            "delta_hi": args.delta_range[1] * w1,
            "delta_points": args.delta_points,
            "omega_lo": args.omega_range[0] * w1,
            "omega_hi": args.omega_range[1] * w1,
            "omega_points": args.omega_points,
            "root": args.root,
            "inset": args.inset,
            "format": args.format,
        }
        runner = lambda path: _run_spectrum(params, config, path, args.format)
    elif kind == "thermal":
        config = {
            "axis": args.axis,
            "values": _thermal_values(args),
            "delta_units": args.delta_units,
            "inset": args.inset,
            "scaling_mode": args.scaling_mode,
            "cutoff": args.cutoff,
            "threshold": args.threshold,
            "bracket": list(args.bracket),
            "format": args.format,
        }
        runner = lambda path: _run_thermal(params, config, path, args.format,
                                           args.threads)
    else:  # pragma: no cover - argparse restricts choices
        raise _ConfigError(f"unknown subcommand {kind!r}")

    try:
        extra = runner(out_path)
    except InvalidParamsError as exc:
        raise _ConfigError(str(exc)) from exc
    except DWCavityError as exc:
        _fail_manifest(kind, params, config, out_path, manifest_path, exc,
                       {"config": config})
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    if isinstance(extra, dict) and "T_c" in extra:
        print(f"T_c = {extra['T_c']:.6g} K")
    manifest = sweep.run_manifest(kind, params, config, [out_path],
                                  wall_time=time.perf_counter() - t0)
    if isinstance(extra, dict):
        manifest["result"] = extra
    sweep.write_manifest(manifest_path or out_path + ".manifest.json", manifest)
    return 0


def _dispatch_rerun(args) -> int:
    try:
        with open(args.manifest_file) as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise _ConfigError(f"cannot read manifest: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _ConfigError(f"manifest is not valid JSON: {exc}") from exc
    for key in ("kind", "params", "spec"):
        if key not in manifest:
            raise _ConfigError(f"manifest is missing the {key!r} entry")
    kind = manifest["kind"]
    if kind not in _SUBCOMMANDS or kind == "rerun":
        raise _ConfigError(f"manifest records unknown subcommand {kind!r}")
    config = manifest["spec"]
    try:
        params = SystemParams.from_dict(manifest["params"])
    except InvalidParamsError as exc:
        raise _ConfigError(f"manifest parameters invalid: {exc}") from exc
    recorded = manifest.get("outputs") or [None]
    out_path = args.output or recorded[0]
    if out_path is None:
        raise _ConfigError("manifest records no output path; use --output")
    out_path = _resolve_path(out_path)
    fmt = config.get("format", "csv")
    t0 = time.perf_counter()
    try:
        if kind == "point":
            doc = _run_point(params, config, out_path)
            with open(out_path, "w") as fh:
                fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
            extra = None
        elif kind == "phase":
            extra = _run_phase(params, config, out_path, fmt, None)
        elif kind == "cut":
            extra = _run_cut(params, config, out_path, fmt, None)
        elif kind == "spectrum":
            extra = _run_spectrum(params, config, out_path, fmt)
        elif kind == "thermal":
            extra = _run_thermal(params, config, out_path, fmt, None)
        else:  # material
            _run_material(config, out_path)
            extra = None
    except DWCavityError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    manifest_out = sweep.run_manifest(kind, params, config, [out_path],
                                      wall_time=time.perf_counter() - t0)
    if isinstance(extra, dict):
        manifest_out["result"] = extra
    sweep.write_manifest(out_path + ".manifest.json", manifest_out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _dispatch(args)
    except _ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
