"""Grid, line and thermal scans over the driven-cavity parameter space.

Reproduces the survey datasets: two-dimensional phase diagrams over
(detuning, drive strength), one-dimensional cuts along the root-exchange
line, and thermal/damping scans with a cutoff-temperature search.  Every
scan is a pure function of its parameters evaluated cell by cell through
the kernel layer, parallelized over rows with a bounded thread pool, and
serialized to CSV with full-precision, order-stable formatting so that
identical inputs give bit-identical files regardless of thread schedule.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from ._impl import (
    NREC,
    REC_EMAX_12,
    REC_EMAX_A1,
    REC_EMAX_A2,
    REC_ERROR,
    REC_MASK,
    REC_NREAL,
    REC_NSTABLE,
    REC_NUMIN_12,
    REC_NUMIN_A1,
    REC_NUMIN_A2,
    REC_ROOT_12,
    REC_ROOT_A1,
    REC_ROOT_A2,
    REC_ROOT_BASE,
    REC_ROOT_STRIDE,
    RF_DEGEN,
    RF_DELTA,
    RF_E_A1,
    RF_MAXRE,
    RF_MINSYM,
    RF_NBAR,
    RF_NU_A1,
    RF_REAL,
    RF_STABLE,
)
from .errors import BracketError, InvalidParamsError
from .linearized import CONDITION_RTOL, RESIDUAL_RTOL, STABILITY_RTOL
from .params import SystemParams
from .steadystate import bifurcation_geff

__all__ = [
    "PhaseDiagram",
    "CutResult",
    "ThermalScan",
    "DEFAULT_CUT_RANGE_UNITS",
    "DEFAULT_CUT_INSET",
    "phase_diagram",
    "bifurcation_cut",
    "thermal_scan",
    "find_cutoff_temperature",
    "scaled_params",
    "with_kappa_ratio",
    "cut_point_entanglement",
    "phase_to_csv",
    "cut_to_csv",
    "thermal_to_csv",
    "run_manifest",
    "write_manifest",
]

#: standard line-cut detuning range in units of omega_1
DEFAULT_CUT_RANGE_UNITS = (-50.0, -0.1)

#: relative drive inset below the root-exchange line used by line cuts.
#: On the line itself two roots coincide and the covariance problem is
#: marginal; stepping the drive down by this fraction keeps every
#: measure well conditioned while staying converged (the cut datasets
#: change by < 1e-2 relative between insets 1e-2 and 1e-3).
DEFAULT_CUT_INSET = 1e-3

#: operating point of the thermal scans, in units of omega_1
DEFAULT_THERMAL_DELTA_UNITS = -40.0

_THERMAL_KINDS = ("temperature", "kappa_ratio", "omega_scale")
_SCALING_MODES = ("scaled", "fixed_rates")

_FLOAT_FMT = "%.17g"

_ROOT_FIELD_NAMES = (
    "nbar", "real", "degenerate", "stable", "max_re", "delta_eff",
    "min_symplectic", "E_a1", "E_a2", "E_12", "nu_a1", "nu_a2", "nu_12",
)

_SUMMARY_NAMES = (
    "n_real", "n_stable", "stable_mask", "error_bits",
    "E_a1_max", "root_a1", "E_a2_max", "root_a2", "E_12_max", "root_12",
    "nu_a1_min", "nu_a2_min", "nu_12_min",
)


def _record_header() -> list[str]:
    cols = list(_SUMMARY_NAMES[:4])
    for k in range(3):
        cols += [f"{name}_{k}" for name in _ROOT_FIELD_NAMES]
    cols += list(_SUMMARY_NAMES[4:])
    return cols


def _record_row(rec: np.ndarray) -> list[float]:
    vals = [rec[REC_NREAL], rec[REC_NSTABLE], rec[REC_MASK], rec[REC_ERROR]]
    for k in range(3):
        base = REC_ROOT_BASE + REC_ROOT_STRIDE * k
        vals += list(rec[base:base + REC_ROOT_STRIDE])
    vals += [rec[REC_EMAX_A1], rec[REC_ROOT_A1], rec[REC_EMAX_A2],
             rec[REC_ROOT_A2], rec[REC_EMAX_12], rec[REC_ROOT_12],
             rec[REC_NUMIN_A1], rec[REC_NUMIN_A2], rec[REC_NUMIN_12]]
    return vals


def _kernel_args(params: SystemParams):
    if params.n_modes != 2:
        raise InvalidParamsError(
            f"scans require exactly two oscillator modes, got {params.n_modes}"
        )
    return (
        np.asarray(params.omega, dtype=float),
        np.asarray(params.kappa, dtype=float),
        np.asarray(params.g, dtype=float),
        float(params.kappa_a),
        np.asarray(params.mode_occupations(), dtype=float),
        float(params.cavity_occupation),
        STABILITY_RTOL,
        CONDITION_RTOL,
        RESIDUAL_RTOL,
    )


def _default_threads(threads: int | None) -> int:
    if threads is not None:
        if threads < 1:
            raise InvalidParamsError(f"threads must be >= 1, got {threads}")
        return int(threads)
    return min(os.cpu_count() or 1, 8)


def _parallel_rows(n_rows: int, threads: int, work):
    """Run ``work(i0, i1)`` over disjoint row blocks on a thread pool.

    Each block writes into a distinct slice of a preallocated array, so
    the result is independent of scheduling order.
    """
    threads = min(threads, n_rows)
    if threads <= 1:
        work(0, n_rows)
        return
    bounds = np.linspace(0, n_rows, threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(work, bounds[t], bounds[t + 1])
                   for t in range(threads) if bounds[t] < bounds[t + 1]]
        for f in futures:
            f.result()


class _RecordView:
    """Shared named access into arrays of flat cell records."""

    records: np.ndarray

    def _rec(self, index: int) -> np.ndarray:
        return self.records[..., index]

    @property
    def n_real_roots(self) -> np.ndarray:
        return self._rec(REC_NREAL).astype(int)

    @property
    def n_stable_roots(self) -> np.ndarray:
        return self._rec(REC_NSTABLE).astype(int)

    @property
    def stable_mask(self) -> np.ndarray:
        """Bitmask per cell: bit k set means root branch k is stable."""
        return self._rec(REC_MASK).astype(int)

    @property
    def error_bits(self) -> np.ndarray:
        """Per-cell error flags: 1 residual, 2 conditioning, 4 physicality."""
        return self._rec(REC_ERROR).astype(int)

    def phase_label(self) -> np.ndarray:
        """Sorted tuple of stable branch labels per cell, as an object array."""
        mask = self.stable_mask
        out = np.empty(mask.shape, dtype=object)
        it = np.nditer(mask, flags=["multi_index"])
        for m in it:
            out[it.multi_index] = tuple(k for k in range(3) if int(m) >> k & 1)
        return out

    def root_field(self, name: str, k: int) -> np.ndarray:
        """Per-root field by name; see the CSV header for the name list."""
        offset = _ROOT_FIELD_NAMES.index(name)
        return self._rec(REC_ROOT_BASE + REC_ROOT_STRIDE * k + offset)

    @property
    def E_a1(self) -> np.ndarray:
        """Max over stable roots of the cavity/mode-1 log-negativity."""
        return self._rec(REC_EMAX_A1)

    @property
    def E_a2(self) -> np.ndarray:
        return self._rec(REC_EMAX_A2)

    @property
    def E_12(self) -> np.ndarray:
        return self._rec(REC_EMAX_12)

    @property
    def best_root(self) -> dict[str, np.ndarray]:
        """Branch label attaining each per-pair maximum (NaN when none)."""
        return {
            "a1": self._rec(REC_ROOT_A1),
            "a2": self._rec(REC_ROOT_A2),
            "12": self._rec(REC_ROOT_12),
        }

    @property
    def nu_min(self) -> dict[str, np.ndarray]:
        """Smallest pair variance over stable roots, per mode pair."""
        return {
            "a1": self._rec(REC_NUMIN_A1),
            "a2": self._rec(REC_NUMIN_A2),
            "12": self._rec(REC_NUMIN_12),
        }


@dataclass(frozen=True)
class PhaseDiagram(_RecordView):
    """Cell records over a (detuning, drive) grid.

    ``records[i, j]`` is the flat record for ``delta_axis[i]``,
    ``geff_axis[j]``; named accessors expose the usual per-cell and
    per-root quantities as 2-d arrays.
    """

    delta_axis: np.ndarray
    geff_axis: np.ndarray
    records: np.ndarray
    params: SystemParams


@dataclass(frozen=True)
class CutResult(_RecordView):
    """Cell records along the root-exchange line.

    ``geff_line[i]`` is the drive actually used at ``delta_axis[i]``
    (the line value reduced by ``inset``).
    """

    delta_axis: np.ndarray
    geff_line: np.ndarray
    records: np.ndarray
    inset: float
    params: SystemParams


@dataclass(frozen=True)
class ThermalScan:
    """Line scan of the oscillator-pair entanglement at the thermal
    operating point.

    ``kind`` names the swept quantity (``temperature`` in kelvin,
    ``kappa_ratio`` = kappa_a/kappa_1, or ``omega_scale`` as a factor on
    the oscillator frequencies).  ``monotone_tail`` records whether
    ``E_12`` is non-increasing beyond its maximum, which a temperature
    scan should satisfy up to grid noise.
    """

    kind: str
    axis: np.ndarray
    E_12: np.ndarray
    params: SystemParams
    delta_units: float
    scaling_mode: str | None = None
    monotone_tail: bool = True
    T_c: float | None = None


def phase_diagram(params: SystemParams, delta_range, geff_range,
                  resolution, threads: int | None = None) -> PhaseDiagram:
    """Evaluate the full per-cell pipeline over a rectangular grid.

    Parameters
    ----------
    params : SystemParams
        Undriven configuration; the drive is set per cell from the
        reduced coordinates.
    delta_range, geff_range : (float, float)
        Inclusive axis ranges: effective detuning in rad/s and
        dimensionless drive strength.
    resolution : int or (int, int)
        Points per axis (detuning, drive); at least 16 each.
    threads : int, optional
        Worker threads; rows are split into disjoint blocks, and the
        output is identical for any thread count.
    """
    if np.isscalar(resolution):
        res_d = res_g = int(resolution)
    else:
        res_d, res_g = (int(r) for r in resolution)
    if res_d < 16 or res_g < 16:
        raise InvalidParamsError(
            f"phase diagrams need at least 16 points per axis, got {res_d}x{res_g}"
        )
    delta_axis = np.linspace(float(delta_range[0]), float(delta_range[1]), res_d)
    geff_axis = np.linspace(float(geff_range[0]), float(geff_range[1]), res_g)
    args = _kernel_args(params)
    records = np.empty((res_d, res_g, NREC), dtype=float)

    def work(i0: int, i1: int) -> None:
        kernels.grid_eval(delta_axis[i0:i1], geff_axis, *args,
                          records[i0:i1])

    _parallel_rows(res_d, _default_threads(threads), work)
    return PhaseDiagram(delta_axis=delta_axis, geff_axis=geff_axis,
                        records=records, params=params)


def bifurcation_cut(params: SystemParams, delta_range=None, resolution: int = 50,
                    inset: float = DEFAULT_CUT_INSET,
                    threads: int | None = None) -> CutResult:
    """Evaluate the pipeline along the root-exchange line.

    At each detuning the drive is placed a relative ``inset`` below the
    closed-form exchange-line amplitude; see :data:`DEFAULT_CUT_INSET`.
    ``delta_range`` defaults to :data:`DEFAULT_CUT_RANGE_UNITS` times
    the first oscillator frequency and must be negative throughout.
    """
    w1 = params.omega[0]
    if delta_range is None:
        delta_range = (DEFAULT_CUT_RANGE_UNITS[0] * w1,
                       DEFAULT_CUT_RANGE_UNITS[1] * w1)
    lo, hi = float(delta_range[0]), float(delta_range[1])
    if lo >= 0.0 or hi >= 0.0:
        raise InvalidParamsError(
            f"the root-exchange line exists only for negative detuning, "
            f"got range ({lo:g}, {hi:g})"
        )
    if resolution < 2:
        raise InvalidParamsError(f"cut resolution must be >= 2, got {resolution}")
    if not (0.0 <= inset < 1.0):
        raise InvalidParamsError(f"inset must lie in [0, 1), got {inset}")
    delta_axis = np.linspace(lo, hi, int(resolution))
    geff_line = np.array(
        [bifurcation_geff(params, dt) * (1.0 - inset) for dt in delta_axis]
    )
    args = _kernel_args(params)
    records = np.empty((delta_axis.size, NREC), dtype=float)

    def work(i0: int, i1: int) -> None:
        for i in range(i0, i1):
            kernels.cell_eval(delta_axis[i], geff_line[i], *args, records[i])

    _parallel_rows(delta_axis.size, _default_threads(threads), work)
    return CutResult(delta_axis=delta_axis, geff_line=geff_line,
                     records=records, inset=float(inset), params=params)


def cut_point_entanglement(params: SystemParams,
                           delta_units: float = DEFAULT_THERMAL_DELTA_UNITS,
                           inset: float = DEFAULT_CUT_INSET) -> float:
    """Oscillator-pair log-negativity at one point of the line cut.

    Returns the maximum over stable roots; 0 when no stable root carries
    entanglement.  This is the scalar objective of the thermal scans.
    """
    dt = float(delta_units) * params.omega[0]
    geff = bifurcation_geff(params, dt) * (1.0 - inset)
    rec = np.empty(NREC, dtype=float)
    kernels.cell_eval(dt, geff, *_kernel_args(params), rec)
    value = rec[REC_EMAX_12]
    return float(value) if np.isfinite(value) else 0.0


def with_kappa_ratio(params: SystemParams, ratio: float) -> SystemParams:
    """Copy with the cavity decay set to ``ratio`` times the first
    oscillator damping."""
    if ratio <= 0.0:
        raise InvalidParamsError(f"kappa ratio must be positive, got {ratio}")
    return replace(params, kappa_a=float(ratio) * params.kappa[0])


def scaled_params(params: SystemParams, factor: float,
                  mode: str = "scaled") -> SystemParams:
    """Rescale the oscillator frequency scale by ``factor``.

    ``mode="scaled"`` multiplies every rate — oscillator frequencies,
    dampings, couplings and the cavity decay — leaving all dimensionless
    ratios unchanged, so every zero-temperature measure is invariant and
    thermal behaviour maps onto a rescaled temperature axis.
    ``mode="fixed_rates"`` multiplies the oscillator frequencies only,
    keeping the physical dampings and couplings; the dimensionless
    coupling then shrinks with ``factor``.
    """
    if factor <= 0.0:
        raise InvalidParamsError(f"scale factor must be positive, got {factor}")
    if mode not in _SCALING_MODES:
        raise InvalidParamsError(
            f"unknown scaling mode {mode!r}; expected one of {_SCALING_MODES}"
        )
    factor = float(factor)
    omega = tuple(w * factor for w in params.omega)
    if mode == "fixed_rates":
        return replace(params, omega=omega)
    return replace(
        params,
        omega=omega,
        kappa=tuple(k * factor for k in params.kappa),
        g=tuple(v * factor for v in params.g),
        kappa_a=params.kappa_a * factor,
    )


def _thermal_point(params: SystemParams, kind: str, value: float,
                   delta_units: float, inset: float,
                   scaling_mode: str) -> float:
    if kind == "temperature":
        p = replace(params, temperature=float(value))
    elif kind == "kappa_ratio":
        p = with_kappa_ratio(params, value)
    else:
        p = scaled_params(params, value, mode=scaling_mode)
    return cut_point_entanglement(p, delta_units=delta_units, inset=inset)


def thermal_scan(params: SystemParams, kind: str, values,
                 delta_units: float = DEFAULT_THERMAL_DELTA_UNITS,
                 inset: float = DEFAULT_CUT_INSET,
                 scaling_mode: str = "scaled",
                 threads: int | None = None) -> ThermalScan:
    """Scan the oscillator-pair entanglement along one thermal axis.

    ``kind`` selects the swept quantity (see :class:`ThermalScan`); the
    remaining parameters are held at the thermal operating point — a
    line-cut evaluation at ``delta_units`` times the first oscillator
    frequency.  For ``kind="omega_scale"``, ``scaling_mode`` chooses how
    the other rates follow the frequencies (see :func:`scaled_params`).
    """
    if kind not in _THERMAL_KINDS:
        raise InvalidParamsError(
            f"unknown thermal axis {kind!r}; expected one of {_THERMAL_KINDS}"
        )
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 1:
        raise InvalidParamsError("thermal axis must be a non-empty 1-d sequence")
    out = np.empty(values.size, dtype=float)

    def work(i0: int, i1: int) -> None:
        for i in range(i0, i1):
            out[i] = _thermal_point(params, kind, values[i], delta_units,
                                    inset, scaling_mode)

    _parallel_rows(values.size, _default_threads(threads), work)

    # check the expected decay beyond the maximum (up to grid noise)
    imax = int(np.argmax(out))
    tail = out[imax:]
    noise = 1e-10 + 1e-6 * float(np.max(out, initial=0.0))
    monotone = bool(np.all(np.diff(tail) <= noise))
    return ThermalScan(kind=kind, axis=values, E_12=out, params=params,
                       delta_units=float(delta_units),
                       scaling_mode=scaling_mode if kind == "omega_scale" else None,
                       monotone_tail=monotone)


def find_cutoff_temperature(params: SystemParams, threshold: float = 1e-4,
                            bracket: tuple[float, float] = (1e-4, 50.0),
                            delta_units: float = DEFAULT_THERMAL_DELTA_UNITS,
                            inset: float = DEFAULT_CUT_INSET,
                            rtol: float = 1e-3) -> float:
    """Temperature where the pair entanglement falls to ``threshold``.

    Bisects (geometrically) on temperature between ``bracket[0]`` and
    ``bracket[1]``; the entanglement must exceed the threshold at the
    lower end and fall below it at the upper end.

    Raises
    ------
    BracketError
        If the bracket does not straddle the threshold crossing — e.g.
        an undriven or decoupled configuration where the entanglement is
        identically zero.
    """
    if threshold <= 0.0:
        raise InvalidParamsError(f"threshold must be positive, got {threshold}")
    lo, hi = (float(b) for b in bracket)
    if not (0.0 < lo < hi):
        raise InvalidParamsError(f"bracket must satisfy 0 < lo < hi, got {bracket}")

    def excess(T: float) -> float:
        p = replace(params, temperature=T)
        return cut_point_entanglement(p, delta_units=delta_units,
                                      inset=inset) - threshold

    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo <= 0.0 or f_hi >= 0.0:
        raise BracketError(
            f"entanglement does not cross {threshold:g} inside "
            f"[{lo:g}, {hi:g}] K (endpoint excesses {f_lo:g}, {f_hi:g})"
        )
    for _ in range(200):
        mid = float(np.sqrt(lo * hi))
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return float(np.sqrt(lo * hi))


# ---------------------------------------------------------------------------
# serialization

def _write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_FLOAT_FMT % v for v in row) + "\n")


def phase_to_csv(diagram: PhaseDiagram, path) -> None:
    """One row per grid cell, detuning-major order; full 17-digit floats."""
    header = ["delta_tilde", "g_eff"] + _record_header()

    def rows():
        for i, dt in enumerate(diagram.delta_axis):
            for j, ge in enumerate(diagram.geff_axis):
                yield [dt, ge] + _record_row(diagram.records[i, j])

    _write_csv(path, header, rows())


def cut_to_csv(cut: CutResult, path) -> None:
    """One row per cut point with the line drive value used."""
    header = ["delta_tilde", "g_eff"] + _record_header()

    def rows():
        for i, dt in enumerate(cut.delta_axis):
            yield [dt, cut.geff_line[i]] + _record_row(cut.records[i])

    _write_csv(path, header, rows())


def thermal_to_csv(scan: ThermalScan, path) -> None:
    """Two columns: the swept axis value and the pair log-negativity."""
    _write_csv(path, [scan.kind, "E_12"],
               ([a, e] for a, e in zip(scan.axis, scan.E_12)))


def run_manifest(kind: str, params: SystemParams, spec: dict,
                 outputs: list[str], wall_time: float | None = None,
                 error: dict | None = None) -> dict:
    """Reproducibility record for one scan run.

    Echoes the full parameter set and grid specification so the run can
    be repeated exactly; ``outputs`` lists the data files written.
    """
    from . import __version__

    manifest = {
        "kind": kind,
        "version": __version__,
        "params": params.to_dict(),
        "spec": spec,
        "outputs": list(outputs),
    }
    if wall_time is not None:
        manifest["wall_time_s"] = round(float(wall_time), 6)
    if error is not None:
        manifest["error"] = error
    return manifest


def write_manifest(path, manifest: dict) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
