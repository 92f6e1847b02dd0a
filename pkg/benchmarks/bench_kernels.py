"""Timing comparison of the jitted and plain-numpy kernel paths.

Runs the full per-cell pipeline over a survey grid and the spectrum
kernel over a frequency sweep with both kernel namespaces, reports wall
times and the largest pairwise deviation, and exits nonzero if the two
paths disagree beyond tolerance.  Usage::

    python benchmarks/bench_kernels.py [--resolution N] [--repeat K]

Set ``DWCAVITY_NUMBA=0`` to confirm the package falls back cleanly (the
benchmark then compares the numpy path against itself).
"""

import argparse
import time

import numpy as np

from dwcavity import baseline, kernels
from dwcavity.linearized import CONDITION_RTOL, RESIDUAL_RTOL, STABILITY_RTOL
from dwcavity._impl import NREC

AGREE_ATOL = 1e-9


def _grid_args(params, resolution):
    w1 = params.omega[0]
    deltas = np.linspace(-3.0 * w1, 1.0 * w1, resolution)
    geffs = np.linspace(0.0, 1.0, resolution)
    return deltas, geffs, (
        np.asarray(params.omega), np.asarray(params.kappa),
        np.asarray(params.g), params.kappa_a,
        np.asarray(params.mode_occupations()), params.cavity_occupation,
        STABILITY_RTOL, CONDITION_RTOL, RESIDUAL_RTOL,
    )


def time_grid(impl, deltas, geffs, args, repeat):
    out = np.empty((deltas.size, geffs.size, NREC))
    impl.grid_eval(deltas, geffs, *args, out)  # warm-up / compile
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        impl.grid_eval(deltas, geffs, *args, out)
        best = min(best, time.perf_counter() - t0)
    return best, out


def time_spectrum(impl, params, repeat):
    from dwcavity.entanglement import analyze_point
    from dwcavity.linearized import build_drift, build_noise
    from dwcavity.spectrum import input_spectral_matrix

    w1 = params.omega[0]
    analysis = analyze_point(params, -2.0 * w1, 0.3)
    ra = next(r for r in analysis.roots
              if r.stability is not None and r.stability.stable)
    A = build_drift(analysis.params, ra.root)
    _, D0 = build_noise(analysis.params)
    chi = input_spectral_matrix(analysis.params)
    omegas = np.linspace(0.0, 2.5 * w1, 4001)
    rows = np.array([0, 1], dtype=np.int64)
    d0 = np.ascontiguousarray(np.diag(D0))
    impl.spectrum_curve(A, d0, chi, omegas, rows)  # warm-up / compile
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        S = impl.spectrum_curve(A, d0, chi, omegas, rows)
        best = min(best, time.perf_counter() - t0)
    return best, S


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resolution", type=int, default=96,
                    help="grid points per axis (default 96)")
    ap.add_argument("--repeat", type=int, default=3,
                    help="timing repetitions, best-of (default 3)")
    opts = ap.parse_args()

    params = baseline()
    deltas, geffs, args = _grid_args(params, opts.resolution)

    label = "numba" if kernels.NUMBA_ENABLED else "numpy (numba unavailable/disabled)"
    print(f"active path: {label}")

    t_np, rec_np = time_grid(kernels.numpy_impl, deltas, geffs, args, opts.repeat)
    t_ac, rec_ac = time_grid(kernels.active, deltas, geffs, args, opts.repeat)
    diff = np.nanmax(np.abs(rec_np - rec_ac)) if rec_np.size else 0.0
    cells = opts.resolution ** 2
    print(f"grid_eval {opts.resolution}x{opts.resolution}: "
          f"numpy {t_np:.3f} s ({cells / t_np:.0f} cells/s), "
          f"active {t_ac:.3f} s ({cells / t_ac:.0f} cells/s), "
          f"speedup x{t_np / t_ac:.1f}, max |diff| {diff:.2e}")
    ok = diff < AGREE_ATOL

    s_np, S_np = time_spectrum(kernels.numpy_impl, params, opts.repeat)
    s_ac, S_ac = time_spectrum(kernels.active, params, opts.repeat)
    sdiff = float(np.max(np.abs(S_np - S_ac)))
    print(f"spectrum_curve 4001 pts: numpy {s_np * 1e3:.1f} ms, "
          f"active {s_ac * 1e3:.1f} ms, speedup x{s_np / s_ac:.1f}, "
          f"max |diff| {sdiff:.2e}")
    ok = ok and sdiff < AGREE_ATOL

    if not ok:
        print("FAIL: kernel paths disagree beyond tolerance")
        return 1
    print("kernel paths agree")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
