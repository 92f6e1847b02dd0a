"""Output noise spectra and non-Hermitian mode structure.

The linearized system reflects its internal mode structure into the
optical output: the reflected noise spectrum ``S(omega)`` is assembled
from the input-output transfer matrix, and the drift-matrix eigenvalues
(rotated by ``i`` into frequency/linewidth form) organize into bright and
dark branches.  Sweeping a control parameter moves the branches through
avoided crossings, mergers and exceptional points; this module computes
the spectra, tracks branches continuously, and detects exceptional
points by their square-root gap scaling.

Conventions
-----------
Quadrature ordering is ``(x_a, p_a, x_1, p_1, x_2, p_2)``.  Frequencies
and rates are angular, in the same unit system as the drift matrix.
Eigenvalues are reported as ``lambda_H = i * eig(A)`` so that the real
part is an oscillation frequency and the (negative) imaginary part a
linewidth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import kernels
from .errors import DomainError, ResolutionError, StabilityError
from .linearized import build_drift, build_noise, classify_stability
from .params import SystemParams
from .steadystate import SteadyStateRoot, bifurcation_geff, roots_from_reduced

__all__ = [
    "SpectrumGrid",
    "EigenBranches",
    "EPCandidate",
    "transfer_matrix",
    "input_spectral_matrix",
    "output_spectrum",
    "mode_eigenvalues",
    "analytic_bright_eigenvalues",
    "ep_onset_estimate",
    "track_branches",
    "branches_along_line",
    "stability_crossings",
    "detect_exceptional_points",
]

#: imaginary residue allowed in the assembled spectrum, relative to its peak
_IMAG_RESIDUE_RTOL = 1e-10


@dataclass(frozen=True)
class SpectrumGrid:
    """Output spectrum sampled on a frequency axis for one mean-field root."""

    omega: np.ndarray
    S: np.ndarray
    root_index: int


@dataclass(frozen=True)
class EPCandidate:
    """A detected exceptional point.

    ``delta`` is the sweep coordinate of the gap minimum, ``pair`` the
    branch indices that coalesce, ``gap`` the residual gap at the
    minimum, ``exponent`` the fitted scaling exponent of the gap (0.5
    for a second-order point), and ``order`` the detected order.
    """

    delta: float
    pair: tuple[int, int]
    gap: float
    exponent: float
    order: int = 2


@dataclass(frozen=True)
class EigenBranches:
    """Continuity-matched eigenvalue branches along a sweep axis.

    ``lambdas[i, b]`` is branch ``b`` at ``delta_axis[i]``; branches are
    matched between consecutive sweep points by minimal-distance
    assignment so that each column follows one physical mode through
    crossings.
    """

    delta_axis: np.ndarray
    lambdas: np.ndarray
    ep_candidates: tuple[EPCandidate, ...] = ()


def transfer_matrix(A: np.ndarray, D0: np.ndarray, omega: float) -> np.ndarray:
    """Input-output transfer matrix at a single frequency.

    ``T(omega) = -[I + D0 (A + i omega I)^{-1} D0]`` maps input noise
    quadratures to output quadratures.  ``D0`` is the diagonal
    input-coupling matrix (entries ``sqrt(2 kappa_i)`` per quadrature).

    Raises
    ------
    DomainError
        If the resolvent is singular at ``omega`` (only possible for an
        undamped mode).
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    M = A + 1j * omega * np.eye(n)
    try:
        R = np.linalg.inv(M)
    except np.linalg.LinAlgError as exc:
        raise DomainError(
            f"resolvent singular at omega={omega:g}; an undamped internal "
            "mode coincides with the probe frequency"
        ) from exc
    D0 = np.asarray(D0, dtype=float)
    return -(np.eye(n) + D0 @ R @ D0)


def input_spectral_matrix(params: SystemParams) -> np.ndarray:
    """Spectral matrix of the white input noise, constant in frequency.

    Per mode the 2x2 quadrature block is ``[[n + 1/2, i/2], [-i/2,
    n + 1/2]]``: the diagonal carries the thermal occupation on top of
    vacuum, the imaginary off-diagonal entries the antisymmetric part
    fixed by the quadrature commutator.  Distinct modes are
    uncorrelated.  The result is Hermitian by construction.
    """
    occ = [params.cavity_occupation] + list(params.mode_occupations())
    chi = np.zeros((6, 6), dtype=complex)
    for i, n in enumerate(occ):
        b = 2 * i
        chi[b, b] = chi[b + 1, b + 1] = n + 0.5
        chi[b, b + 1] = 0.5j
        chi[b + 1, b] = -0.5j
    return chi


def output_spectrum(A: np.ndarray, D0: np.ndarray, chi: np.ndarray,
                    omega_grid, quadratures: tuple[int, ...] = (0, 1),
                    root_index: int = 0) -> SpectrumGrid:
    """Output noise spectrum over a frequency grid.

    Assembles ``S(omega)`` as the sum of the selected diagonal entries of
    ``T(omega) chi T^T(-omega)``.  The default selection ``(0, 1)`` sums
    the cavity position and momentum quadratures, i.e. the total optical
    noise power leaving the cavity port.

    Raises
    ------
    StabilityError
        If ``A`` is not stable — the steady-state spectrum of an
        unstable configuration does not exist.
    AssertionError
        If the imaginary residue of the assembled spectrum exceeds
        1e-10 of its largest value (the algebra guarantees a real
        result; a violation means corrupted inputs).
    """
    report = classify_stability(np.asarray(A, dtype=float))
    if not report.stable:
        raise StabilityError(
            f"drift matrix is unstable (max Re eigenvalue {report.max_real:g}); "
            "no steady-state spectrum exists"
        )
    omega_grid = np.asarray(omega_grid, dtype=float)
    d0 = np.ascontiguousarray(np.diag(np.asarray(D0, dtype=float)))
    rows = np.asarray(quadratures, dtype=np.int64)
    S = kernels.spectrum_curve(np.asarray(A, dtype=float), d0,
                               np.asarray(chi, dtype=complex),
                               omega_grid, rows)
    # spectrum_curve accumulates the real part; re-derive the residue bound
    # at the worst grid point to honour the realness contract.
    iw = int(np.argmax(np.abs(S)))
    T = transfer_matrix(A, D0, omega_grid[iw])
    full = T @ chi @ np.conj(T).T
    resid = abs(sum(full[r, r] for r in rows).imag)
    assert resid <= _IMAG_RESIDUE_RTOL * max(abs(S[iw]), 1.0), (
        f"imaginary residue {resid:g} exceeds tolerance at "
        f"omega={omega_grid[iw]:g}"
    )
    return SpectrumGrid(omega=omega_grid, S=S, root_index=root_index)


def mode_eigenvalues(A: np.ndarray) -> np.ndarray:
    """The six mode eigenvalues ``i * eig(A)``, sorted by real part.

    Real parts are oscillation frequencies (signed), imaginary parts are
    ``-damping``; stable modes sit in the lower half plane.
    """
    lam = 1j * np.linalg.eigvals(np.asarray(A, dtype=float))
    order = np.lexsort((lam.imag, lam.real))
    return lam[order]


def analytic_bright_eigenvalues(root: SteadyStateRoot, params: SystemParams):
    """Equal-damping closed form for the four bright-mode eigenvalues.

    Valid only when the cavity and both oscillator dampings coincide;
    then the four non-dark eigenvalues follow from nested square roots
    of the effective detuning and the collective coupling.  Returns the
    four closed-form values together with a deviation report against the
    numeric spectrum of the drift matrix — the closed form is kept as a
    diagnostic, not as ground truth, because its weak-coupling limit
    does not reduce to the decoupled frequencies.

    Returns
    -------
    values : ndarray, shape (4,)
    report : dict
        ``{"deviations": ndarray(4,), "numeric": ndarray(6,)}`` where
        ``deviations[i]`` is the distance from analytic value ``i`` to
        the nearest numeric eigenvalue.

    Raises
    ------
    DomainError
        If the three damping rates are not all equal (relative 1e-12).
    """
    ka = params.kappa_a
    if any(abs(k - ka) > 1e-12 * ka for k in params.kappa):
        raise DomainError(
            "equal-damping closed form requires kappa_a == kappa_1 == kappa_2; "
            f"got kappa_a={ka:g}, kappa={params.kappa}"
        )
    dt = root.Delta_eff
    w1 = params.omega[0]
    g1 = abs(params.g[0])
    d_plus = (dt * dt + ka * ka) / 2.0
    d_minus = (dt * dt - ka * ka) / 2.0
    theta2 = np.sqrt(complex(d_minus ** 2 - 8.0 * g1 ** 2 * root.nbar * dt * w1))
    vals = []
    for j in (1, 2):
        radicand = d_plus + (-1) ** j * theta2
        for sign in (+1.0, -1.0):
            vals.append(-1j * ka + sign * np.sqrt(radicand))
    vals = np.asarray(vals, dtype=complex)
    numeric = mode_eigenvalues(build_drift(params, root))
    deviations = np.array(
        [np.min(np.abs(numeric - v)) for v in vals], dtype=float
    )
    return vals, {"deviations": deviations, "numeric": numeric}


def ep_onset_estimate(root: SteadyStateRoot, params: SystemParams) -> float:
    """Closed-form estimate of the eigenvalue-merging detuning.

    Evaluates ``-omega_1 (2 G g_1 xbar_a / kappa_a)^2`` with ``G`` the
    reduced amplitude and ``xbar_a`` the steady cavity position
    quadrature.  Retained purely as a diagnostic for comparison reports:
    the expression is dimensionally inconsistent and detection relies on
    the numeric branch sweep instead.
    """
    G = np.sqrt(root.nbar)
    xbar = np.sqrt(2.0) * root.alpha.real
    return -params.omega[0] * (2.0 * G * abs(params.g[0]) * xbar /
                               params.kappa_a) ** 2


def _matched_order(prev_vals, prev_vecs, vals, vecs) -> np.ndarray:
    """Assignment of current eigenvalues to previous branches.

    Minimal total eigenvalue distance, with eigenvector overlap breaking
    near-ties (distances within a small fraction of the local scale).
    """
    dist = np.abs(prev_vals[:, None] - vals[None, :])
    scale = max(np.max(np.abs(prev_vals)), np.max(np.abs(vals)), 1.0)
    overlap = np.abs(np.conj(prev_vecs).T @ vecs)
    cost = dist + 1e-6 * scale * (1.0 - overlap)
    _, cols = linear_sum_assignment(cost)
    return cols


def track_branches(delta_axis, drift_matrices) -> EigenBranches:
    """Continuity-matched eigenvalue branches over a sweep.

    Parameters
    ----------
    delta_axis : array_like
        Sweep coordinate, one entry per drift matrix.
    drift_matrices : sequence of ndarray
        The 6x6 drift matrix at each sweep point.

    Returns
    -------
    EigenBranches
    """
    delta_axis = np.asarray(delta_axis, dtype=float)
    mats = [np.asarray(A, dtype=float) for A in drift_matrices]
    if len(mats) != delta_axis.size:
        raise DomainError(
            f"axis has {delta_axis.size} points but {len(mats)} matrices given"
        )
    if delta_axis.size < 2:
        raise DomainError("branch tracking needs at least two sweep points")
    n = mats[0].shape[0]
    lams = np.empty((delta_axis.size, n), dtype=complex)

    w, v = np.linalg.eig(mats[0])
    lam = 1j * w
    order = np.lexsort((lam.imag, lam.real))
    lam, v = lam[order], v[:, order]
    lams[0] = lam
    prev_vals, prev_vecs = lam, v
    for i in range(1, delta_axis.size):
        w, v = np.linalg.eig(mats[i])
        lam = 1j * w
        cols = _matched_order(prev_vals, prev_vecs, lam, v)
        lam, v = lam[cols], v[:, cols]
        lams[i] = lam
        prev_vals, prev_vecs = lam, v
    return EigenBranches(delta_axis=delta_axis, lambdas=lams)


def branches_along_line(params: SystemParams, delta_axis, root_label: int,
                        inset: float = 0.0) -> EigenBranches:
    """Eigenvalue branches along the stability-exchange line.

    At each detuning on ``delta_axis`` the drive is placed on the
    root-exchange line (optionally inset below it by the relative amount
    ``inset``) and the drift matrix of branch ``root_label`` is
    diagonalized.  Eigenvalues require no stability, so the sweep covers
    parametrically unstable windows as well.
    """
    delta_axis = np.asarray(delta_axis, dtype=float)
    mats = []
    for dt in delta_axis:
        geff = bifurcation_geff(params, dt) * (1.0 - inset)
        root = roots_from_reduced(params, dt, geff)[root_label]
        mats.append(build_drift(params, root))
    return track_branches(delta_axis, mats)


def stability_crossings(branches: EigenBranches) -> np.ndarray:
    """Sweep coordinates where the tracked branch set changes stability.

    The largest growth rate ``max_b Im lambda[i, b]`` is positive exactly
    when the underlying drift matrix is unstable; its sign changes mark
    the boundaries of parametric-instability windows along the sweep.
    Each sign change between adjacent grid points is refined by linear
    interpolation of the growth rate.  The steady covariance — and with
    it every squeezing and entanglement measure — exists only on the
    stable side, so these are the only locations where those measures
    can jump along a sweep of a single branch.
    """
    x = branches.delta_axis
    growth = np.max(branches.lambdas.imag, axis=1)
    out = []
    for i in range(len(x) - 1):
        a, b = growth[i], growth[i + 1]
        if a == 0.0 or a * b >= 0.0:
            continue
        t = a / (a - b)
        out.append(x[i] + t * (x[i + 1] - x[i]))
    return np.asarray(out, dtype=float)


def _fit_gap_exponent(x, gap, i_min: int, window: int):
    """Scaling exponent of ``gap`` around the minimum at index ``i_min``.

    Fits ``log gap`` against ``log |x - x_min|`` using up to ``window``
    points on each side, skipping the minimum cell itself and its
    immediate neighbours (where the sub-cell position of the true
    minimum dominates the distance estimate).
    """
    x0 = x[i_min]
    xs, gs = [], []
    for side in (-1, +1):
        for k in range(2, window + 2):
            i = i_min + side * k
            if 0 <= i < len(x) and gap[i] > 0.0:
                xs.append(abs(x[i] - x0))
                gs.append(gap[i])
    if len(xs) < 4:
        raise ResolutionError(
            "sweep grid too coarse for a gap-exponent fit; "
            f"only {len(xs)} usable points around index {i_min}"
        )
    slope = np.polyfit(np.log(xs), np.log(gs), 1)[0]
    return float(slope)


def detect_exceptional_points(branches: EigenBranches, tol: float = 0.1,
                              exponent_band: tuple[float, float] = (0.4, 0.6),
                              fit_window: int = 8,
                              merge_cells: int = 3) -> list[EPCandidate]:
    """Locate exceptional points on a branch sweep.

    A candidate is a strict local minimum of a branch-pair gap that
    drops below ``tol`` times that pair's maximum gap and whose local
    gap scales as a power of the distance to the minimum with exponent
    inside ``exponent_band`` (0.5 for a second-order point).  Candidates
    from different pairs within ``merge_cells`` grid cells of each other
    are merged — the drift matrix is real, so every coalescence appears
    simultaneously in a conjugate-mirrored pair.

    Raises
    ------
    ResolutionError
        If a candidate's neighbourhood has too few grid points for the
        exponent fit.
    """
    x = branches.delta_axis
    lams = branches.lambdas
    n = lams.shape[1]
    raw: list[EPCandidate] = []
    for a in range(n):
        for b in range(a + 1, n):
            gap = np.abs(lams[:, a] - lams[:, b])
            gmax = float(np.max(gap))
            if gmax == 0.0:
                continue
            for i in range(1, len(x) - 1):
                if not (gap[i] < gap[i - 1] and gap[i] <= gap[i + 1]):
                    continue
                if gap[i] >= tol * gmax:
                    continue
                exponent = _fit_gap_exponent(x, gap, i, fit_window)
                if exponent_band[0] <= exponent <= exponent_band[1]:
                    raw.append(EPCandidate(delta=float(x[i]), pair=(a, b),
                                           gap=float(gap[i]),
                                           exponent=exponent))
    raw.sort(key=lambda c: c.delta)
    merged: list[EPCandidate] = []
    if len(x) > 1:
        cell = float(np.median(np.abs(np.diff(x))))
    else:
        cell = 0.0
    for cand in raw:
        if merged and abs(cand.delta - merged[-1].delta) <= merge_cells * cell:
            if cand.gap < merged[-1].gap:
                merged[-1] = cand
            continue
        merged.append(cand)
    return merged
