"""Gaussian entanglement and squeezing measures on steady covariances.

All measures work on quadrature covariance matrices with vacuum variance
1/2.  Bipartitions are always one mode against one mode; the closed
determinant form of the partial-transpose symplectic eigenvalue applies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import ConditioningError, StabilityError
from .linearized import (StabilityReport, build_drift, classify_stability,
                         noise_diagonal, solve_lyapunov)
from .params import SystemParams
from .steadystate import SteadyStateRoot, reduced_to_drive, roots_from_reduced

PHYSICALITY_TOL = 1e-9


def reduce_modes(V: np.ndarray, modes) -> np.ndarray:
    """Covariance of a subset of modes (index 0 is the cavity)."""
    modes = list(modes)
    idx = []
    for m in modes:
        idx.extend((2 * m, 2 * m + 1))
    idx = np.asarray(idx)
    return np.asarray(V, dtype=float)[np.ix_(idx, idx)]


class NegativityResult(NamedTuple):
    E: float        # logarithmic negativity, >= 0
    nu: float       # smallest PT symplectic eigenvalue


def log_negativity(V: np.ndarray, pair=None) -> NegativityResult:
    """Logarithmic negativity of a two-mode Gaussian state.

    ``V`` is either a 4x4 pair covariance or a larger matrix together with
    ``pair=(i, j)``.  Returns the measure and the smallest symplectic
    eigenvalue of the partial transpose; E = max(0, -ln(2 nu)).
    """
    V = np.asarray(V, dtype=float)
    if pair is not None:
        V = reduce_modes(V, pair)
    if V.shape != (4, 4):
        raise ValueError(f"need a 4x4 pair covariance, got {V.shape}")
    nu = float(kernels.pt_symplectic_min(V))
    if math.isnan(nu):
        raise ConditioningError("partial-transpose symplectic eigenvalue undefined "
                                "(covariance is not a valid Gaussian state?)")
    return NegativityResult(E=float(kernels.logneg_value(nu)), nu=nu)


def min_variance(V: np.ndarray, pair=None) -> float:
    """Smallest ordinary eigenvalue of a pair covariance (squeezing witness).

    Values below the vacuum 1/2 indicate a squeezed joint quadrature.
    """
    V = np.asarray(V, dtype=float)
    if pair is not None:
        V = reduce_modes(V, pair)
    return float(kernels.min_variance(V))


def symplectic_spectrum(V: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of a covariance matrix, ascending.

    A physical state has all of them >= 1/2.
    """
    return np.asarray(kernels.symplectic_eigs(np.asarray(V, dtype=float)))


def is_physical(V: np.ndarray, tol: float = PHYSICALITY_TOL) -> bool:
    return bool(symplectic_spectrum(V)[0] >= 0.5 - tol)


def two_mode_squeezed_cov(r: float, nbar: float = 0.0) -> np.ndarray:
    """Covariance of a (symmetrically thermalized) two-mode squeezed state.

    For ``nbar = 0`` this is the pure state with E = 2r.
    """
    ch = (nbar + 0.5) * math.cosh(2.0 * r)
    sh = (nbar + 0.5) * math.sinh(2.0 * r)
    V = np.zeros((4, 4))
    V[0, 0] = V[1, 1] = V[2, 2] = V[3, 3] = ch
    V[0, 2] = V[2, 0] = sh
    V[1, 3] = V[3, 1] = -sh
    return V


def _pair_name(i: int, j: int) -> str:
    a = "a" if i == 0 else str(i)
    b = "a" if j == 0 else str(j)
    return f"{a}{b}"


def pair_names(n_modes: int) -> list[str]:
    """Names of all mode pairs: cavity is 'a', walls are '1', '2', ..."""
    total = n_modes + 1
    return [_pair_name(i, j) for i in range(total) for j in range(i + 1, total)]


def _pairs(n_modes: int):
    total = n_modes + 1
    return [(i, j) for i in range(total) for j in range(i + 1, total)]


@dataclass
class RootAnalysis:
    """Everything computed for one branch root at a working point."""

    root: SteadyStateRoot
    stability: StabilityReport | None = None
    covariance: np.ndarray | None = None
    symplectic: np.ndarray | None = None
    physical: bool | None = None
    negativity: dict[str, float] = field(default_factory=dict)
    pt_symplectic: dict[str, float] = field(default_factory=dict)
    min_variance: dict[str, float] = field(default_factory=dict)
    error: str | None = None


@dataclass
class PointAnalysis:
    """Per-root covariance analysis at one reduced-coordinate working point."""

    params: SystemParams        # with the implied drive filled in
    Delta_tilde: float
    G_eff: float
    roots: list[RootAnalysis]
    best: dict[str, tuple[float, int]]   # pair -> (max E, attaining label)

    @property
    def n_real(self) -> int:
        return sum(1 for r in self.roots if r.root.is_real)

    @property
    def n_stable(self) -> int:
        return sum(1 for r in self.roots
                   if r.stability is not None and r.stability.stable)


def analyze_root(params: SystemParams, root: SteadyStateRoot) -> RootAnalysis:
    """Stability, covariance and pair measures for a single root.

    Unstable roots stop after classification; roots with a singular
    covariance problem record the failure in ``error`` instead of raising.
    """
    out = RootAnalysis(root=root)
    if not root.is_real:
        return out
    A = build_drift(params, root)
    out.stability = classify_stability(A)
    if not out.stability.stable:
        return out
    try:
        V = solve_lyapunov(A, noise_diagonal(params))
    except (ConditioningError, StabilityError) as exc:
        out.error = str(exc)
        return out
    out.covariance = V
    out.symplectic = symplectic_spectrum(V)
    out.physical = bool(out.symplectic[0] >= 0.5 - PHYSICALITY_TOL)
    for (i, j) in _pairs(params.n_modes):
        name = _pair_name(i, j)
        res = log_negativity(V, (i, j))
        out.negativity[name] = res.E
        out.pt_symplectic[name] = res.nu
        out.min_variance[name] = min_variance(V, (i, j))
    return out


def analyze_point(params: SystemParams, Delta_tilde: float,
                  G_eff: float) -> PointAnalysis:
    """Analyze all branch roots at reduced coordinates ``(Delta_tilde, G_eff)``.

    The drive implied by the coordinates replaces whatever drive ``params``
    carried.  ``best`` holds the per-pair maxima over stable roots; pairs
    with no finite value map to (nan, -1).
    """
    Delta_a, xi = reduced_to_drive(params, Delta_tilde, G_eff)
    work = params.with_drive(Delta_a, xi)
    roots = roots_from_reduced(params, Delta_tilde, G_eff)
    analyses = [analyze_root(work, r) for r in roots]
    best: dict[str, tuple[float, int]] = {}
    for name in pair_names(params.n_modes):
        cand = [(ra.negativity[name], ra.root.label) for ra in analyses
                if name in ra.negativity and math.isfinite(ra.negativity[name])]
        best[name] = max(cand, key=lambda t: t[0]) if cand else (math.nan, -1)
    return PointAnalysis(params=work, Delta_tilde=Delta_tilde, G_eff=G_eff,
                         roots=analyses, best=best)
