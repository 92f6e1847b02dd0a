"""Linearized fluctuation dynamics around a mean-field root.

Quadratures are ordered (x_a, p_a, x_1, p_1, x_2, p_2) with vacuum variance
1/2.  The drift matrix is the exact Jacobian of the classical equations of
motion at the root; the diffusion matrix collects the thermal input noise
of every decay channel, D = diag(2 kappa_i (n_i + 1/2)) per quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import kernels
from .errors import ConditioningError, StabilityError
from .params import SystemParams
from .steadystate import SteadyStateRoot

STABILITY_RTOL = 1e-9
CONDITION_RTOL = 1e-13
RESIDUAL_RTOL = 1e-10


def build_drift(params: SystemParams, root: SteadyStateRoot) -> np.ndarray:
    """Drift matrix of the fluctuations around ``root``."""
    if not root.is_real:
        raise ValueError(f"branch {root.label} is not a real root here")
    return kernels.build_drift(
        root.Delta_eff, root.alpha.real, root.alpha.imag,
        np.asarray(params.omega), np.asarray(params.kappa),
        np.asarray(params.g), params.kappa_a,
    )


def noise_diagonal(params: SystemParams) -> np.ndarray:
    """Diagonal of the diffusion matrix for the current temperature."""
    return kernels.noise_diag(
        params.kappa_a, params.cavity_occupation,
        np.asarray(params.kappa), np.asarray(params.mode_occupations()),
    )


def build_noise(params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Diffusion matrix D and input coupling matrix D0 (both diagonal).

    D0 = diag(sqrt(2 kappa_i)) per quadrature; D relates to it through the
    bath occupations as D = D0 diag(n_i + 1/2) D0.
    """
    D = np.diag(noise_diagonal(params))
    D0 = np.diag(kernels.input_coupling_diag(params.kappa_a, np.asarray(params.kappa)))
    return D, D0


@dataclass(frozen=True)
class StabilityReport:
    """Spectral stability data for one drift matrix.

    ``margin`` is -max_real normalized by the matrix scale: positive values
    mean decay, values within ``tol`` of zero are effectively marginal.
    """

    eigenvalues: np.ndarray
    max_real: float
    scale: float
    tol: float
    stable: bool

    @property
    def margin(self) -> float:
        return -self.max_real / self.scale if self.scale > 0.0 else math.inf


def classify_stability(A: np.ndarray, tol: float = STABILITY_RTOL) -> StabilityReport:
    """Classify a drift matrix as stable when every eigenvalue real part
    stays below ``tol`` times the largest matrix entry."""
    A = np.asarray(A, dtype=float)
    w = np.linalg.eigvals(A.astype(complex))
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    max_real = float(np.max(w.real))
    return StabilityReport(
        eigenvalues=w, max_real=max_real, scale=scale, tol=tol,
        stable=max_real <= tol * scale,
    )


def solve_lyapunov(A: np.ndarray, D: np.ndarray, *,
                   require_stable: bool = True) -> np.ndarray:
    """Steady covariance matrix V solving A V + V A^T + D = 0.

    ``D`` may be the full (diagonal) matrix or just its diagonal.  Raises
    :class:`StabilityError` on an unstable drift, :class:`ConditioningError`
    when the Lyapunov operator is near singular (eigenvalue pair sums close
    to zero) or when the back-substituted residual is not small.
    """
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    ddiag = np.diag(D).copy() if D.ndim == 2 else D.copy()
    report = classify_stability(A)
    if require_stable and not report.stable:
        raise StabilityError(
            f"drift matrix is unstable (max Re eigenvalue {report.max_real:g})"
        )
    _, min_pair = kernels.drift_eig_info(A)
    if min_pair <= CONDITION_RTOL * report.scale:
        raise ConditioningError(
            f"Lyapunov operator near singular ({min_pair:g} vs scale {report.scale:g})"
        )
    V = kernels.lyapunov_solve(A, ddiag)
    resid = kernels.lyapunov_residual(A, V, ddiag)
    dmax = float(np.max(np.abs(ddiag)))
    if dmax > 0.0 and resid > RESIDUAL_RTOL * dmax:
        raise ConditioningError(
            f"Lyapunov residual {resid:g} exceeds {RESIDUAL_RTOL:g} * {dmax:g}"
        )
    return V


def lyapunov_residual(A: np.ndarray, V: np.ndarray, D: np.ndarray) -> float:
    """Max-abs entry of A V + V A^T + D."""
    D = np.asarray(D, dtype=float)
    ddiag = np.diag(D) if D.ndim == 2 else D
    return float(kernels.lyapunov_residual(np.asarray(A, float),
                                           np.asarray(V, float),
                                           np.asarray(ddiag, float)))


def integrate_lyapunov(A: np.ndarray, D: np.ndarray, V0: np.ndarray | None = None,
                       horizon: float | None = None, rtol: float = 1e-10,
                       atol: float = 1e-12) -> np.ndarray:
    """Time-integrate dV/dt = A V + V A^T + D and return the final V.

    This is the slow cross-check for :func:`solve_lyapunov`; the default
    horizon is 40 times the slowest decay time of ``A``.
    """
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    if D.ndim == 1:
        D = np.diag(D)
    n = A.shape[0]
    if V0 is None:
        V0 = np.zeros((n, n))
    report = classify_stability(A)
    if not report.stable:
        raise StabilityError("cannot relax the covariance of an unstable system")
    if horizon is None:
        slowest = -float(np.max(report.eigenvalues.real))
        if slowest <= 0.0:
            raise StabilityError("marginal drift matrix: no relaxation time scale")
        horizon = 40.0 / slowest

    def rhs(_t, y):
        V = y.reshape(n, n)
        dV = A @ V + V @ A.T + D
        return dV.ravel()

    # absolute tolerance tied to the stationary covariance magnitude,
    # estimated from the slowest decay: V ~ ||D|| / (2 |max Re lambda|)
    dscale = float(np.max(np.abs(D))) if np.any(D) else 1.0
    vscale = dscale / (2.0 * abs(float(np.max(report.eigenvalues.real))))
    sol = solve_ivp(rhs, (0.0, horizon), np.asarray(V0, float).ravel(),
                    method="RK45", rtol=rtol, atol=atol * max(vscale, 1.0))
    if not sol.success:
        raise ConditioningError(f"covariance integration failed: {sol.message}")
    V = sol.y[:, -1].reshape(n, n)
    return 0.5 * (V + V.T)


def jacobian_fd(params: SystemParams, root: SteadyStateRoot,
                rel_step: float = 1e-6) -> np.ndarray:
    """Finite-difference Jacobian of the classical flow at ``root``.

    Exists to cross-check :func:`build_drift`; central differences on the
    quadrature representation of the mean-field equations.
    """
    nm = params.n_modes
    g = np.asarray(params.g)
    omega = np.asarray(params.omega)
    kappa = np.asarray(params.kappa)

    def flow(u):
        alpha = (u[0] + 1j * u[1]) / math.sqrt(2.0)
        beta = (u[2::2] + 1j * u[3::2]) / math.sqrt(2.0)
        shift = np.sum(g * 2.0 * beta.real)
        dalpha = (1j * (params.Delta_a - shift) - params.kappa_a) * alpha + params.xi
        dbeta = -(kappa + 1j * omega) * beta - 1j * g * abs(alpha) ** 2
        out = np.empty(2 + 2 * nm)
        out[0] = math.sqrt(2.0) * dalpha.real
        out[1] = math.sqrt(2.0) * dalpha.imag
        out[2::2] = math.sqrt(2.0) * dbeta.real
        out[3::2] = math.sqrt(2.0) * dbeta.imag
        return out

    u0 = np.empty(2 + 2 * nm)
    u0[0] = math.sqrt(2.0) * root.alpha.real
    u0[1] = math.sqrt(2.0) * root.alpha.imag
    for j, b in enumerate(root.beta):
        u0[2 + 2 * j] = math.sqrt(2.0) * b.real
        u0[3 + 2 * j] = math.sqrt(2.0) * b.imag
    scale = max(1.0, float(np.max(np.abs(u0))))
    n = u0.size
    J = np.empty((n, n))
    for c in range(n):
        h = rel_step * max(abs(u0[c]), scale)
        up = u0.copy(); up[c] += h
        dn = u0.copy(); dn[c] -= h
        J[:, c] = (flow(up) - flow(dn)) / (2.0 * h)
    return J
