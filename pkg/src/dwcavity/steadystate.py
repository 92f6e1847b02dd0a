"""Mean-field steady states of the driven cavity with pinned wall modes.

The classical working points solve a cubic in the steady photon number
``nbar``; depending on drive and detuning there are one or three real
solutions.  Two coordinate systems are supported:

* direct drive coordinates ``(Delta_a, xi)`` — solve the cubic, roots are
  labeled by ascending photon number;
* reduced coordinates ``(Delta_tilde, G_eff)`` — the drive is chosen so
  that branch 0 has exactly ``nbar = G^2``; branches 1 and 2 are the upper
  and lower solutions of the fold formula when it applies.  Scans and the
  command line work in these coordinates because the phase structure
  depends on them alone.

``G_eff = G |g_1| / omega_1`` with ``G = sqrt(nbar of branch 0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import kernels
from .errors import ConvergenceError, DomainError, InvalidParamsError
from .params import SystemParams

DEGENERACY_RTOL = 1e-9


@dataclass(frozen=True)
class SteadyStateRoot:
    """One mean-field working point.

    ``label`` is the branch index (reduced route) or the ascending sort
    index (direct route).  ``Delta_eff`` is the drive detuning corrected by
    the static wall displacement at this root; ``alpha`` and ``beta`` are
    the steady cavity and wall amplitudes.  Non-real branches carry
    ``is_real=False`` and NaN numbers.
    """

    label: int
    nbar: float
    alpha: complex
    beta: tuple[complex, ...]
    Delta_eff: float
    is_real: bool = True
    degenerate: bool = False


def compute_Omega(params: SystemParams) -> float:
    """Static back-action coefficient relating photon number to detuning shift.

    Omega = sum_j 2 g_j^2 omega_j / (omega_j^2 + kappa_j^2); the effective
    detuning of a root is ``Delta_a + Omega * nbar``.
    """
    return kernels.compute_omega_shift(
        np.asarray(params.omega), np.asarray(params.g), np.asarray(params.kappa)
    )


def effective_detuning(params: SystemParams, nbar: float) -> float:
    return params.Delta_a + compute_Omega(params) * nbar


def _steady_amplitudes(params: SystemParams, nbar: float, Delta_eff: float):
    """Cavity and wall amplitudes at a steady root, drive gauged real >= 0."""
    denom = math.hypot(params.kappa_a, Delta_eff)
    alpha = math.sqrt(nbar) * complex(params.kappa_a, Delta_eff) / denom
    beta = tuple(
        -1j * gj * nbar / complex(kj, wj)
        for gj, wj, kj in zip(params.g, params.omega, params.kappa)
    )
    return alpha, beta


def _make_root(params: SystemParams, Omega: float, label: int, nbar: float,
               degenerate: bool = False) -> SteadyStateRoot:
    Delta_eff = params.Delta_a + Omega * nbar
    alpha, beta = _steady_amplitudes(params, nbar, Delta_eff)
    return SteadyStateRoot(label=label, nbar=nbar, alpha=alpha, beta=beta,
                           Delta_eff=Delta_eff, degenerate=degenerate)


def _degenerate_flags(values):
    flags = [False] * len(values)
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            scale = max(abs(values[i]), abs(values[j]))
            if abs(values[i] - values[j]) <= DEGENERACY_RTOL * scale:
                flags[i] = flags[j] = True
    return flags


def cubic_residual(params: SystemParams, nbar: float) -> float:
    """Relative residual of the steady photon-number equation at ``nbar``."""
    Omega = compute_Omega(params)
    d = params.Delta_a + Omega * nbar
    lhs = nbar * (d * d + params.kappa_a ** 2)
    xi2 = params.xi ** 2
    scale = max(abs(lhs), xi2)
    if scale == 0.0:
        return 0.0
    return abs(lhs - xi2) / scale


def solve_mean_field(params: SystemParams) -> list[SteadyStateRoot]:
    """All real steady states for the drive stored in ``params``.

    Returns 1 or 3 roots sorted by ascending photon number and labeled by
    that order.  A degenerate double root appears as two entries flagged
    ``degenerate``.
    """
    Omega = compute_Omega(params)
    roots, count = kernels.cubic_roots(
        Omega, params.Delta_a, params.kappa_a, params.xi ** 2
    )
    values = [float(roots[i]) for i in range(count)]
    flags = _degenerate_flags(values)
    return [
        _make_root(params, Omega, i, v, degenerate=f)
        for i, (v, f) in enumerate(zip(values, flags))
    ]


def reduced_to_drive(params: SystemParams, Delta_tilde: float,
                     G_eff: float) -> tuple[float, float]:
    """Bare detuning and drive amplitude realizing the reduced coordinates."""
    if params.g[0] == 0.0:
        raise InvalidParamsError("reduced coordinates need a nonzero g[0]")
    G = G_eff * params.omega[0] / abs(params.g[0])
    Omega = compute_Omega(params)
    Delta_a, xi = kernels.recover_drive(G, Delta_tilde, Omega, params.kappa_a)
    return float(Delta_a), float(xi)


def roots_from_reduced(params: SystemParams, Delta_tilde: float,
                       G_eff: float) -> list[SteadyStateRoot]:
    """The three branch roots at reduced coordinates ``(Delta_tilde, G_eff)``.

    Branch 0 (nbar = G^2) is always real.  Branches 1 and 2 carry
    ``is_real=False`` with NaN amplitudes outside the fold region.  The
    ``params`` drive fields are ignored; the drive implied by the
    coordinates is used instead.
    """
    if params.g[0] == 0.0:
        raise InvalidParamsError("reduced coordinates need a nonzero g[0]")
    G = G_eff * params.omega[0] / abs(params.g[0])
    Omega = compute_Omega(params)
    roots, flags = kernels.reduced_roots(G, Delta_tilde, Omega, params.kappa_a)
    Delta_a, xi = kernels.recover_drive(G, Delta_tilde, Omega, params.kappa_a)
    work = params.with_drive(Delta_a, xi)

    reals = [float(roots[k]) for k in range(3) if flags[k] == 1.0]
    dflags = _degenerate_flags(reals)
    degen = {}
    for (k, v), f in zip(
        [(k, float(roots[k])) for k in range(3) if flags[k] == 1.0], dflags
    ):
        degen[k] = f

    out = []
    for k in range(3):
        if flags[k] == 1.0:
            out.append(_make_root(work, Omega, k, float(roots[k]),
                                  degenerate=degen[k]))
        else:
            out.append(SteadyStateRoot(label=k, nbar=math.nan, alpha=complex("nan"),
                                       beta=(complex("nan"),) * params.n_modes,
                                       Delta_eff=math.nan, is_real=False))
    return out


def branch_root(params: SystemParams, Delta_tilde: float, G_eff: float,
                k: int) -> SteadyStateRoot:
    """Single branch root; raises :class:`DomainError` where it does not exist."""
    if k not in (0, 1, 2):
        raise DomainError(f"branch label must be 0, 1 or 2, got {k}")
    root = roots_from_reduced(params, Delta_tilde, G_eff)[k]
    if not root.is_real:
        raise DomainError(
            f"branch {k} has no real root at Delta_tilde={Delta_tilde:g}, "
            f"G_eff={G_eff:g}"
        )
    return root


def three_root_region(params: SystemParams, Delta_tilde, G_eff):
    """Boolean indicator of the fold (three real roots) region.

    Accepts scalars or arrays and broadcasts; the condition is
    G^2 >= 2/Omega * (Delta_tilde + sqrt(kappa_a^2 + Delta_tilde^2)).
    """
    Omega = compute_Omega(params)
    if Omega <= 0.0:
        return np.zeros(np.broadcast(np.asarray(Delta_tilde),
                                     np.asarray(G_eff)).shape, dtype=bool)
    dt = np.asarray(Delta_tilde, dtype=float)
    ge = np.asarray(G_eff, dtype=float)
    G2 = (ge * params.omega[0] / abs(params.g[0])) ** 2
    thresh = 2.0 / Omega * (dt + np.hypot(params.kappa_a, dt))
    return G2 >= thresh


def bifurcation_amplitude(params: SystemParams, Delta_tilde: float) -> float:
    """Drive amplitude G on the branch-crossing line at a given detuning.

    Defined only for negative effective detuning; there branch 0 collides
    with one fold branch at G^2 = (kappa_a^2 + Delta_tilde^2) / (2 |Delta_tilde| Omega).
    Returns G (convert with ``|g_1|/omega_1`` for G_eff).
    """
    if not Delta_tilde < 0.0:
        raise DomainError(
            f"the branch-crossing line needs Delta_tilde < 0, got {Delta_tilde:g}"
        )
    Omega = compute_Omega(params)
    if Omega <= 0.0:
        raise DomainError("the branch-crossing line needs Omega > 0 (nonzero coupling)")
    return math.sqrt(
        (params.kappa_a ** 2 + Delta_tilde ** 2) / (2.0 * (-Delta_tilde) * Omega)
    )


def bifurcation_geff(params: SystemParams, Delta_tilde: float) -> float:
    return bifurcation_amplitude(params, Delta_tilde) * abs(params.g[0]) / params.omega[0]


@dataclass
class MeanFieldTrajectory:
    """Result of a time-domain mean-field integration."""

    t: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray             # shape (n_modes, len(t))
    settled: SteadyStateRoot     # nearest steady root to the final state
    final_derivative: float      # max |d/dt| at the end, for convergence checks


def _mean_field_rhs(params: SystemParams):
    nm = params.n_modes
    g = np.asarray(params.g)
    omega = np.asarray(params.omega)
    kappa = np.asarray(params.kappa)

    def rhs(_t, y):
        alpha = y[0] + 1j * y[1]
        beta = y[2:2 + nm] + 1j * y[2 + nm:]
        shift = float(np.sum(g * 2.0 * beta.real))
        dalpha = (1j * (params.Delta_a - shift) - params.kappa_a) * alpha + params.xi
        dbeta = -(kappa + 1j * omega) * beta - 1j * g * abs(alpha) ** 2
        return np.concatenate(
            ([dalpha.real, dalpha.imag], dbeta.real, dbeta.imag)
        )

    return rhs


def integrate_mean_field(params: SystemParams, alpha0: complex = 0.0,
                         beta0=None, horizon: float | None = None,
                         rtol: float = 1e-10, atol: float | None = None,
                         match_rtol: float = 1e-6) -> MeanFieldTrajectory:
    """Integrate the classical equations of motion until they settle.

    Starts from ``alpha0``/``beta0`` (vacuum by default), runs for
    ``horizon`` seconds (default: 40 cavity/wall damping times) and matches
    the final state against the algebraic roots.  Raises
    :class:`ConvergenceError` with the last state attached if the final
    state is still moving or matches no root to ``match_rtol``.
    """
    nm = params.n_modes
    if beta0 is None:
        beta0 = [0.0] * nm
    beta0 = np.asarray(beta0, dtype=complex)
    if horizon is None:
        horizon = 40.0 / min((params.kappa_a,) + params.kappa)
    y0 = np.concatenate(
        ([complex(alpha0).real, complex(alpha0).imag], beta0.real, beta0.imag)
    )
    # absolute tolerance tied to the expected amplitude scale
    if atol is None:
        scale = math.sqrt(max(solve_mean_field(params), key=lambda r: r.nbar).nbar)
        atol = max(scale, 1.0) * 1e-12
    rhs = _mean_field_rhs(params)
    sol = solve_ivp(rhs, (0.0, horizon), y0, method="RK45",
                    rtol=rtol, atol=atol, dense_output=False)
    if not sol.success:
        raise ConvergenceError(f"mean-field integration failed: {sol.message}",
                               last=sol.y[:, -1] if sol.y.size else y0)
    yf = sol.y[:, -1]
    alpha_t = sol.y[0] + 1j * sol.y[1]
    beta_t = sol.y[2:2 + nm] + 1j * sol.y[2 + nm:]
    deriv = float(np.max(np.abs(rhs(sol.t[-1], yf))))
    amp = float(np.max(np.abs(yf)))
    rate = min((params.kappa_a,) + params.kappa)
    if deriv > 1e-6 * max(amp, 1.0) * rate:
        raise ConvergenceError(
            f"mean field still moving after horizon={horizon:g} s "
            f"(derivative {deriv:g})", last=yf)
    nfinal = float(alpha_t[-1].real ** 2 + alpha_t[-1].imag ** 2)
    roots = solve_mean_field(params)
    best = min(roots, key=lambda r: abs(r.nbar - nfinal))
    if abs(best.nbar - nfinal) > match_rtol * max(best.nbar, 1.0):
        raise ConvergenceError(
            f"settled photon number {nfinal:g} matches no algebraic root",
            last=yf)
    return MeanFieldTrajectory(t=sol.t, alpha=alpha_t, beta=beta_t,
                               settled=best, final_derivative=deriv)
