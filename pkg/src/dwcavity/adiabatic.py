"""Adiabatic elimination of the cavity: effective wall-wall model.

Valid when the cavity responds much faster than the walls exchange energy
(kappa_a >= kappa_j and |Delta_eff| large).  Integrating out the cavity
leaves a quadratic wall model with

* cavity-mediated couplings ``G_jk`` built from the two response amplitudes
  ``G^-_j`` (co-rotating) and ``G^+_j`` (counter-rotating),
* self-energy shifts ``omega_eff = omega + Re G_jj`` and
  ``kappa_eff = kappa + Im G_jj`` determined self-consistently, and
* beam-splitter / two-mode-squeezing couplings ``nu``/``mu`` carrying the
  second-order cavity corrections.

Three coupling models are available for the reduced dynamics:

* ``"direct"`` (default) — plain first-order elimination, the equations of
  motion carry G_jk and conj(G_jk) alone.  Reproduces the full model's
  wall eigenvalues exactly in the weak-coupling limit.
* ``"resolved"`` — additionally subtracts the second-order terms
  Delta G^±* G^± from the off-diagonal couplings, giving the nu/mu form.
* ``"dispersive"`` — lowest-order limit
  G_jk -> Delta |alpha|^2 g_j g_k / (Delta^2 + kappa_a^2), in which nu and
  mu coincide and all couplings are real.

``nu_plus``/``nu_minus``/``mu`` in :class:`EffectiveModel` always report
the resolved-form values so the asymptotic identity nu -> mu can be
checked regardless of the dynamics model chosen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, InvalidParamsError
from .params import SystemParams
from .steadystate import SteadyStateRoot

COUPLING_MODELS = ("direct", "resolved", "dispersive")
NOISE_MODELS = ("bath", "bath+induced")


@dataclass
class EffectiveModel:
    """Self-consistent effective parameters of the wall-only model."""

    omega_eff: np.ndarray        # shifted wall frequencies
    kappa_eff: np.ndarray        # shifted wall dampings
    G_minus: np.ndarray          # co-rotating cavity response, per wall
    G_plus: np.ndarray           # counter-rotating cavity response, per wall
    G: np.ndarray                # cavity-mediated coupling matrix (complex)
    nu_plus: np.ndarray          # beam-splitter couplings (complex)
    nu_minus: np.ndarray
    mu: np.ndarray               # two-mode-squeezing couplings (complex)
    coupling_model: str
    converged: bool
    iterations: int


def _response_amplitudes(params: SystemParams, root: SteadyStateRoot,
                         omega_eff, kappa_eff):
    """G^-_j and G^+_j at given effective wall parameters."""
    alpha = root.alpha
    Delta = root.Delta_eff
    g = np.asarray(params.g)
    dk = params.kappa_a - np.asarray(kappa_eff)
    w = np.asarray(omega_eff)
    den_m = 1j * (w - Delta) + dk
    den_p = -1j * (w + Delta) + dk
    scale = max(abs(Delta), float(np.max(w)), params.kappa_a)
    if np.any(np.abs(den_m) < 1e-12 * scale) or np.any(np.abs(den_p) < 1e-12 * scale):
        raise DomainError("cavity response is resonant; adiabatic reduction undefined")
    return -1j * alpha * g / den_m, -1j * alpha * g / den_p


def effective_couplings(params: SystemParams, root: SteadyStateRoot,
                        omega_eff=None, kappa_eff=None,
                        coupling_model: str = "resolved") -> EffectiveModel:
    """Coupling matrices of the wall-only model at fixed effective parameters.

    Defaults evaluate at the bare wall parameters (one perturbative pass);
    :func:`solve_shifts` wraps this in the self-consistency loop.
    """
    if coupling_model not in COUPLING_MODELS:
        raise InvalidParamsError(
            f"coupling_model must be one of {COUPLING_MODELS}, got {coupling_model!r}")
    w = np.asarray(params.omega if omega_eff is None else omega_eff, dtype=float)
    k = np.asarray(params.kappa if kappa_eff is None else kappa_eff, dtype=float)
    g = np.asarray(params.g)
    alpha = root.alpha
    Delta = root.Delta_eff
    nm = params.n_modes

    if coupling_model == "dispersive":
        Gd = Delta * abs(alpha) ** 2 / (Delta ** 2 + params.kappa_a ** 2)
        G = (Gd * np.outer(g, g)).astype(complex)
        zero = np.zeros(nm, dtype=complex)
        return EffectiveModel(
            omega_eff=w, kappa_eff=k, G_minus=zero, G_plus=zero, G=G,
            nu_plus=G.copy(), nu_minus=G.copy(), mu=G.copy(),
            coupling_model=coupling_model, converged=True, iterations=0,
        )

    gm, gp = _response_amplitudes(params, root, w, k)
    # G_jk = g_j (conj(alpha) G^-_k + alpha conj(G^+_k))
    row = np.conj(alpha) * gm + alpha * np.conj(gp)
    G = np.outer(g, row)
    nu_minus = G - Delta * np.outer(np.conj(gm), gm)
    nu_plus = np.conj(G) - Delta * np.outer(np.conj(gp), gp)
    mu = G - Delta * np.outer(np.conj(gp), gm)
    return EffectiveModel(
        omega_eff=w, kappa_eff=k, G_minus=gm, G_plus=gp, G=G,
        nu_plus=nu_plus, nu_minus=nu_minus, mu=mu,
        coupling_model=coupling_model, converged=True, iterations=0,
    )


def check_validity(params: SystemParams, root: SteadyStateRoot,
                   strict: bool = True) -> None:
    """Enforce the reduction's assumptions: real root and kappa_a >= kappa_j."""
    if not root.is_real:
        raise DomainError("adiabatic reduction needs a real steady root")
    if strict and any(params.kappa_a < kj for kj in params.kappa):
        raise DomainError(
            "adiabatic reduction assumes kappa_a >= every kappa_j; "
            "pass strict=False to override")


def solve_shifts(params: SystemParams, root: SteadyStateRoot,
                 tol: float = 1e-12, max_iter: int = 100,
                 coupling_model: str = "resolved",
                 strict: bool = True) -> EffectiveModel:
    """Self-consistent effective wall parameters by damped fixed-point iteration.

    Iterates omega_eff = omega + Re G_jj, kappa_eff = kappa + Im G_jj with
    the couplings re-evaluated each pass; switches to half steps when the
    update starts oscillating.  Raises :class:`ConvergenceError` with the
    last model attached after ``max_iter`` passes.
    """
    check_validity(params, root, strict=strict)
    w = np.asarray(params.omega, dtype=float).copy()
    k = np.asarray(params.kappa, dtype=float).copy()
    scale = float(np.max(np.abs(w))) + params.kappa_a
    damping = 1.0
    prev_delta = None
    model = None
    for it in range(1, max_iter + 1):
        model = effective_couplings(params, root, w, k, coupling_model)
        gd = np.diag(model.G)
        target_w = np.asarray(params.omega) + gd.real
        target_k = np.asarray(params.kappa) + gd.imag
        dw = target_w - w
        dk = target_k - k
        delta = max(float(np.max(np.abs(dw))), float(np.max(np.abs(dk)))) / scale
        if delta < tol:
            model.omega_eff = w
            model.kappa_eff = k
            model.converged = True
            model.iterations = it
            return model
        if prev_delta is not None and delta > prev_delta:
            damping = 0.5
        prev_delta = delta
        w = w + damping * dw
        k = k + damping * dk
    model.converged = False
    model.iterations = max_iter
    raise ConvergenceError(
        f"effective-shift iteration did not reach {tol:g} in {max_iter} passes "
        f"(last update {delta:g})", last=model)


@dataclass
class ReducedModel:
    """Quadrature-space wall-only model: drift, noise and its ingredients."""

    effective: EffectiveModel
    drift: np.ndarray            # 2N x 2N real drift matrix
    noise: np.ndarray            # diagonal of the diffusion matrix
    noise_model: str


def _quadrature_transform(nm: int) -> tuple[np.ndarray, np.ndarray]:
    """Q maps (b, b^dag) pairs to (x, p) pairs; returns (Q, Q^{-1})."""
    s = 1.0 / math.sqrt(2.0)
    Qm = np.array([[s, s], [-1j * s, 1j * s]])
    Qi = np.array([[s, 1j * s], [s, -1j * s]])
    Q = np.zeros((2 * nm, 2 * nm), dtype=complex)
    Qinv = np.zeros((2 * nm, 2 * nm), dtype=complex)
    for j in range(nm):
        Q[2 * j:2 * j + 2, 2 * j:2 * j + 2] = Qm
        Qinv[2 * j:2 * j + 2, 2 * j:2 * j + 2] = Qi
    return Q, Qinv


def reduced_dw_model(params: SystemParams, root: SteadyStateRoot,
                     effective: EffectiveModel | None = None,
                     coupling_model: str = "direct",
                     noise_model: str = "bath",
                     strict: bool = True) -> ReducedModel:
    """Drift and diffusion of the wall-only model in quadrature coordinates.

    The complex mode-space generator is closed under conjugation (the
    daggered row is the exact conjugate of the plain row), which makes the
    quadrature drift real by construction.  ``noise_model`` chooses between
    the bare thermal bath alone ("bath") and additionally counting the
    cavity vacuum noise carried by the induced damping ("bath+induced").
    """
    if noise_model not in NOISE_MODELS:
        raise InvalidParamsError(
            f"noise_model must be one of {NOISE_MODELS}, got {noise_model!r}")
    if effective is None:
        effective = solve_shifts(params, root, coupling_model=coupling_model,
                                 strict=strict)
    nm = params.n_modes
    if effective.coupling_model == "resolved":
        bs, tms = effective.nu_plus, effective.mu
    else:
        # direct first-order coefficients (for "dispersive" nu and mu equal G)
        bs, tms = np.conj(effective.G), effective.G
    M = np.zeros((2 * nm, 2 * nm), dtype=complex)
    for j in range(nm):
        bj = 2 * j
        M[bj, bj] = -(effective.kappa_eff[j] + 1j * effective.omega_eff[j])
        M[bj, bj + 1] = -1j * effective.G[j, j]
        for k in range(nm):
            if k == j:
                continue
            bk = 2 * k
            M[bj, bk] = -1j * bs[j, k]
            M[bj, bk + 1] = -1j * tms[j, k]
    # daggered rows: exact conjugates (swap the +/- column roles)
    for j in range(nm):
        bj = 2 * j
        for c in range(2 * nm):
            M[bj + 1, c ^ 1] = np.conj(M[bj, c])
    Q, Qinv = _quadrature_transform(nm)
    Aq = Q @ M @ Qinv
    drift = Aq.real
    # reality is structural (conjugate-closed generator); beyond roundoff = bug
    imax = float(np.max(np.abs(Aq.imag)))
    smax = float(np.max(np.abs(drift))) or 1.0
    assert imax <= 1e-10 * smax, f"quadrature drift not real: {imax:g} vs {smax:g}"
    nth = params.mode_occupations()
    d = np.empty(2 * nm)
    for j in range(nm):
        val = params.kappa[j] * (2.0 * nth[j] + 1.0)
        if noise_model == "bath+induced":
            induced = effective.kappa_eff[j] - params.kappa[j]
            if induced > 0.0:
                val += induced * (2.0 * params.cavity_occupation + 1.0)
        d[2 * j] = val
        d[2 * j + 1] = val
    return ReducedModel(effective=effective, drift=drift, noise=d,
                        noise_model=noise_model)


def reduced_covariance(params: SystemParams, root: SteadyStateRoot,
                       model: ReducedModel | None = None,
                       **kwargs) -> np.ndarray:
    """Steady covariance of the wall-only model (2N x 2N).

    A prebuilt :class:`ReducedModel` can be passed to avoid repeating the
    self-consistent shift solve; otherwise one is constructed from
    ``kwargs`` (forwarded to :func:`reduced_dw_model`).
    """
    from .linearized import solve_lyapunov

    if model is None:
        model = reduced_dw_model(params, root, **kwargs)
    return solve_lyapunov(model.drift, np.diag(model.noise))
