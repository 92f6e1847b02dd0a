"""Material and geometry conversions for pinned domain-wall oscillators.

Turns measurable material constants (anisotropies, exchange, Faraday
rotation, densities, geometry) into the effective oscillator parameters
``omega_j``, ``kappa_j`` and ``g_j`` used by the dynamical core.  This is
the only module that touches dimensional SI constants; everything
downstream treats frequencies and rates as plain angular rates in 1/s.

A pinned Bloch domain wall behaves as a single macroscopic oscillator:
its centre coordinate sits in a Poeschl-Teller well ``-K_pin sech^2(X /
lambda_dw)`` which, for strong pinning, is harmonic near the bottom.  The
oscillator frequency, damping and magneto-optic coupling all follow in
closed form from the well parameters and the cavity geometry.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as _C_LIGHT
from scipy.constants import hbar as _HBAR

from .errors import InvalidParamsError
from .params import SystemParams

__all__ = [
    "MaterialSpec",
    "DWMode",
    "derive_dw_mode",
    "derive_all_modes",
    "pinning_potential",
    "to_system_params",
    "load_material_spec",
]


@dataclass(frozen=True)
class MaterialSpec:
    """Physical description of the magnetic strips and the cavity.

    Parameters
    ----------
    K_pin : tuple of float
        Pinning strength per domain wall, in joules.  One entry per wall;
        this is the depth of the sech^2 pinning well.
    K_perp : float
        Out-of-plane anisotropy energy (J).
    K_par : float
        In-plane anisotropy energy (J); together with ``J_ex`` it sets the
        wall width when ``lambda_dw`` is not given explicitly.
    J_ex : float
        Ferromagnetic exchange constant (J m^2).
    l : float
        Unit-cell dimension of the magnetic insulator (m).
    phi_F : float
        Faraday rotation per unit length (rad/m).
    eps : float
        Relative dielectric permittivity (dimensionless).
    rho : float
        Mass density (kg/m^3).
    A_perp : tuple of float
        Optical scattering cross-section per wall (m^2).
    V_c : float
        Cavity mode volume (m^3).
    V_dw : tuple of float
        Effective wall volume per wall (m^3); sets the effective mass.
    alpha_G : float
        Gilbert damping constant, dimensionless, in (0, 1).
    omega_a : float
        Cavity angular frequency (rad/s); only used for the equivalent
        permittivity-modulation form of the coupling.
    lambda_dw : float, optional
        Wall width (m).  Derived as ``sqrt(J_ex / K_par)`` when omitted.
    """

    K_pin: tuple[float, ...]
    K_perp: float
    K_par: float
    J_ex: float
    l: float
    phi_F: float
    eps: float
    rho: float
    A_perp: tuple[float, ...]
    V_c: float
    V_dw: tuple[float, ...]
    alpha_G: float
    omega_a: float
    lambda_dw: float = field(default=0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "K_pin", tuple(float(x) for x in self.K_pin))
        object.__setattr__(self, "A_perp", tuple(float(x) for x in self.A_perp))
        object.__setattr__(self, "V_dw", tuple(float(x) for x in self.V_dw))
        if not (len(self.K_pin) == len(self.A_perp) == len(self.V_dw)):
            raise InvalidParamsError(
                "K_pin, A_perp and V_dw must have one entry per domain wall"
            )
        if not self.K_pin:
            raise InvalidParamsError("at least one domain wall is required")
        positives = {
            "K_perp": self.K_perp,
            "K_par": self.K_par,
            "J_ex": self.J_ex,
            "l": self.l,
            "phi_F": self.phi_F,
            "eps": self.eps,
            "rho": self.rho,
            "V_c": self.V_c,
            "omega_a": self.omega_a,
        }
        for name, value in positives.items():
            if not (float(value) > 0.0) or not math.isfinite(float(value)):
                raise InvalidParamsError(f"{name} must be positive and finite, got {value!r}")
        for name, seq in (("K_pin", self.K_pin), ("A_perp", self.A_perp),
                          ("V_dw", self.V_dw)):
            for j, value in enumerate(seq):
                if not (value > 0.0) or not math.isfinite(value):
                    raise InvalidParamsError(
                        f"{name}[{j}] must be positive and finite, got {value!r}"
                    )
        if not (0.0 < self.alpha_G < 1.0):
            raise InvalidParamsError(
                f"alpha_G must lie in (0, 1), got {self.alpha_G!r}"
            )
        if self.lambda_dw < 0.0:
            raise InvalidParamsError("lambda_dw must be nonnegative")

    @property
    def n_walls(self) -> int:
        return len(self.K_pin)

    def wall_width(self) -> float:
        """Domain-wall width in metres, ``sqrt(J_ex / K_par)`` unless pinned."""
        if self.lambda_dw > 0.0:
            return self.lambda_dw
        return math.sqrt(self.J_ex / self.K_par)

    def to_dict(self) -> dict:
        return {
            "K_pin": list(self.K_pin),
            "K_perp": self.K_perp,
            "K_par": self.K_par,
            "J_ex": self.J_ex,
            "l": self.l,
            "phi_F": self.phi_F,
            "eps": self.eps,
            "rho": self.rho,
            "A_perp": list(self.A_perp),
            "V_c": self.V_c,
            "V_dw": list(self.V_dw),
            "alpha_G": self.alpha_G,
            "omega_a": self.omega_a,
            "lambda_dw": self.lambda_dw,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MaterialSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise InvalidParamsError(
                f"unknown material fields: {sorted(unknown)}"
            )
        kwargs = dict(data)
        for name in ("K_pin", "A_perp", "V_dw"):
            if name in kwargs:
                kwargs[name] = tuple(kwargs[name])
        return cls(**kwargs)


@dataclass(frozen=True)
class DWMode:
    """Derived oscillator parameters for one pinned domain wall.

    ``omega``, ``kappa`` and ``g`` are angular rates in 1/s and slot
    directly into :class:`~dwcavity.params.SystemParams`.  The remaining
    fields record the intermediate quantities for audit.
    """

    omega: float
    kappa: float
    g: float
    x_zpf: float
    S_eff: float
    m_eff: float

    def to_dict(self) -> dict:
        return {
            "omega": self.omega,
            "kappa": self.kappa,
            "g": self.g,
            "x_zpf": self.x_zpf,
            "S_eff": self.S_eff,
            "m_eff": self.m_eff,
        }


_COUPLING_AGREEMENT_RTOL = 1e-12


def derive_dw_mode(spec: MaterialSpec, j: int) -> DWMode:
    """Derive the oscillator parameters of wall ``j``.

    The chain of closed forms is::

        omega_j = sqrt(2 K_pin_j K_perp l / (hbar^2 lambda_dw))
        kappa_j = alpha_G omega_j / sqrt(K_pin_j l / (2 K_perp lambda_dw))
        m_eff   = rho V_dw_j
        x_zpf   = sqrt(hbar / (2 m_eff omega_j))
        S_eff   = x_zpf A_perp_j / V_c
        g_j     = -c phi_F sqrt(eps) S_eff / 2

    The magnitude of ``g_j`` is cross-checked against the equivalent
    permittivity-modulation form ``f S_eff omega_a / 4`` with
    ``f = 2 c phi_F sqrt(eps) / omega_a``; the two must agree to a
    relative 1e-12 (they are algebraically identical, so this guards the
    implementation, not the physics).

    Parameters
    ----------
    spec : MaterialSpec
    j : int
        Wall index, ``0 <= j < spec.n_walls``.

    Returns
    -------
    DWMode
    """
    if not 0 <= j < spec.n_walls:
        raise InvalidParamsError(
            f"wall index {j} out of range for {spec.n_walls} walls"
        )
    lam = spec.wall_width()
    K_pin = spec.K_pin[j]

    omega = math.sqrt(2.0 * K_pin * spec.K_perp * spec.l / (_HBAR ** 2 * lam))
    kappa = spec.alpha_G * omega / math.sqrt(
        K_pin * spec.l / (2.0 * spec.K_perp * lam)
    )
    m_eff = spec.rho * spec.V_dw[j]
    x_zpf = math.sqrt(_HBAR / (2.0 * m_eff * omega))
    S_eff = x_zpf * spec.A_perp[j] / spec.V_c

    g = -_C_LIGHT * spec.phi_F * math.sqrt(spec.eps) * S_eff / 2.0
    f_factor = 2.0 * _C_LIGHT * spec.phi_F * math.sqrt(spec.eps) / spec.omega_a
    g_alt = f_factor * S_eff * spec.omega_a / 4.0
    if abs(abs(g) - g_alt) > _COUPLING_AGREEMENT_RTOL * abs(g_alt):
        raise AssertionError(
            "coupling formulas disagree beyond 1e-12: "
            f"{g!r} vs {g_alt!r}"
        )
    return DWMode(omega=omega, kappa=kappa, g=g, x_zpf=x_zpf,
                  S_eff=S_eff, m_eff=m_eff)


def derive_all_modes(spec: MaterialSpec) -> list[DWMode]:
    """All walls of the spec, in order."""
    return [derive_dw_mode(spec, j) for j in range(spec.n_walls)]


def pinning_potential(X, K_pin: float, lambda_dw: float):
    """Exact and parabolic pinning potential at displacement ``X``.

    Returns the pair ``(exact, parabolic)`` where ``exact`` is
    ``-K_pin sech^2(X / lambda_dw)`` and ``parabolic`` is the quadratic
    form ``K_pin X^2 / (4 lambda_dw^2)``.

    The parabolic form descends from the rational approximation
    ``-K_pin / (2 + (X/lambda_dw)^2)`` and therefore carries one quarter
    of the true curvature of the well bottom: the exact well rises as
    ``K_pin (X/lambda_dw)^2`` from its minimum.  Callers comparing
    shapes should scale accordingly; both values are returned unaltered
    so either convention can be checked.

    Parameters
    ----------
    X : float or array_like
        Displacement of the wall centre (m).
    K_pin : float
        Well depth (J).
    lambda_dw : float
        Wall width (m), strictly positive.

    Returns
    -------
    exact : float or ndarray
    parabolic : float or ndarray
    """
    if not lambda_dw > 0.0:
        raise InvalidParamsError("lambda_dw must be positive")
    u = np.asarray(X, dtype=float) / lambda_dw
    exact = -K_pin / np.cosh(u) ** 2
    parabolic = K_pin * u ** 2 / 4.0
    if np.isscalar(X) or np.ndim(X) == 0:
        return float(exact), float(parabolic)
    return exact, parabolic


def to_system_params(spec: MaterialSpec, kappa_a: float, Delta_a: float = 0.0,
                     xi: complex = 0.0, temperature: float = 0.0) -> SystemParams:
    """Bundle two derived walls with cavity numbers into system parameters.

    Requires exactly two walls, matching the paired-strip pipelines.
    """
    if spec.n_walls != 2:
        raise InvalidParamsError(
            f"system parameters need exactly 2 walls, spec has {spec.n_walls}"
        )
    modes = derive_all_modes(spec)
    return SystemParams(
        omega=tuple(m.omega for m in modes),
        g=tuple(m.g for m in modes),
        kappa=tuple(m.kappa for m in modes),
        kappa_a=kappa_a,
        Delta_a=Delta_a,
        xi=xi,
        temperature=temperature,
    )


def load_material_spec(path) -> MaterialSpec:
    """Read a material spec from a JSON key-value file."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise InvalidParamsError("material spec file must hold a JSON object")
    return MaterialSpec.from_dict(data)
