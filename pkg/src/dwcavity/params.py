"""System parameters and small unit helpers.

All rates and frequencies are stored internally as angular frequencies in
rad/s.  Configuration input may instead be given in ordinary (cyclic)
frequency units; :func:`to_angular` performs the conversion and
``SystemParams.from_dict`` applies it to every rate-like field at ingestion
time, so the rest of the package never has to care.

Temperatures are in kelvin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy.constants import hbar, k as k_B

from .errors import InvalidParamsError

ANGULAR = "angular"
ORDINARY = "ordinary"
_CONVENTIONS = (ANGULAR, ORDINARY)


def to_angular(value: float, convention: str = ANGULAR) -> float:
    """Convert a frequency-like value to rad/s.

    ``convention`` is ``"angular"`` (value already in rad/s, returned
    unchanged) or ``"ordinary"`` (value in cycles/s, multiplied by 2*pi).
    """
    if convention == ANGULAR:
        return float(value)
    if convention == ORDINARY:
        return 2.0 * math.pi * float(value)
    raise InvalidParamsError(
        f"unknown frequency convention {convention!r}; expected one of {_CONVENTIONS}"
    )


def thermal_occupation(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation of a mode at angular frequency ``omega``.

    Returns 0 for non-positive temperature.  ``omega`` must be positive.
    """
    if omega <= 0.0:
        raise InvalidParamsError(f"thermal occupation needs omega > 0, got {omega}")
    if temperature <= 0.0:
        return 0.0
    x = hbar * omega / (k_B * temperature)
    if x > 700.0:  # exp would overflow; occupation is zero to double precision anyway
        return 0.0
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class SystemParams:
    """Parameters of the driven cavity coupled to pinned domain-wall modes.

    Attributes
    ----------
    omega : tuple of float
        Domain-wall mode angular frequencies (rad/s), one per mode.
    g : tuple of float
        Dispersive coupling rates between photon number and each mode's
        position quadrature (rad/s).
    kappa : tuple of float
        Domain-wall amplitude damping rates (rad/s).
    kappa_a : float
        Cavity amplitude decay rate (rad/s).
    Delta_a : float
        Bare drive-cavity detuning (rad/s); positive means the drive is
        above the cavity resonance.
    xi : float
        Drive amplitude (rad/s).  The drive phase is gauged away, so xi is
        kept real and non-negative.
    temperature : float
        Bath temperature in kelvin, shared by the domain-wall modes.
    n_cavity_thermal : float or None
        Thermal occupation of the cavity bath.  ``None`` means 0 (optical
        frequencies); set explicitly to model a hot cavity bath.
    """

    omega: tuple[float, ...]
    g: tuple[float, ...]
    kappa: tuple[float, ...]
    kappa_a: float
    Delta_a: float = 0.0
    xi: float = 0.0
    temperature: float = 0.0
    n_cavity_thermal: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(float(w) for w in self.omega))
        object.__setattr__(self, "g", tuple(float(v) for v in self.g))
        object.__setattr__(self, "kappa", tuple(float(v) for v in self.kappa))
        n = len(self.omega)
        if n == 0:
            raise InvalidParamsError("at least one domain-wall mode is required")
        if len(self.g) != n or len(self.kappa) != n:
            raise InvalidParamsError(
                f"omega/g/kappa lengths disagree: {n}/{len(self.g)}/{len(self.kappa)}"
            )
        for name in ("omega", "kappa"):
            vals = getattr(self, name)
            if any(not (v > 0.0) for v in vals):
                raise InvalidParamsError(f"{name} entries must be positive, got {vals}")
        if not (self.kappa_a > 0.0):
            raise InvalidParamsError(f"kappa_a must be positive, got {self.kappa_a}")
        if not math.isfinite(self.Delta_a):
            raise InvalidParamsError(f"Delta_a must be finite, got {self.Delta_a}")
        if not (self.xi >= 0.0 and math.isfinite(self.xi)):
            raise InvalidParamsError(f"xi must be finite and >= 0, got {self.xi}")
        if self.temperature < 0.0:
            raise InvalidParamsError(f"temperature must be >= 0, got {self.temperature}")
        if self.n_cavity_thermal is not None and self.n_cavity_thermal < 0.0:
            raise InvalidParamsError("n_cavity_thermal must be >= 0 when given")

    @property
    def n_modes(self) -> int:
        return len(self.omega)

    @property
    def cavity_occupation(self) -> float:
        return 0.0 if self.n_cavity_thermal is None else float(self.n_cavity_thermal)

    def mode_occupations(self) -> tuple[float, ...]:
        """Thermal occupation of each domain-wall mode at ``temperature``."""
        return tuple(thermal_occupation(w, self.temperature) for w in self.omega)

    def with_drive(self, Delta_a: float, xi: float) -> "SystemParams":
        """Copy with a new bare detuning and drive amplitude."""
        return replace(self, Delta_a=float(Delta_a), xi=float(xi))

    def to_dict(self) -> dict:
        """Serializable form; values are angular (rad/s) and kelvin."""
        return {
            "omega": list(self.omega),
            "g": list(self.g),
            "kappa": list(self.kappa),
            "kappa_a": self.kappa_a,
            "Delta_a": self.Delta_a,
            "xi": self.xi,
            "temperature": self.temperature,
            "n_cavity_thermal": self.n_cavity_thermal,
            "frequency_input": ANGULAR,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SystemParams":
        """Build from a plain mapping, applying the declared frequency convention.

        Recognized keys match :meth:`to_dict`; ``frequency_input`` defaults to
        ``"angular"`` and, when ``"ordinary"``, every rate-like entry is
        multiplied by 2*pi.  Unknown keys are rejected so typos fail loudly.
        """
        known = {
            "omega", "g", "kappa", "kappa_a", "Delta_a", "xi",
            "temperature", "n_cavity_thermal", "frequency_input",
        }
        extra = set(data) - known
        if extra:
            raise InvalidParamsError(f"unknown parameter keys: {sorted(extra)}")
        conv = data.get("frequency_input", ANGULAR)
        try:
            omega = [to_angular(v, conv) for v in data["omega"]]
            g = [to_angular(v, conv) for v in data["g"]]
            kappa = [to_angular(v, conv) for v in data["kappa"]]
            kappa_a = to_angular(data["kappa_a"], conv)
        except KeyError as exc:
            raise InvalidParamsError(f"missing required parameter key: {exc.args[0]}") from None
        return cls(
            omega=tuple(omega),
            g=tuple(g),
            kappa=tuple(kappa),
            kappa_a=kappa_a,
            Delta_a=to_angular(data.get("Delta_a", 0.0), conv),
            xi=to_angular(data.get("xi", 0.0), conv),
            temperature=float(data.get("temperature", 0.0)),
            n_cavity_thermal=data.get("n_cavity_thermal"),
        )


def baseline(omega2_ratio: float = 1.0, temperature: float = 2e-3,
             kappa_a: float = 2e6) -> SystemParams:
    """Two-mode configuration used by the bundled scans and tests.

    Mode 1 sits at 1e9 rad/s with coupling and damping of 1e6 rad/s; mode 2
    is scaled by ``omega2_ratio`` in frequency only.  The cavity decay
    defaults to twice the domain-wall damping.
    """
    if omega2_ratio <= 0.0:
        raise InvalidParamsError(f"omega2_ratio must be positive, got {omega2_ratio}")
    omega1 = 1e9
    return SystemParams(
        omega=(omega1, omega1 * omega2_ratio),
        g=(1e6, 1e6),
        kappa=(1e6, 1e6),
        kappa_a=kappa_a,
        temperature=temperature,
    )
