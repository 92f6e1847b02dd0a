"""Shared fixtures: canonical parameter sets and driven working points."""

import numpy as np
import pytest

from dwcavity import baseline
from dwcavity.steadystate import (bifurcation_geff, reduced_to_drive,
                                  roots_from_reduced)


@pytest.fixture(scope="session")
def base():
    """Degenerate two-oscillator configuration (omega_2 = omega_1)."""
    return baseline()


@pytest.fixture(scope="session")
def base10():
    """Detuned configuration with omega_2 = 10 omega_1."""
    return baseline(omega2_ratio=10.0)


@pytest.fixture(scope="session")
def line_point():
    """Factory: driven params and one branch root on the exchange-line cut.

    ``line_point(params, delta_units, k=1, inset=1e-3)`` places the drive
    a relative ``inset`` below the root-exchange line at
    ``delta_units * omega_1`` and returns ``(driven_params, root_k)``.
    """

    def make(params, delta_units, k=1, inset=1e-3):
        w1 = params.omega[0]
        dt = float(delta_units) * w1
        geff = bifurcation_geff(params, dt) * (1.0 - inset)
        root = roots_from_reduced(params, dt, geff)[k]
        assert root.is_real, f"branch {k} not real at delta_units={delta_units}"
        Delta_a, xi = reduced_to_drive(params, dt, geff)
        return params.with_drive(Delta_a, xi), root

    return make


@pytest.fixture()
def rng():
    return np.random.default_rng(20260826)
