"""Cavity elimination: self-consistent shifts, reduced wall-only model."""

import numpy as np
import pytest

from dwcavity.adiabatic import (COUPLING_MODELS, EffectiveModel, ReducedModel,
                                check_validity, effective_couplings,
                                reduced_covariance, reduced_dw_model,
                                solve_shifts)
from dwcavity.entanglement import analyze_root, log_negativity
from dwcavity.errors import ConvergenceError, DomainError, InvalidParamsError
from dwcavity.steadystate import (SteadyStateRoot, reduced_to_drive,
                                  roots_from_reduced)


def test_solve_shifts_converges_and_is_fixed_point(base, line_point):
    driven, root = line_point(base, -40.0, k=1)
    model = solve_shifts(driven, root)
    assert model.converged and model.iterations < 100
    # fixed-point property: re-evaluating at the converged parameters
    # reproduces the shifts
    again = effective_couplings(driven, root, model.omega_eff,
                                model.kappa_eff, model.coupling_model)
    gd = np.diag(again.G)
    scale = max(np.max(np.abs(model.omega_eff)), driven.kappa_a)
    assert np.max(np.abs(np.asarray(driven.omega) + gd.real
                         - model.omega_eff)) < 1e-9 * scale
    assert np.max(np.abs(np.asarray(driven.kappa) + gd.imag
                         - model.kappa_eff)) < 1e-9 * scale


def test_all_coupling_models_run(base, line_point):
    driven, root = line_point(base, -30.0, k=1)
    models = {m: solve_shifts(driven, root, coupling_model=m)
              for m in COUPLING_MODELS}
    for m, em in models.items():
        assert isinstance(em, EffectiveModel) and em.coupling_model == m
    disp = models["dispersive"]
    # the dispersive limit has real couplings with nu = mu = G
    assert np.allclose(disp.G.imag, 0.0)
    assert np.array_equal(disp.nu_plus, disp.G)
    assert np.array_equal(disp.mu, disp.G)
    with pytest.raises(InvalidParamsError):
        effective_couplings(driven, root, coupling_model="exact")


def test_check_validity_guards(base, line_point):
    driven, root = line_point(base, -30.0, k=1)
    ghost = roots_from_reduced(base, -1.0 * base.omega[0], 1e-4)[1]
    with pytest.raises(DomainError):
        check_validity(driven, ghost)
    from dataclasses import replace

    slow_cavity = replace(driven, kappa_a=0.5 * min(driven.kappa))
    with pytest.raises(DomainError):
        check_validity(slow_cavity, root)
    check_validity(slow_cavity, root, strict=False)  # explicit override


def test_resonant_cavity_response_rejected(base):
    # an artificial root whose effective detuning hits the wall frequency
    # makes the co-rotating response denominator vanish
    root = SteadyStateRoot(label=0, nbar=100.0, alpha=10.0 + 0.0j,
                           beta=(0.0j, 0.0j), Delta_eff=base.omega[0])
    from dataclasses import replace

    equal = replace(base, kappa_a=base.kappa[0])
    with pytest.raises(DomainError):
        effective_couplings(equal, root)


def test_reduced_model_structure(base, line_point):
    driven, root = line_point(base, -40.0, k=1)
    model = reduced_dw_model(driven, root)
    assert isinstance(model, ReducedModel)
    assert model.drift.shape == (4, 4)
    assert model.drift.dtype == np.float64
    assert model.noise.shape == (4,) and np.all(model.noise > 0.0)
    with pytest.raises(InvalidParamsError):
        reduced_dw_model(driven, root, noise_model="white")


def test_reduced_drift_eigenvalues_match_full_wall_modes(base, line_point):
    """Far off resonance the wall eigenvalues of the full 6x6 drift are
    reproduced by the reduced 4x4 model."""
    from dwcavity.linearized import build_drift

    driven, root = line_point(base, -80.0, k=1)
    full = np.linalg.eigvals(build_drift(driven, root))
    red = np.linalg.eigvals(reduced_dw_model(driven, root).drift)
    # match each reduced eigenvalue to its closest full-model partner
    w1 = base.omega[0]
    for lam in red:
        assert np.min(np.abs(full - lam)) < 1e-3 * w1


def _nu_mu_gap(params, delta_units, geff=0.1):
    """Relative gap between the beam-splitter rate (nu_plus, nu_minus
    averaged) and the squeezing rate mu, at fixed reduced drive."""
    delta = delta_units * params.omega[0]
    root = roots_from_reduced(params, delta, geff)[0]
    driven = params.with_drive(*reduced_to_drive(params, delta, geff))
    model = solve_shifts(driven, root)
    off = ~np.eye(2, dtype=bool)
    nu = 0.5 * (model.nu_plus[off] + model.nu_minus[off])
    return np.max(np.abs(nu - model.mu[off])) / np.max(np.abs(model.mu[off]))


def test_nu_equals_mu_far_from_resonance(base):
    # individual counter-/co-rotating rates approach mu only linearly in
    # omega_1/|Delta|; their average converges quadratically and is the
    # rate identified with mu deep in the dispersive regime
    far, very_far = _nu_mu_gap(base, -2e3), _nu_mu_gap(base, -1e4)
    assert far < 1e-6
    assert very_far < 1e-6
    # quadratic approach: a 5x detuning increase shrinks the gap ~25x
    assert very_far < far / 20.0


def test_reduced_negativity_tracks_full_model(base, line_point):
    driven, root = line_point(base, -80.0, k=1)
    full = analyze_root(driven, root).negativity["12"]
    Vr = reduced_covariance(driven, root)
    red = log_negativity(Vr).E
    assert full > 0.0
    assert abs(full - red) <= 0.2 * full


def test_convergence_error_carries_last_model(base, line_point):
    driven, root = line_point(base, -20.0, k=1)
    with pytest.raises(ConvergenceError) as err:
        solve_shifts(driven, root, max_iter=1)
    assert isinstance(err.value.last, EffectiveModel)
    assert err.value.last.converged is False
