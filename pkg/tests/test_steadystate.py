"""Mean-field roots: cubic solutions, reduced coordinates, time-domain oracle."""

import math

import numpy as np
import pytest
from cubic_reference import real_root_count

from dwcavity.errors import ConvergenceError, DomainError, InvalidParamsError
from dwcavity.params import SystemParams
from dwcavity.steadystate import (bifurcation_amplitude, bifurcation_geff,
                                  branch_root, compute_Omega, cubic_residual,
                                  effective_detuning, integrate_mean_field,
                                  reduced_to_drive, roots_from_reduced,
                                  solve_mean_field, three_root_region)


def draw_params(rng, drive=True):
    """Random two-mode configuration with moderate damping hierarchies."""
    w1 = 10 ** rng.uniform(8.5, 9.5)
    w2 = w1 * 10 ** rng.uniform(-1.0, 1.0)
    kap = tuple(w * 10 ** rng.uniform(-2.0, -0.7) for w in (w1, w2))
    ka = w1 * 10 ** rng.uniform(-2.0, -0.5)
    g = tuple(w * 10 ** rng.uniform(-3.5, -1.5) for w in (w1, w2))
    Delta_a = rng.uniform(-5.0, 2.0) * w1
    xi = 10 ** rng.uniform(-2.0, 2.0) * w1 if drive else 0.0
    return SystemParams(omega=(w1, w2), g=g, kappa=kap, kappa_a=ka,
                        Delta_a=Delta_a, xi=xi)


def test_compute_omega_hand_formula(base):
    expected = sum(2.0 * g * g * w / (w * w + k * k)
                   for g, w, k in zip(base.g, base.omega, base.kappa))
    assert compute_Omega(base) == pytest.approx(expected, rel=1e-14)
    assert effective_detuning(base, 7.0) == pytest.approx(
        base.Delta_a + expected * 7.0, rel=1e-14)


def test_undriven_single_zero_root(base):
    roots = solve_mean_field(base)
    assert len(roots) == 1
    r = roots[0]
    assert r.nbar == 0.0 and r.alpha == 0.0
    assert all(b == 0.0 for b in r.beta)
    assert r.is_real and not r.degenerate
    assert cubic_residual(base, r.nbar) == 0.0


def test_random_draw_residuals_counts_order(rng):
    for _ in range(400):
        p = draw_params(rng)
        roots = solve_mean_field(p)
        assert len(roots) in (1, 3)
        nbars = [r.nbar for r in roots]
        assert nbars == sorted(nbars)
        assert all(n >= 0.0 for n in nbars)
        for r in roots:
            assert cubic_residual(p, r.nbar) < 1e-10
            # amplitudes reproduce the photon number they were built from
            assert abs(r.alpha) ** 2 == pytest.approx(r.nbar, rel=1e-12,
                                                      abs=1e-300)


def test_root_amplitudes_are_stationary(rng):
    """alpha and beta satisfy the zero-velocity conditions of the flow."""
    for _ in range(50):
        p = draw_params(rng)
        for r in solve_mean_field(p):
            shift = sum(2.0 * gj * b.real for gj, b in zip(p.g, r.beta))
            dalpha = (1j * (p.Delta_a - shift) - p.kappa_a) * r.alpha + p.xi
            scale = max(abs(r.alpha), 1.0) * max(abs(p.Delta_a), p.kappa_a)
            assert abs(dalpha) <= 1e-8 * scale
            for gj, wj, kj, b in zip(p.g, p.omega, p.kappa, r.beta):
                dbeta = -(kj + 1j * wj) * b - 1j * gj * r.nbar
                assert abs(dbeta) <= 1e-8 * max(abs(b), 1.0) * wj


def test_branch0_photon_number_exact(base):
    w1 = base.omega[0]
    for du, ge in [(-0.5, 0.1), (-1.0, 0.3), (-3.0, 0.8), (-20.0, 0.5)]:
        roots = roots_from_reduced(base, du * w1, ge)
        G = ge * w1 / abs(base.g[0])
        assert roots[0].nbar == pytest.approx(G * G, rel=1e-12)
        assert roots[0].is_real


def test_reduced_roots_match_direct_solver(base, rng):
    w1 = base.omega[0]
    for _ in range(60):
        du = rng.uniform(-30.0, 0.9)
        ge = rng.uniform(0.01, 1.0)
        Delta_a, xi = reduced_to_drive(base, du * w1, ge)
        driven = base.with_drive(Delta_a, xi)
        direct = sorted(r.nbar for r in solve_mean_field(driven))
        reduced = sorted(r.nbar for r in roots_from_reduced(base, du * w1, ge)
                         if r.is_real)
        assert len(direct) == len(reduced)
        for a, b in zip(direct, reduced):
            assert a == pytest.approx(b, rel=1e-8, abs=1e-6)


def test_fold_region_matches_exact_discriminant(base):
    """Dual-method boundary: closed-form region vs exact cubic discriminant."""
    w1 = base.omega[0]
    Omega = compute_Omega(base)
    deltas = np.linspace(-3.0, 1.0, 60) * w1
    geffs = np.linspace(1e-4, 1.0, 60)
    region = three_root_region(base, deltas[:, None], geffs[None, :])
    for i, dt in enumerate(deltas):
        for j, ge in enumerate(geffs):
            Delta_a, xi = reduced_to_drive(base, dt, ge)
            expected = real_root_count(Omega, Delta_a, base.kappa_a, xi) == 3
            assert region[i, j] == expected, (dt / w1, ge)


def test_nonreal_branches_flagged(base):
    w1 = base.omega[0]
    roots = roots_from_reduced(base, -1.0 * w1, 1e-4)  # below the fold
    assert roots[0].is_real
    assert not roots[1].is_real and not roots[2].is_real
    assert math.isnan(roots[1].nbar)
    with pytest.raises(DomainError):
        branch_root(base, -1.0 * w1, 1e-4, 1)
    with pytest.raises(DomainError):
        branch_root(base, -1.0 * w1, 0.3, 7)


def test_bifurcation_line_formula_and_degeneracy(base):
    w1 = base.omega[0]
    Omega = compute_Omega(base)
    dt = -3.0 * w1
    G = bifurcation_amplitude(base, dt)
    assert G * G == pytest.approx(
        (base.kappa_a ** 2 + dt * dt) / (2.0 * (-dt) * Omega), rel=1e-13)
    assert bifurcation_geff(base, dt) == pytest.approx(
        G * abs(base.g[0]) / w1, rel=1e-15)
    # on the line, branch 0 collides with a fold branch
    roots = roots_from_reduced(base, dt, bifurcation_geff(base, dt))
    flags = [r.degenerate for r in roots if r.is_real]
    assert sum(flags) >= 2
    with pytest.raises(DomainError):
        bifurcation_amplitude(base, +1.0 * w1)
    decoupled = SystemParams(omega=base.omega, g=(0.0, 0.0),
                             kappa=base.kappa, kappa_a=base.kappa_a)
    with pytest.raises(DomainError):
        bifurcation_amplitude(decoupled, dt)
    with pytest.raises(InvalidParamsError):
        roots_from_reduced(decoupled, dt, 0.3)


def _fast_params():
    """Strongly damped configuration so time integration settles quickly."""
    return SystemParams(omega=(1e9, 1.3e9), g=(8e7, 6e7),
                        kappa=(8e7, 1.2e8), kappa_a=1.5e8,
                        Delta_a=-1e9, xi=3e8)


def test_integrate_mean_field_settles_to_root():
    p = _fast_params()
    roots = solve_mean_field(p)
    assert len(roots) == 1
    traj = integrate_mean_field(p)
    n_final = abs(traj.alpha[-1]) ** 2
    assert n_final == pytest.approx(roots[0].nbar, rel=1e-6)
    assert traj.settled.nbar == roots[0].nbar
    assert traj.beta.shape[0] == p.n_modes
    for j in range(p.n_modes):
        assert traj.beta[j, -1] == pytest.approx(roots[0].beta[j], rel=1e-5)


def test_integrate_mean_field_short_horizon_raises():
    p = _fast_params()
    with pytest.raises(ConvergenceError):
        integrate_mean_field(p, horizon=1e-10)


def test_integrate_mean_field_bistable_lands_on_lowest_root():
    p = SystemParams(omega=(1e9, 1e9), g=(5e7, 5e7), kappa=(6e7, 6e7),
                     kappa_a=1.2e8)
    dt = -2.0 * p.omega[0]
    ge = 0.5 * bifurcation_geff(p, dt)
    assert bool(three_root_region(p, dt, ge))
    Delta_a, xi = reduced_to_drive(p, dt, ge)
    driven = p.with_drive(Delta_a, xi)
    nbars = [r.nbar for r in solve_mean_field(driven)]
    assert len(nbars) == 3
    traj = integrate_mean_field(driven)
    # vacuum lies in the basin of the dim branch
    assert traj.settled.nbar == nbars[0]
    assert abs(traj.alpha[-1]) ** 2 == pytest.approx(nbars[0], rel=1e-6)
