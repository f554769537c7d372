import math

import numpy as np
import pytest

from peakwave.errors import BlowUpError, DomainError, PreconditionError
from peakwave.evolution import (
    EvolutionState,
    LinearizedModel,
    NonlinearModel,
    default_time_step,
    h1_norm,
    integrate,
    no_growth_test,
    random_admissible_perturbation,
    rhs_linearized,
    rhs_nonlinear,
    step_rk4,
    track_orbit,
)
from peakwave.phase_plane import (
    peaked_profile,
    reconstruct_profile,
    solve_level_for_speed,
    trivial_profile,
    uniform_grid,
)


@pytest.fixture(scope="module")
def wave256():
    return reconstruct_profile(solve_level_for_speed(1.05, "smooth", tol=0.0), 256)


def test_traveling_wave_is_stationary(wave256):
    model = NonlinearModel(256, 1.05)
    a = model.coefficients(wave256.eta)
    assert np.max(np.abs(model(a))) < 1e-12 * np.max(np.abs(a))
    s = EvolutionState(0.0, a, 1.05)
    assert np.allclose(rhs_nonlinear(s), model(a))


def test_dealiasing_mask():
    m = NonlinearModel(48, 1.0)
    assert m.mask.sum() == 16 and NonlinearModel(48, 1.0, dealias=False).mask.all()
    with pytest.raises(DomainError):
        NonlinearModel(47, 1.0)


def test_h1_norm_of_single_mode():
    N = 32
    u = uniform_grid(N)
    # ||sin 3u||_H1^2 = (1 + 9) * pi
    assert h1_norm(np.fft.rfft(np.sin(3 * u)), N) == pytest.approx(math.sqrt(10 * math.pi), rel=1e-14)


def test_rk4_fourth_order(wave256):
    c = 1.05
    model = NonlinearModel(256, c)
    lin = LinearizedModel(wave256)
    a0 = model.coefficients(wave256.eta + random_admissible_perturbation(lin, 3, amplitude=0.05))
    s0 = EvolutionState(0.0, a0, c)
    finals = [integrate(s0, model, dt, 0.4)[-1].values() for dt in (0.04, 0.02, 0.01)]
    e1 = np.max(np.abs(finals[0] - finals[1]))
    e2 = np.max(np.abs(finals[1] - finals[2]))
    assert math.log2(e1 / e2) == pytest.approx(4.0, abs=0.3)


def test_time_reversibility(wave256):
    model = NonlinearModel(256, 1.05)
    a = model.coefficients(0.9 * wave256.eta)
    s = EvolutionState(0.0, a, 1.05)
    back = step_rk4(step_rk4(s, 1e-3, model), -1e-3, model)
    assert np.max(np.abs(back.coeffs - a)) < 1e-12 * np.max(np.abs(a))
    with pytest.raises(DomainError):
        step_rk4(s, 0.0, model)


def test_conservation_for_perturbed_wave(wave256):
    c = 1.05
    model = NonlinearModel(256, c)
    lin = LinearizedModel(wave256)
    a0 = model.coefficients(wave256.eta + random_admissible_perturbation(lin, 5, amplitude=0.02))
    run = integrate(EvolutionState(0.0, a0, c), model, 1e-3, 1.0, record_every=0.25)
    M0, Q0 = run[0].ledger.M, run[0].ledger.Q
    assert max(abs(s.ledger.M - M0) for s in run) < 1e-12
    assert max(abs(s.ledger.Q - Q0) for s in run) < 1e-8


def test_breaking_guard():
    # steep sine data develops an unbounded slope near t = 0.4 (resolved at N = 1024)
    N, c = 1024, 1.0
    model = NonlinearModel(N, c)
    a0 = model.coefficients(4.0 * np.sin(uniform_grid(N)))
    with pytest.raises(BlowUpError) as info:
        integrate(EvolutionState(0.0, a0, c), model, 5e-5, 0.8)
    assert 0.3 < info.value.t < 0.5


def test_integrate_validation(wave256):
    model = NonlinearModel(256, 1.05)
    s = EvolutionState(0.0, model.coefficients(wave256.eta), 1.05)
    with pytest.raises(DomainError):
        integrate(s, model, 0.3, 1.0)
    with pytest.raises(DomainError):
        integrate(s, model, -0.1, 1.0)
    assert len(integrate(s, model, 0.01, 0.05)) == 2


def test_default_time_step(wave256):
    dt = default_time_step(wave256.eta, 1.05)
    assert 0 < dt <= 1e-3


def test_linearized_kernel_and_perturbation(wave256):
    lin = LinearizedModel(wave256)
    # eta' is a steady solution of the linearized flow
    r = lin(lin.coefficients(lin.eta_u))
    assert np.max(np.abs(r)) < 1e-9 * np.max(np.abs(lin.coefficients(lin.eta_u)))
    w = random_admissible_perturbation(lin, seed=11, amplitude=0.03)
    assert math.sqrt(lin.inner(w, w)) == pytest.approx(0.03, rel=1e-12)
    assert abs(lin.inner(np.ones_like(w), w)) < 1e-14
    assert abs(lin.inner(lin.eta_uu, w)) < 1e-14
    assert np.array_equal(w, random_admissible_perturbation(lin, seed=11, amplitude=0.03))
    s = EvolutionState(0.0, lin.coefficients(w), 1.05)
    assert np.allclose(rhs_linearized(s, wave256), lin(s.coeffs))


def test_linearized_invariants_short_run(wave256):
    lin = LinearizedModel(wave256)
    w = random_admissible_perturbation(lin, seed=2)
    run = integrate(EvolutionState(0.0, lin.coefficients(w), 1.05), lin, 1e-3, 2.0, record_every=0.5)
    e0 = run[0].diagnostics["energy"]
    assert max(abs(s.diagnostics["energy"] - e0) for s in run) < 1e-9 * abs(e0)
    track = track_orbit(run, lin)
    assert track.sup_residual_ratio < 5


def test_track_orbit_rejects_unconstrained_data(wave256):
    lin = LinearizedModel(wave256)
    run = [EvolutionState(0.0, lin.coefficients(np.ones(256) * 1e-3), 1.05)]
    with pytest.raises(PreconditionError):
        track_orbit(run, lin)


def test_no_growth_test():
    t = np.linspace(0, 50, 201)
    rng = np.random.default_rng(0)
    assert no_growth_test(t, 1 + 0.05 * np.sin(3 * t) + 0.01 * rng.standard_normal(t.size))["passed"]
    assert not no_growth_test(t, 1 + 0.1 * t)["passed"]


def test_constant_background_modes_rotate():
    c, N, n = 1.3, 64, 3
    lin = LinearizedModel(trivial_profile(c, N))
    a = lin.coefficients(np.cos(n * uniform_grid(N)))
    rate = lin(a)
    expected = -(c * c * n * n - 1) / (2 * c * 1j * n)
    assert rate[n] == pytest.approx(expected * a[n], rel=1e-12)
    assert np.allclose(np.delete(rate, n), 0, atol=1e-12)


def test_neutral_direction_has_zero_residual(wave256):
    lin = LinearizedModel(wave256)
    run = integrate(EvolutionState(0.0, lin.coefficients(lin.eta_u), 1.05), lin, 1e-3, 0.5,
                    record_every=0.1)
    track = track_orbit(run, lin)
    assert np.max(track.residual_norm) < 1e-9 * track.initial_norm
    assert np.allclose(track.a, 1.0, atol=1e-9)


def test_curvature_constraint_drift_per_unit_time(wave256):
    lin = LinearizedModel(wave256)
    w = random_admissible_perturbation(lin, seed=9)
    run = integrate(EvolutionState(0.0, lin.coefficients(w), 1.05), lin, 1e-3, 1.0)
    drift = abs(run[-1].diagnostics["curvature_constraint"] - run[0].diagnostics["curvature_constraint"])
    assert drift / (run[-1].t - run[0].t) < 1e-8


def test_smooth_data_conservation_at_reference_resolution():
    c, N = 1.05, 512
    wave = reconstruct_profile(solve_level_for_speed(c, "smooth", tol=0.0), N)
    model = NonlinearModel(N, c)
    w = random_admissible_perturbation(LinearizedModel(wave), seed=1, amplitude=0.01)
    a0 = model.coefficients(wave.eta + w)
    run = integrate(EvolutionState(0.0, a0, c), model, 1e-3, 10.0, record_every=1.0)
    first = run[0].ledger
    assert max(abs(s.ledger.M - first.M) for s in run) < 1e-10
    assert max(abs(s.ledger.Q - first.Q) for s in run) < 1e-8
    assert max(abs(s.ledger.H - first.H) for s in run) < 1e-6


def test_tail_energy_separates_smooth_from_kinked_data(wave256):
    model = NonlinearModel(256, 1.05)
    smooth = model.invariants(model.coefficients(wave256.eta))["tail_energy"]
    kinked = model.invariants(model.coefficients(peaked_profile(256).eta))["tail_energy"]
    # analytic data decays geometrically in n, a kink only algebraically
    assert smooth < 1e-15 < 1e-4 < kinked
