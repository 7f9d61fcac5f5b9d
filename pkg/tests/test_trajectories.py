"""Stochastic ensemble simulation against the deterministic solvers."""

import numpy as np
import pytest

from gendyne import (
    ThermalBath,
    TrajectoryConfig,
    UnravellingMatrix,
    default_burn_in,
    ensemble_statistics,
    feedback_gain,
    lyapunov_steady_state,
    measurement_matrices,
    named_unravelling,
    riccati_steady_state,
    simulate_closed_loop,
    simulate_conditional,
    thermal_drift_diffusion,
)


def free_system(*occ):
    return thermal_drift_diffusion(None, ThermalBath(occ))


def optimal_setup(occ=1.0):
    bath = ThermalBath((occ,))
    dd, couplings = thermal_drift_diffusion(None, bath)
    m = measurement_matrices(couplings, named_unravelling("optimal_squeeze", bath))
    return dd, m


def test_config_validation():
    with pytest.raises(ValueError):
        TrajectoryConfig(dt=0.0, horizon=1.0, n_traj=1, seed=1)
    with pytest.raises(ValueError):
        TrajectoryConfig(dt=0.1, horizon=0.01, n_traj=1, seed=1)
    with pytest.raises(ValueError):
        TrajectoryConfig(dt=0.1, horizon=1.0, n_traj=0, seed=1)
    with pytest.raises(ValueError):
        TrajectoryConfig(dt=0.1, horizon=1.0, n_traj=1, seed=1, record_stride=0)


def test_noise_free_contraction_is_deterministic():
    dd, couplings = free_system(0.0)
    m = measurement_matrices(couplings, UnravellingMatrix.zero(2))
    cfg = TrajectoryConfig(dt=1e-3, horizon=2.0, n_traj=4, seed=3, record_stride=100)
    rec = simulate_conditional(dd, m, np.eye(2), np.array([2.0, 0.0]), cfg)
    expected = 2.0 * np.exp(-rec.times / 2.0)
    assert np.allclose(rec.means[0, :, 0], expected, atol=2e-3)
    assert np.all(rec.means[:, :, 1] == 0.0)
    # no noise enters: every trajectory is the same curve
    for k in range(1, cfg.n_traj):
        assert np.array_equal(rec.means[k], rec.means[0])


def test_sigma_path_converges_to_riccati():
    dd, m = optimal_setup(1.0)
    cfg = TrajectoryConfig(dt=1e-2, horizon=40.0, n_traj=1, seed=5, record_stride=100)
    rec = simulate_conditional(dd, m, 3.0 * np.eye(2), np.zeros(2), cfg)
    target = riccati_steady_state(dd, m).matrix
    assert np.max(np.abs(rec.sigma_c_path[-1] - target)) <= 1e-6
    assert np.allclose(target, np.diag([1.0 / 3.0, 3.0]), atol=1e-9)
    # the covariance path is one shared deterministic array for the ensemble
    assert rec.sigma_c_path.shape == (len(rec.times), 2, 2)


def test_reproducibility_bit_identical():
    dd, m = optimal_setup(1.0)
    cfg = TrajectoryConfig(
        dt=1e-3, horizon=1.0, n_traj=7, seed=99, record_stride=10, record_currents=True
    )
    rec1 = simulate_conditional(dd, m, 3.0 * np.eye(2), np.zeros(2), cfg)
    rec2 = simulate_conditional(dd, m, 3.0 * np.eye(2), np.zeros(2), cfg)
    assert np.array_equal(rec1.means, rec2.means)
    assert np.array_equal(rec1.currents, rec2.currents)
    assert np.array_equal(rec1.sigma_c_path, rec2.sigma_c_path)


def test_trajectory_streams_independent_of_ensemble_size():
    # trajectory i draws the same noise no matter how many others run
    dd, m = optimal_setup(1.0)
    small = TrajectoryConfig(dt=1e-3, horizon=0.5, n_traj=3, seed=11, record_stride=10)
    large = TrajectoryConfig(dt=1e-3, horizon=0.5, n_traj=6, seed=11, record_stride=10)
    rec_small = simulate_conditional(dd, m, 3.0 * np.eye(2), np.zeros(2), small)
    rec_large = simulate_conditional(dd, m, 3.0 * np.eye(2), np.zeros(2), large)
    assert np.array_equal(rec_small.means, rec_large.means[:3])


def test_current_increment_variance():
    # with C = 0 the record is pure white noise of variance dt per step
    dd, couplings = free_system(1.0)
    m = measurement_matrices(couplings, UnravellingMatrix.zero(2))
    cfg = TrajectoryConfig(
        dt=1e-3, horizon=20.0, n_traj=4, seed=17, record_stride=1000, record_currents=True
    )
    rec = simulate_conditional(dd, m, 3.0 * np.eye(2), np.zeros(2), cfg)
    steps = rec.currents.shape[0] * rec.currents.shape[1]
    var = rec.currents.reshape(steps, -1).var(axis=0, ddof=1)
    band = 5.0 / np.sqrt(steps)
    assert np.all(var >= cfg.dt * (1.0 - band))
    assert np.all(var <= cfg.dt * (1.0 + band))


def test_conditional_moment_identity():
    # no feedback: classical mean spread restores the unconditional CM
    dd, m = optimal_setup(1.0)
    cfg = TrajectoryConfig(dt=2e-3, horizon=14.0, n_traj=600, seed=23, record_stride=50)
    rec = simulate_conditional(dd, m, 3.0 * np.eye(2), np.zeros(2), cfg)
    stats = ensemble_statistics(rec, (10.0, 14.0))
    target = lyapunov_steady_state(dd).matrix
    dev = np.abs(stats.sigma - target)
    assert np.all(dev <= 3.0 * np.maximum(stats.se_sigma, 1e-12) + 1e-9)


def test_closed_loop_cancels_mean_noise():
    dd, m = optimal_setup(1.0)
    sigma_c = riccati_steady_state(dd, m).matrix
    fb = feedback_gain(sigma_c, m)
    cfg = TrajectoryConfig(dt=2e-3, horizon=16.0, n_traj=500, seed=29, record_stride=50)
    rec = simulate_closed_loop(dd, m, fb, cfg, sigma_c0=3.0 * np.eye(2))
    stats = ensemble_statistics(rec, (10.0, 16.0))
    assert np.max(np.abs(stats.tau)) <= 1e-3  # residual from the transient only
    assert stats.sigma[0, 0] == pytest.approx(1.0 / 3.0, abs=1e-3)
    assert abs(stats.mean[0]) <= 3.0 * max(stats.se_mean[0], 1e-6)


def test_closed_loop_homodyne_nonlocal_thermal():
    bath = ThermalBath((1.0, 1.0))
    dd, couplings = thermal_drift_diffusion(None, bath)
    m = measurement_matrices(couplings, named_unravelling("homodyne_nonlocal", bath))
    sigma_c = riccati_steady_state(dd, m).matrix
    fb = feedback_gain(sigma_c, m)
    # homodyne conveys nothing at the thermal fixed point: the gain vanishes
    # (up to the conditional solver residual)
    assert np.max(np.abs(fb.b)) < 1e-6
    cfg = TrajectoryConfig(dt=2e-3, horizon=12.0, n_traj=100, seed=31, record_stride=50)
    rec = simulate_closed_loop(dd, m, fb, cfg, sigma_c0=lyapunov_steady_state(dd).matrix)
    stats = ensemble_statistics(rec, (8.0, 12.0))
    assert np.max(np.abs(stats.sigma - 3.0 * np.eye(4))) <= 1e-6
    from gendyne import Bipartition, log_negativity

    assert log_negativity(stats.sigma, Bipartition.last_modes(2)) == 0.0


def test_zero_efficiency_reduces_to_lyapunov_statistics():
    from gendyne import apply_efficiency

    bath = ThermalBath((1.0,))
    dd, couplings = thermal_drift_diffusion(None, bath)
    u = apply_efficiency(named_unravelling("optimal_squeeze", bath), 0.0)
    m = measurement_matrices(couplings, u, dd)
    sigma_lyap = lyapunov_steady_state(dd).matrix
    fb = feedback_gain(sigma_lyap, m)
    assert np.all(fb.b == 0.0)
    cfg = TrajectoryConfig(dt=5e-3, horizon=8.0, n_traj=20, seed=43, record_stride=20)
    rec = simulate_closed_loop(dd, m, fb, cfg, sigma_c0=sigma_lyap)
    stats = ensemble_statistics(rec, (4.0, 8.0))
    # nothing is measured: means never move and the CM is the Lyapunov one
    assert np.all(rec.means == 0.0)
    assert np.allclose(stats.sigma, sigma_lyap, atol=1e-12)


def test_closed_loop_entangler_reconstruction():
    bath = ThermalBath((1.0, 1.0))
    dd, couplings = thermal_drift_diffusion(None, bath)
    m = measurement_matrices(couplings, named_unravelling("optimal_entangle", bath))
    sigma_c = riccati_steady_state(dd, m).matrix
    fb = feedback_gain(sigma_c, m)
    cfg = TrajectoryConfig(dt=2e-3, horizon=14.0, n_traj=400, seed=53, record_stride=50)
    rec = simulate_closed_loop(dd, m, fb, cfg, sigma_c0=lyapunov_steady_state(dd).matrix)
    stats = ensemble_statistics(rec, (10.0, 14.0))
    from gendyne import Bipartition, log_negativity

    reconstructed = log_negativity(stats.sigma, Bipartition.last_modes(2))
    assert reconstructed == pytest.approx(np.log2(3.0), abs=0.05)


def test_step_halving_consistency():
    # stationary variance estimates shift by less than the Monte-Carlo error
    dd, m = optimal_setup(1.0)
    estimates, errors = [], []
    for dt in (1e-2, 5e-3, 2.5e-3):
        cfg = TrajectoryConfig(dt=dt, horizon=14.0, n_traj=400, seed=37, record_stride=max(1, int(0.1 / dt)))
        rec = simulate_conditional(dd, m, 3.0 * np.eye(2), np.zeros(2), cfg)
        stats = ensemble_statistics(rec, (10.0, 14.0))
        estimates.append(stats.sigma[0, 0])
        errors.append(stats.se_sigma[0, 0])
    for k in range(len(estimates) - 1):
        tol = 3.0 * np.hypot(errors[k], errors[k + 1])
        assert abs(estimates[k] - estimates[k + 1]) <= tol


def test_ensemble_statistics_edges():
    dd, m = optimal_setup(1.0)
    cfg = TrajectoryConfig(dt=1e-2, horizon=1.0, n_traj=3, seed=41, record_stride=10)
    rec = simulate_conditional(dd, m, 3.0 * np.eye(2), np.zeros(2), cfg)
    with pytest.raises(ValueError):
        ensemble_statistics(rec, (5.0, 6.0))
    # all-zero means: tau = 0 and sigma reduces to the deterministic CM part
    zeroed = rec.__class__(rec.times, np.zeros_like(rec.means), rec.sigma_c_path)
    stats = ensemble_statistics(zeroed, (0.0, 1.0))
    assert np.all(stats.tau == 0.0)
    assert np.allclose(stats.sigma, stats.sigma_c)


def test_default_burn_in():
    dd, _ = free_system(1.0)
    assert default_burn_in(dd) == pytest.approx(10.0)
