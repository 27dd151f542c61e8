import math

import numpy as np
import pytest

import generic.mod_linops as lin
from generic.mod_errors import DimensionMismatch
import mod_model as mdl
import filter_calc.mod_filter as flt
import verify.mod_verify as vf


def test_kalman_gain_scalar(scalar_model):
    np.testing.assert_allclose(flt.kalman_gain([[1.0]], scalar_model), [[0.5]], atol=1e-15)

def test_kalman_gain_zero_measurement_matrix():
    model = mdl.StateSpaceModel.from_matrices(Phi=np.eye(3), Gamma=np.eye(3), H=np.zeros((2, 3)),
                                              Q=np.eye(3), R=np.eye(2))
    np.testing.assert_array_equal(flt.kalman_gain(np.eye(3), model), np.zeros((3, 2)))

def test_kalman_gain_perfect_measurement_limit(scalar_model):
    model = scalar_model.with_measurement_noise([[1e-12]])
    assert flt.kalman_gain([[1.0]], model)[0, 0] == pytest.approx(1.0, abs=1e-9)

def test_update_with_zero_gain_leaves_prior(scalar_model):
    prior = mdl.GaussianBelief([0.7], [[2.0]])
    record = flt.update_joseph(prior, [3.0], np.zeros((1, 1)), scalar_model)
    np.testing.assert_array_equal(record.posterior.mean, prior.mean)
    np.testing.assert_array_equal(record.posterior.cov, prior.cov)
    assert record.mi_nats == 0.0

def test_update_joseph_scalar_arithmetic(scalar_model, unit_belief):
    record = flt.update_joseph(unit_belief, [2.0], [[0.5]], scalar_model)
    assert record.posterior.mean[0] == pytest.approx(1.0, abs=1e-15)
    assert record.posterior.cov[0, 0] == pytest.approx(0.5, abs=1e-15)
    np.testing.assert_array_equal(record.innovation, [2.0])

def test_update_joseph_suboptimal_gain(scalar_model, unit_belief):
    record = flt.update_joseph(unit_belief, [0.0], [[0.2]], scalar_model)
    assert record.posterior.cov[0, 0] == pytest.approx(0.68, abs=1e-15)
    assert record.posterior.cov[0, 0] > 0.5

def test_update_joseph_rejects_wrong_shapes(scalar_model, unit_belief):
    with pytest.raises(DimensionMismatch):
        flt.update_joseph(unit_belief, [0.0], np.zeros((2, 1)), scalar_model)
    with pytest.raises(DimensionMismatch):
        flt.update_joseph(unit_belief, [0.0, 1.0], [[0.5]], scalar_model)

def test_update_optimal_golden_case(scalar_model, unit_belief):
    record = flt.update_optimal(unit_belief, [0.0], scalar_model)
    assert record.gain[0, 0] == pytest.approx(0.5, abs=1e-15)
    np.testing.assert_array_equal(record.posterior.mean, [0.0])
    assert record.posterior.cov[0, 0] == pytest.approx(0.5, abs=1e-12)
    assert record.mi_nats == pytest.approx(0.5 * math.log(2.0), abs=1e-12)
    assert record.mi_nats == pytest.approx(0.3465735903, abs=1e-10)

def test_update_optimal_decoupled_coordinates():
    model = mdl.StateSpaceModel.from_matrices(Phi=np.eye(2), Gamma=np.eye(2), H=[[1.0, 0.0]],
                                              Q=np.eye(2), R=[[1.0]])
    record = flt.update_optimal(mdl.GaussianBelief([0.0, 0.0], np.eye(2)), [1.0], model)
    np.testing.assert_allclose(record.gain, [[0.5], [0.0]], atol=1e-15)
    np.testing.assert_allclose(record.posterior.cov, np.diag([0.5, 1.0]), atol=1e-15)

def test_update_optimal_matches_information_form(rng):
    n, m = 3, 2
    A = rng.standard_normal((n, n))
    B = rng.standard_normal((m, m))
    P = lin.sym_matrix(A @ A.T + np.eye(n))
    R = lin.sym_matrix(B @ B.T + 0.5 * np.eye(m))
    H = rng.standard_normal((m, n))
    model = mdl.StateSpaceModel.from_matrices(Phi=np.eye(n), Gamma=np.eye(n), H=H, Q=np.eye(n), R=R)
    record = flt.update_optimal(mdl.GaussianBelief(np.zeros(n), P), rng.standard_normal(m), model)
    expected = np.linalg.inv(np.linalg.inv(P) + H.T @ np.linalg.inv(R) @ H)
    np.testing.assert_allclose(record.posterior.cov, expected, atol=1e-9)

def test_innovation_identity(rng):
    model, predicted = vf.random_update_instance(rng)
    z = rng.standard_normal(model.m)
    record = flt.update_optimal(predicted, z, model)
    np.testing.assert_array_equal(record.innovation, z - model.H @ predicted.mean)
    assert record.nis >= 0.0

def test_joseph_posterior_symmetric_positive_for_any_gain(rng):
    for _ in range(50):
        model, predicted = vf.random_update_instance(rng)
        K = 3.0 * rng.standard_normal((model.n, model.m))
        cov = flt.joseph_cov(predicted.cov, K, model)
        np.testing.assert_array_equal(cov, cov.T)
        assert lin.is_spd(cov)

def test_optimal_gain_minimizes_log_det(rng):
    for _ in range(100):
        model, predicted = vf.random_update_instance(rng)
        K_star = flt.kalman_gain(predicted.cov, model)
        best = lin.log_det_spd(flt.joseph_cov(predicted.cov, K_star, model))
        best_mi = flt.update_optimal(predicted, np.zeros(model.m), model).mi_nats
        for _ in range(100):
            delta = rng.standard_normal(K_star.shape)
            delta *= rng.uniform(0.0, 0.1) / np.linalg.norm(delta)
            other = lin.log_det_spd(flt.joseph_cov(predicted.cov, K_star + delta, model))
            assert other >= best - 1e-12
            other_mi = flt.update_joseph(predicted, np.zeros(model.m), K_star + delta, model).mi_nats
            assert best_mi >= other_mi - 1e-12

def test_joseph_and_short_form_agree_at_optimal_gain(rng):
    for _ in range(100):
        model, predicted = vf.random_update_instance(rng)
        K = flt.kalman_gain(predicted.cov, model)
        joseph = flt.joseph_cov(predicted.cov, K, model)
        short = flt.update_short_form(predicted.cov, K, model)
        assert np.linalg.norm(joseph - short) <= 1e-10 * np.linalg.norm(predicted.cov)

def test_posterior_determinant_never_exceeds_prior(rng):
    for _ in range(100):
        model, predicted = vf.random_update_instance(rng)
        record = flt.update_optimal(predicted, rng.standard_normal(model.m), model)
        assert record.mi_nats >= -1e-12
        assert lin.log_det_spd(record.posterior.cov) <= lin.log_det_spd(record.prior.cov) + 1e-10

def test_steady_state_matches_fixed_point_iteration():
    model = mdl.StateSpaceModel.from_matrices(Phi=[[1.0]], Gamma=[[1.0]], H=[[1.0]], Q=[[0.01]], R=[[1.0]])
    P = 1.0
    for _ in range(10000):
        P = P - P * P / (P + 1.0) + 0.01
    prior, posterior = flt.steady_state_covariance(model)
    assert prior[0, 0] == pytest.approx(P, rel=1e-10)
    assert posterior[0, 0] == pytest.approx(P / (P + 1.0), rel=1e-10)
