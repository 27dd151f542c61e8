import math

import numpy as np
import pytest

from generic.mod_errors import DidNotConverge, DimensionMismatch, NotStationary
import mod_model as mdl
from mod_scenario import OptimizerSettings
import filter_calc.mod_filter as flt
import filter_calc.mod_gainopt as opt
import verify.mod_verify as vf


@pytest.fixture
def scalar_objective():
    return opt.MiObjective(prior_cov=[[1.0]], H=[[1.0]], R=[[1.0]])


def test_mi_of_gain_scalar(scalar_objective):
    assert opt.mi_of_gain(scalar_objective, [[0.0]]) == 0.0
    assert opt.mi_of_gain(scalar_objective, [[0.5]]) == pytest.approx(0.5 * math.log(2.0), abs=1e-12)
    #(1 - K)^2 + K^2 at K = 0.2 is 0.68
    assert opt.mi_of_gain(scalar_objective, [[0.2]]) == pytest.approx(-0.5 * math.log(0.68), abs=1e-12)

def test_gradient_scalar_values(scalar_objective):
    assert opt.mi_gradient(scalar_objective, [[0.0]])[0, 0] == pytest.approx(1.0, abs=1e-14)
    assert opt.mi_gradient(scalar_objective, [[0.5]])[0, 0] == pytest.approx(0.0, abs=1e-15)

def test_gradient_vanishes_at_closed_form_gain(rng):
    for _ in range(50):
        model, predicted = vf.random_update_instance(rng)
        obj = opt.MiObjective.for_model(predicted.cov, model)
        K_star = obj.closed_form_gain()
        np.testing.assert_allclose(K_star, flt.kalman_gain(predicted.cov, model), atol=1e-12)
        assert np.linalg.norm(opt.mi_gradient(obj, K_star)) <= 1e-10

def test_gradient_matches_finite_differences(rng):
    for _ in range(100):
        model, predicted = vf.random_update_instance(rng)
        obj = opt.MiObjective.for_model(predicted.cov, model)
        K = obj.closed_form_gain() + 0.5 * rng.standard_normal(obj.shape)
        analytic = opt.mi_gradient(obj, K)
        numeric = opt.finite_difference_gradient(obj, K)
        assert np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic))) <= 1e-5

def test_mi_increment_matches_difference_of_values(rng):
    model, predicted = vf.random_update_instance(rng)
    obj = opt.MiObjective.for_model(predicted.cov, model)
    K = rng.standard_normal(obj.shape)
    D = rng.standard_normal(obj.shape)
    expected = opt.mi_of_gain(obj, K + 0.3 * D) - opt.mi_of_gain(obj, K)
    assert opt.mi_increment(obj, K, D, 0.3) == pytest.approx(expected, abs=1e-10)

def test_objective_rejects_mismatched_shapes():
    with pytest.raises(DimensionMismatch):
        opt.MiObjective(prior_cov=np.eye(2), H=[[1.0, 0.0, 0.0]], R=[[1.0]])
    obj = opt.MiObjective(prior_cov=np.eye(2), H=[[1.0, 0.0]], R=[[1.0]])
    assert obj.shape == (2, 1)
    with pytest.raises(DimensionMismatch):
        opt.mi_of_gain(obj, np.zeros((1, 2)))

def test_objective_rejects_stale_innovation_cov():
    with pytest.raises(ValueError):
        opt.MiObjective(prior_cov=[[1.0]], H=[[1.0]], R=[[1.0]], S=[[3.0]])

def test_maximize_scalar_golden(scalar_objective):
    trace = opt.maximize_mi(scalar_objective)
    assert trace.converged
    assert trace.final_gain[0, 0] == pytest.approx(0.5, abs=1e-9)
    assert trace.final_mi_nats == pytest.approx(0.5 * math.log(2.0), abs=1e-12)
    assert trace.final_gradient_norm <= 1e-10

def test_maximize_with_constant_step(scalar_objective):
    trace = opt.maximize_mi(scalar_objective, settings=OptimizerSettings(step_rule="constant"))
    assert trace.final_gain[0, 0] == pytest.approx(0.5, abs=1e-9)

def test_maximize_history_is_monotone(rng):
    model, predicted = vf.random_update_instance(rng)
    obj = opt.MiObjective.for_model(predicted.cov, model)
    trace = opt.maximize_mi(obj, init=rng.standard_normal(obj.shape))
    values = [mi for mi, _ in trace.per_iteration]
    assert len(values) == trace.iterations + 1
    assert all(b >= a for a, b in zip(values, values[1:]))

def test_maximize_from_optimum_takes_no_steps(scalar_objective):
    trace = opt.maximize_mi(scalar_objective, init=scalar_objective.closed_form_gain())
    assert trace.iterations == 0

def test_maximize_reports_exhaustion(rng):
    model, predicted = vf.random_update_instance(rng)
    obj = opt.MiObjective.for_model(predicted.cov, model)
    settings = OptimizerSettings(max_iterations=1, step_rule="constant", initial_step=1e-3)
    with pytest.raises(DidNotConverge) as err:
        opt.maximize_mi(obj, init=obj.closed_form_gain() + 1.0, settings=settings)
    assert not err.value.trace.converged
    assert err.value.trace.iterations == 1

def test_maximize_recovers_closed_form_gain(rng):
    for _ in range(10):
        model, predicted = vf.random_update_instance(rng)
        obj = opt.MiObjective.for_model(predicted.cov, model)
        K_star = obj.closed_form_gain()
        trace = opt.maximize_mi(obj)
        assert np.linalg.norm(trace.final_gain - K_star) <= 1e-6 * max(np.linalg.norm(K_star), 1e-300)

@pytest.mark.slow
def test_maximize_recovers_closed_form_gain_many_instances():
    for i in range(100):
        model, predicted = vf.random_update_instance(np.random.default_rng([42, i]))
        obj = opt.MiObjective.for_model(predicted.cov, model)
        K_star = obj.closed_form_gain()
        trace = opt.maximize_mi(obj)
        assert np.linalg.norm(trace.final_gain - K_star) <= 1e-6 * max(np.linalg.norm(K_star), 1e-300)

def test_renyi_objective_has_same_maximizer():
    obj = opt.MiObjective(prior_cov=[[1.0]], H=[[1.0]], R=[[1.0]], order=2.0)
    trace = opt.maximize_mi(obj)
    assert trace.final_gain[0, 0] == pytest.approx(0.5, abs=1e-9)
    assert trace.final_mi_nats == pytest.approx(0.5 * math.log(2.0), abs=1e-12)

def test_scalar_curvature_at_maximum(scalar_objective):
    for direction in ([[1.0]], [[-1.0]]):
        assert opt.curvature_analytic(scalar_objective, [[0.5]], direction) == pytest.approx(-4.0, abs=1e-12)
    report = opt.concavity_check(scalar_objective, [[0.5]], directions=4, seed=1)
    assert report.all_negative
    for value in report.curvatures:
        assert value == pytest.approx(-4.0, rel=1e-3)

def test_concavity_at_maximizer(rng):
    for _ in range(5):
        model, predicted = vf.random_update_instance(rng)
        obj = opt.MiObjective.for_model(predicted.cov, model)
        trace = opt.maximize_mi(obj)
        report = opt.concavity_check(obj, trace.final_gain, directions=50, seed=int(rng.integers(1000)))
        assert len(report.curvatures) == 50
        assert report.all_negative
        assert report.max_relative_error <= 1e-3

def test_concavity_check_refuses_non_stationary_gain(scalar_objective):
    with pytest.raises(NotStationary):
        opt.concavity_check(scalar_objective, [[0.0]], directions=3, seed=0)

def test_optimizer_settings_validation():
    with pytest.raises(ValueError):
        OptimizerSettings(backtrack_factor=1.5)
    with pytest.raises(ValueError):
        OptimizerSettings(step_rule="newton")
    assert OptimizerSettings().step_rule == "bb"

def test_optimal_gain_from_decoupled_model():
    model = mdl.StateSpaceModel.from_matrices(Phi=np.eye(2), Gamma=np.eye(2), H=[[1.0, 0.0]],
                                              Q=np.eye(2), R=[[1.0]])
    obj = opt.MiObjective.for_model(np.eye(2), model)
    trace = opt.maximize_mi(obj)
    np.testing.assert_allclose(trace.final_gain, [[0.5], [0.0]], atol=1e-9)

def wrong_residual(obj, K):
    return K @ obj.S - 2.0 * obj.prior_cov @ obj.H.T

def test_finite_differences_expose_a_wrong_gradient(monkeypatch, scalar_objective):
    monkeypatch.setattr(opt, "_residual", wrong_residual)
    assert opt.mi_gradient(scalar_objective, [[0.0]])[0, 0] == pytest.approx(2.0, abs=1e-14)
    assert opt.finite_difference_gradient(scalar_objective, [[0.0]])[0, 0] == pytest.approx(1.0, abs=1e-8)

def broken_increment(*args, **kwargs):
    raise AssertionError("numeric derivatives must difference mi_of_gain")

def test_numeric_derivatives_do_not_use_the_increment_formula(monkeypatch, scalar_objective, rng):
    model, predicted = vf.random_update_instance(rng)
    obj = opt.MiObjective.for_model(predicted.cov, model)
    K = obj.closed_form_gain() + 0.5 * rng.standard_normal(obj.shape)
    expected = opt.mi_gradient(obj, K)
    monkeypatch.setattr(opt, "mi_increment", broken_increment)
    numeric = opt.finite_difference_gradient(obj, K)
    assert np.max(np.abs(expected - numeric) / np.maximum(1.0, np.abs(expected))) <= 1e-5
    report = opt.concavity_check(scalar_objective, [[0.5]], directions=4, seed=3)
    for value in report.curvatures:
        assert value == pytest.approx(-4.0, rel=1e-3)
