#!/usr/bin/env python
# -*- coding: UTF-8 -*-

# mod_verify.py -- module Verify. The verification suite. Every check draws seeded
# random instances and measures the largest deviation from its oracle:
#   gain_equivalence     optimizer gain vs closed-form gain (relative Frobenius)
#   gradient_fidelity    analytic gradient vs central differences
#   concavity            directional second differences at the maximizer
#   renyi_equivalence    Renyi MI vs Shannon MI for several orders
#   schur_determinant    three log-determinant forms of a joint covariance
#   mi_form_consistency  update-ratio MI vs joint-form MI
#   joseph_short_form    Joseph vs short covariance form at the optimal gain
# Instance i of check j is drawn from default_rng([seed, j, i]), so results do not
# depend on the order (or the thread) instances run in.
#
# This file is part of the "infokalman" Python library
# for deriving the Kalman filter gain from the mutual information
# between the predicted state and the measurement
#

from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np
import scipy

import generic.mod_constants as c
import generic.mod_linops as lin
from generic.mod_errors import DidNotConverge
import mod_model as mdl
from mod_scenario import CheckResult, ReportMetadata, VerificationReport
import filter_calc.mod_filter as flt
import filter_calc.mod_gainopt as opt
import filter_calc.mod_information as info
import log_utils

logger = log_utils.getLogger(__name__)

verifyCfg = {}  #suite configuration, loaded from verify/verify_cfg.json by mod_json


###############################################################################
##                             RANDOM INSTANCES                              ##
###############################################################################
def random_spd(rng, n, floor=0.5):
    A = rng.standard_normal((n, n)) / np.sqrt(n)
    return lin.symmetrize(A @ A.T + floor * np.eye(n))

def random_update_instance(rng, max_n=4, max_m=3):
    """Random model and predicted belief: SPD prior and Q, random Phi and H,
       R = B B^T + 0.1 I. Returns (model, predicted belief)."""
    n = int(rng.integers(1, max_n + 1))
    m = int(rng.integers(1, max_m + 1))
    B = rng.standard_normal((m, m)) / np.sqrt(m)
    model = mdl.StateSpaceModel(n=n, m=m, l=n,
                                Phi=rng.standard_normal((n, n)) / np.sqrt(n),
                                Gamma=np.eye(n),
                                H=rng.standard_normal((m, n)) / np.sqrt(n),
                                Q=random_spd(rng, n),
                                R=lin.symmetrize(B @ B.T + 0.1 * np.eye(m)))
    prior = mdl.GaussianBelief(rng.standard_normal(n), random_spd(rng, n))
    return model, mdl.predict(prior, model)

def random_joint(rng, max_dim=4):
    N = int(rng.integers(1, max_dim + 1))
    M = int(rng.integers(1, max_dim + 1))
    full = random_spd(rng, N + M)
    return info.JointGaussian(sxx=full[:N, :N], syy=full[N:, N:], sxy=full[:N, N:])


###############################################################################
##                            PER-INSTANCE CHECKS                            ##
###############################################################################
# each returns the instance error, or None when the instance failed outright

def check_gain_equivalence(rng, cfg):
    model, predicted = random_update_instance(rng, cfg["max-state-dim"], cfg["max-measurement-dim"])
    obj = opt.MiObjective.for_model(predicted.cov, model)
    K_star = flt.kalman_gain(predicted.cov, model)
    try:
        trace = opt.maximize_mi(obj)
    except DidNotConverge:
        return None
    return float(np.linalg.norm(trace.final_gain - K_star) / max(np.linalg.norm(K_star), 1e-300))

def check_gradient_fidelity(rng, cfg):
    model, predicted = random_update_instance(rng, cfg["max-state-dim"], cfg["max-measurement-dim"])
    obj = opt.MiObjective.for_model(predicted.cov, model)
    K = flt.kalman_gain(predicted.cov, model) + 0.5 * rng.standard_normal((model.n, model.m))
    analytic = opt.mi_gradient(obj, K)
    numeric = opt.finite_difference_gradient(obj, K, cfg["fd-step"])
    return float(np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic))))

def check_concavity(rng, cfg):
    model, predicted = random_update_instance(rng, cfg["max-state-dim"], cfg["max-measurement-dim"])
    obj = opt.MiObjective.for_model(predicted.cov, model)
    try:
        trace = opt.maximize_mi(obj)
    except DidNotConverge:
        return None
    report = opt.concavity_check(obj, trace.final_gain, cfg["concavity-directions"],
                                 seed=int(rng.integers(2 ** 63)), step=cfg["curvature-step"])
    if not report.all_negative:
        return None
    return report.max_relative_error

def check_renyi_equivalence(rng, cfg):
    J = random_joint(rng, cfg["max-joint-block-dim"])
    shannon = info.mutual_information_joint(J)
    return max(abs(info.renyi_mutual_information(J, alpha) - shannon) for alpha in cfg["renyi-orders"])

def check_schur_determinant(rng, cfg):
    lhs, rhs1, rhs2 = lin.schur_det_check(random_joint(rng, cfg["max-joint-block-dim"]))
    return max(abs(lhs - rhs1), abs(lhs - rhs2), abs(rhs1 - rhs2))

def check_mi_form_consistency(rng, cfg):
    model, predicted = random_update_instance(rng, cfg["max-state-dim"], cfg["max-measurement-dim"])
    z = model.H @ predicted.mean + rng.standard_normal(model.m)
    record = flt.update_optimal(predicted, z, model)
    return abs(record.mi_nats - info.mutual_information_joint(info.induced_joint(predicted, model)))

def check_joseph_short_form(rng, cfg):
    model, predicted = random_update_instance(rng, cfg["max-state-dim"], cfg["max-measurement-dim"])
    K = flt.kalman_gain(predicted.cov, model)
    joseph = flt.joseph_cov(predicted.cov, K, model)
    short = flt.update_short_form(predicted.cov, K, model)
    return float(np.linalg.norm(joseph - short) / np.linalg.norm(predicted.cov))

CHECKS = { c.GAIN_EQUIVALENCE    : check_gain_equivalence,
           c.GRADIENT_FIDELITY   : check_gradient_fidelity,
           c.CONCAVITY           : check_concavity,
           c.RENYI_EQUIVALENCE   : check_renyi_equivalence,
           c.SCHUR_DETERMINANT   : check_schur_determinant,
           c.MI_FORM_CONSISTENCY : check_mi_form_consistency,
           c.JOSEPH_SHORT_FORM   : check_joseph_short_form,
         }


###############################################################################
##                                  SUITE                                    ##
###############################################################################
def instance_count(check_name, trials, cfg):
    if check_name == c.CONCAVITY:
        return min(trials, cfg["concavity-instances"])
    return trials

def run_check(check_name, trials, seed, tolerance, cfg, executor=None) -> CheckResult:
    check_index = c.CHECK_NAMES.index(check_name)
    count = instance_count(check_name, trials, cfg)
    func = CHECKS[check_name]

    def one(i):
        return func(np.random.default_rng([seed, check_index, i]), cfg)

    errors = list(executor.map(one, range(count))) if executor else [one(i) for i in range(count)]
    measured = [e for e in errors if e is not None]
    failures = len(errors) - len(measured)
    max_error = max(measured) if measured else 0.0
    passed = failures == 0 and max_error <= tolerance
    log = logger.info if passed else logger.warning
    log("check %-20s %s: %d instances, max error %.3e (tolerance %.1e), %d failures",
        check_name, "passed" if passed else "FAILED", count, max_error, tolerance, failures)
    return CheckResult(check_name=check_name, instances_run=count, max_error=max_error,
                       tolerance=tolerance, passed=passed, failures=failures)

def run_suite(trials, seed, tolerance_overrides=None, cfg=None, jobs=1) -> VerificationReport:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    cfg = cfg or verifyCfg
    tolerances = dict(cfg["tolerances"])
    for name, value in (tolerance_overrides or {}).items():
        if name not in c.CHECK_NAMES:
            raise ValueError(f"unknown check '{name}' in tolerance override")
        tolerances[name] = float(value)

    logger.info("verification suite: %d trials, seed %d, %d job(s)", trials, seed, jobs)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            suite = [run_check(name, trials, seed, tolerances[name], cfg, executor) for name in c.CHECK_NAMES]
    else:
        suite = [run_check(name, trials, seed, tolerances[name], cfg) for name in c.CHECK_NAMES]

    metadata = ReportMetadata(seed=seed,
                              build=f"infokalman {c.VERSION} (numpy {np.__version__}, scipy {scipy.__version__})",
                              timestamp=datetime.now(timezone.utc).isoformat(),
                              trials=trials)
    return VerificationReport(suite=suite, overall_passed=all(r.passed for r in suite), metadata=metadata)
