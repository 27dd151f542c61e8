#!/usr/bin/env python
# -*- coding: UTF-8 -*-

# mod_gainopt.py -- module Gain optimizer. Recovers the Kalman gain numerically by
# maximizing the information a measurement update delivers,
#   I(K) = 1/2 ln(det P / det[(I - K H) P (I - K H)^T + K R K^T])
# over the gain matrix K. Provides
#   the objective and its exact gradient  -S_k(K)^-1 (K S - P H^T)
#   finite-difference gradients for checking it
#   gradient ascent with Armijo backtracking
#   directional second differences at the maximizer (concavity check)
#
# The bracket of the textbook derivative is 2 (K S - P H^T); the 1/2 in front of
# the log cancels it, so the gradient here is half of that bracket. Same zero set.
#
# This file is part of the "infokalman" Python library
# for deriving the Kalman filter gain from the mutual information
# between the predicted state and the measurement
#

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg as la

import generic.mod_constants as c
import generic.mod_linops as lin
from generic.mod_errors import DidNotConverge, DimensionMismatch, NotPositiveDefinite, NotStationary
from mod_scenario import OptimizerSettings
import filter_calc.mod_information as info
import log_utils

logger = log_utils.getLogger(__name__)


@dataclass(frozen=True)
class MiObjective:
    """I(K) for one measurement update. S caches H P H^T + R.
       With a Renyi order the objective is the Renyi update information."""
    prior_cov: np.ndarray
    H: np.ndarray
    R: np.ndarray
    S: Optional[np.ndarray] = None
    order: Optional[info.RenyiOrder] = None

    def __post_init__(self):
        P = lin.sym_matrix(self.prior_cov)
        H = np.array(self.H, dtype=float, ndmin=2)
        R = lin.sym_matrix(self.R)
        if H.shape[1] != P.shape[0] or R.shape[0] != H.shape[0]:
            raise DimensionMismatch(f"H {H.shape}, prior {P.shape} and R {R.shape} do not fit together")
        S = lin.symmetrize(H @ P @ H.T + R)
        if self.S is not None:
            scale = max(1.0, float(np.max(np.abs(S))))
            if np.max(np.abs(np.asarray(self.S) - S)) > 1e-12 * scale:
                raise ValueError("cached innovation covariance S does not match H P H^T + R")
        if not lin.is_spd(S):
            raise NotPositiveDefinite("innovation covariance S is not positive definite")
        order = self.order
        if order is not None and not isinstance(order, info.RenyiOrder):
            order = info.RenyiOrder(order)
        object.__setattr__(self, "prior_cov", P)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "order", order)

    @classmethod
    def for_model(cls, prior_cov, model, order=None):
        return cls(prior_cov=prior_cov, H=model.H, R=model.R, order=order)

    @property
    def shape(self):
        return (self.H.shape[1], self.H.shape[0])

    def closed_form_gain(self):
        """P H^T S^-1"""
        return lin.solve_spd(self.S, self.H @ self.prior_cov).T


@dataclass
class OptimizationTrace:
    iterations: int
    final_gain: np.ndarray
    final_mi_nats: float
    final_gradient_norm: float
    converged: bool
    per_iteration: List[Tuple[float, float]] = field(default_factory=list)


@dataclass(frozen=True)
class ConcavityReport:
    curvatures: List[float]
    analytic: List[float]
    step: float

    @property
    def all_negative(self):
        return all(value < 0.0 for value in self.curvatures)

    @property
    def max_relative_error(self):
        errors = [abs(fd - an) / max(1.0, abs(an)) for fd, an in zip(self.curvatures, self.analytic)]
        return max(errors) if errors else 0.0


################################# OBJECTIVE #############################
def _check_gain(obj: MiObjective, K):
    K = np.array(K, dtype=float, ndmin=2)
    if K.shape != obj.shape:
        raise DimensionMismatch(f"gain shape {K.shape} does not match {obj.shape}")
    return K

def posterior_cov(obj: MiObjective, K):
    """(I - K H) P (I - K H)^T + K R K^T"""
    I_KH = np.eye(obj.prior_cov.shape[0]) - K @ obj.H
    return lin.symmetrize(I_KH @ obj.prior_cov @ I_KH.T + K @ obj.R @ K.T)

def mi_of_gain(obj: MiObjective, K) -> float:
    K = _check_gain(obj, K)
    post = posterior_cov(obj, K)
    if obj.order is not None:
        return info.renyi_update_mi(obj.prior_cov, post, obj.order)
    return info.update_mi(obj.prior_cov, post)

def _residual(obj: MiObjective, K):
    #K S - P H^T; zero exactly at the optimal gain
    return K @ obj.S - obj.prior_cov @ obj.H.T

def mi_gradient(obj: MiObjective, K) -> np.ndarray:
    """dI/dK = -S_k(K)^-1 (K S - P H^T)"""
    K = _check_gain(obj, K)
    return -lin.solve_spd(posterior_cov(obj, K), _residual(obj, K))

def mi_increment(obj: MiObjective, K, D, step) -> float:
    """I(K + step D) - I(K) computed from the covariance difference
         dS = step (D C^T + C D^T) + step^2 D S D^T,  C = K S - P H^T
       as -1/2 sum log1p(eig(L^-1 dS L^-T)). Used by the Armijo test only, where the
       increment falls far below the round-off of I itself. -inf if K + step D is infeasible."""
    K = _check_gain(obj, K)
    D = _check_gain(obj, D)
    C = _residual(obj, K)
    dS = step * (D @ C.T + C @ D.T) + step * step * (D @ obj.S @ D.T)
    L = lin.cholesky(posterior_cov(obj, K))
    E = la.solve_triangular(L, dS, lower=True)
    E = la.solve_triangular(L, E.T, lower=True)
    w = np.linalg.eigvalsh(0.5 * (E + E.T))
    if np.any(w <= -1.0):
        return -np.inf
    return float(-0.5 * np.sum(np.log1p(w)))

def finite_difference_gradient(obj: MiObjective, K, step=c.FD_STEP) -> np.ndarray:
    """Central differences of mi_of_gain, one gain entry at a time"""
    K = _check_gain(obj, K)
    grad = np.zeros_like(K)
    for idx in np.ndindex(*K.shape):
        E = np.zeros_like(K)
        E[idx] = 1.0
        grad[idx] = (mi_of_gain(obj, K + step * E) - mi_of_gain(obj, K - step * E)) / (2.0 * step)
    return grad


################################# OPTIMIZER #############################
def _bb_step(s, y):
    """Barzilai-Borwein length <s,s>/|<s,y>|; None unless the curvature is negative"""
    sy = float(np.sum(s * y))
    if sy >= 0.0:
        return None
    step = float(np.sum(s * s)) / -sy
    if not np.isfinite(step) or step <= 0.0:
        return None
    return step

def maximize_mi(obj: MiObjective, init=None, settings: Optional[OptimizerSettings] = None) -> OptimizationTrace:
    """Gradient ascent on I(K) with Armijo backtracking.
       per_iteration holds the start point plus one entry per accepted step;
       its MI values accumulate the accepted increments, so they never decrease."""
    settings = settings or OptimizerSettings()
    K = np.zeros(obj.shape) if init is None else _check_gain(obj, init).copy()
    G = mi_gradient(obj, K)
    gnorm = float(np.linalg.norm(G))
    mi = mi_of_gain(obj, K)
    history = [(mi, gnorm)]
    trial = settings.initial_step
    iterations = 0
    stalled = False

    while gnorm > settings.gradient_tolerance and iterations < settings.max_iterations:
        step = trial
        increment = -np.inf
        for _ in range(c.MAX_BACKTRACKS):
            increment = mi_increment(obj, K, G, step)
            if increment >= settings.armijo_constant * step * gnorm ** 2:
                break
            step *= settings.backtrack_factor
        else:
            stalled = True
            break

        K_new = K + step * G
        G_new = mi_gradient(obj, K_new)
        trial = settings.initial_step
        if settings.step_rule == c.STEP_BB:
            trial = _bb_step(K_new - K, G_new - G) or settings.initial_step
        K, G = K_new, G_new
        gnorm = float(np.linalg.norm(G))
        mi += increment
        iterations += 1
        history.append((mi, gnorm))
        logger.debug("iteration %d: step %.3e, I = %.12f nats, |grad| = %.3e",
                     iterations, step, mi, gnorm)

    converged = gnorm <= settings.gradient_tolerance
    trace = OptimizationTrace(iterations=iterations,
                              final_gain=K,
                              final_mi_nats=mi_of_gain(obj, K),
                              final_gradient_norm=gnorm,
                              converged=converged,
                              per_iteration=history)
    if not converged:
        reason = "line search stalled" if stalled else "iterations exhausted"
        logger.warning("gain optimizer did not converge (%s) after %d iterations, |grad| = %.3e",
                       reason, iterations, gnorm)
        raise DidNotConverge(f"gain optimizer did not converge: {reason}, |grad| = {gnorm:.3e}", trace)
    logger.debug("gain optimizer converged in %d iterations, I = %.12f nats", iterations, trace.final_mi_nats)
    return trace


################################# CONCAVITY #############################
def curvature_analytic(obj: MiObjective, at, direction) -> float:
    """d^2/dt^2 I(K + t D) at a stationary K: -tr(S_k^-1 D S D^T)"""
    K = _check_gain(obj, at)
    D = _check_gain(obj, direction)
    return float(-np.trace(lin.solve_spd(posterior_cov(obj, K), D @ obj.S @ D.T)))

def concavity_check(obj: MiObjective, at, directions, seed, step=c.CURVATURE_STEP,
                    tolerance=c.STATIONARY_TOLERANCE) -> ConcavityReport:
    """Second central differences of I along seeded random unit-norm gain directions"""
    K = _check_gain(obj, at)
    gnorm = float(np.linalg.norm(mi_gradient(obj, K)))
    if gnorm > tolerance:
        raise NotStationary(f"gradient norm {gnorm:.3e} exceeds {tolerance:g}; not a stationary gain")
    rng = np.random.default_rng(seed)
    center = mi_of_gain(obj, K)
    curvatures, analytic = [], []
    for _ in range(int(directions)):
        D = rng.standard_normal(K.shape)
        D /= np.linalg.norm(D)
        second = (mi_of_gain(obj, K + step * D) + mi_of_gain(obj, K - step * D) - 2.0 * center) / step ** 2
        curvatures.append(float(second))
        analytic.append(curvature_analytic(obj, K, D))
    return ConcavityReport(curvatures=curvatures, analytic=analytic, step=step)
