#!/usr/bin/env python
# -*- coding: UTF-8 -*-

# mod_filter.py -- module Filter. The measurement update of the Kalman filter:
#   gain       K = P H^T (H P H^T + R)^-1
#   correction x = x_pred + K (z - H x_pred)
#   covariance P = (I - K H) P_pred (I - K H)^T + K R K^T   (Joseph form, any K)
# and the per-step UpdateRecord carrying the information gained.
#
# This file is part of the "infokalman" Python library
# for deriving the Kalman filter gain from the mutual information
# between the predicted state and the measurement
#

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import scipy.linalg as la

import generic.mod_linops as lin
from generic.mod_errors import DimensionMismatch, NotPositiveDefinite
from mod_model import GaussianBelief, StateSpaceModel
import filter_calc.mod_information as info

GainMatrix = npt.NDArray[np.float64]    #n x m, finite


@dataclass(frozen=True)
class UpdateRecord:
    step: int
    prior: GaussianBelief
    measurement: np.ndarray
    innovation: np.ndarray
    gain: GainMatrix
    posterior: GaussianBelief
    mi_nats: float
    nis: float


################################# FUNCTIONS #############################
def check_gain(K, model: StateSpaceModel) -> GainMatrix:
    K = np.array(K, dtype=float, ndmin=2)
    if K.shape != (model.n, model.m):
        raise DimensionMismatch(f"gain shape {K.shape} does not match ({model.n}, {model.m})")
    if not np.all(np.isfinite(K)):
        raise ValueError("gain has non-finite entries")
    return K

def innovation_cov(prior_cov, model: StateSpaceModel):
    """S = H P H^T + R"""
    return lin.symmetrize(model.H @ prior_cov @ model.H.T + model.R)

def kalman_gain(prior_cov, model: StateSpaceModel) -> GainMatrix:
    """Solves K S = P H^T through the Cholesky factor of S"""
    P = np.asarray(prior_cov, dtype=float)
    S = innovation_cov(P, model)
    try:
        K = lin.solve_spd(S, model.H @ P).T
    except NotPositiveDefinite as err:
        raise NotPositiveDefinite(f"innovation covariance not positive definite: {err}") from err
    return K

def joseph_cov(prior_cov, K, model: StateSpaceModel):
    I_KH = np.eye(model.n) - K @ model.H
    return lin.symmetrize(I_KH @ prior_cov @ I_KH.T + K @ model.R @ K.T)

def update_short_form(prior_cov, K, model: StateSpaceModel):
    """(I - K H) P; equals the Joseph form only at the optimal gain"""
    return lin.symmetrize((np.eye(model.n) - K @ model.H) @ prior_cov)

def update_joseph(prior: GaussianBelief, z, K, model: StateSpaceModel, step=0) -> UpdateRecord:
    """Measurement update for an arbitrary gain K"""
    K = check_gain(K, model)
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size != model.m:
        raise DimensionMismatch(f"measurement has {z.size} entries, model expects {model.m}")
    innovation = z - model.H @ prior.mean
    cov = joseph_cov(prior.cov, K, model)
    if not lin.is_spd(cov):
        raise NotPositiveDefinite("posterior covariance is not positive definite")
    posterior = GaussianBelief(prior.mean + K @ innovation, cov)
    S = innovation_cov(prior.cov, model)
    nis = float(innovation @ lin.solve_spd(S, innovation))
    return UpdateRecord(step=step,
                        prior=prior,
                        measurement=z,
                        innovation=innovation,
                        gain=K,
                        posterior=posterior,
                        mi_nats=info.update_mi(prior.cov, posterior.cov),
                        nis=nis)

def update_optimal(prior: GaussianBelief, z, model: StateSpaceModel, step=0) -> UpdateRecord:
    return update_joseph(prior, z, kalman_gain(prior.cov, model), model, step=step)

def steady_state_covariance(model: StateSpaceModel):
    """Steady-state (prior, posterior) covariances from the discrete Riccati equation"""
    P = la.solve_discrete_are(model.Phi.T, model.H.T, model.process_noise_cov(), model.R)
    P = lin.symmetrize(P)
    K = kalman_gain(P, model)
    return P, joseph_cov(P, K, model)
