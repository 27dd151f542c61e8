#!/usr/bin/env python
# -*- coding: UTF-8 -*-

# mod_information.py -- module Information. Information functionals of Gaussians:
#   differential (Shannon) entropy and Renyi entropy of order alpha
#   mutual information of a joint Gaussian (joint form, conditional form)
#   mutual information gained by a measurement update (prior / posterior ratio)
#   Renyi mutual information, built from three Renyi entropies
# All values are in nats.
#
# This file is part of the "infokalman" Python library
# for deriving the Kalman filter gain from the mutual information
# between the predicted state and the measurement
#

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

import generic.mod_constants as c
import generic.mod_linops as lin
from generic.mod_errors import DimensionMismatch, NotPositiveDefinite

LN_2PI = np.log(2.0 * np.pi)
LN_2PIE = np.log(2.0 * np.pi * np.e)


@dataclass(frozen=True)
class JointGaussian:
    """Jointly Gaussian pair (X, Y) with covariance [[sxx, sxy], [sxy^T, syy]]"""
    sxx: np.ndarray
    syy: np.ndarray
    sxy: np.ndarray
    mean_x: Optional[np.ndarray] = None
    mean_y: Optional[np.ndarray] = None

    def __post_init__(self):
        sxx = lin.sym_matrix(self.sxx)
        syy = lin.sym_matrix(self.syy)
        sxy = np.array(self.sxy, dtype=float, ndmin=2)
        sxy.setflags(write=False)
        N, M = sxx.shape[0], syy.shape[0]
        mean_x = np.zeros(N) if self.mean_x is None else np.asarray(self.mean_x, dtype=float).reshape(-1)
        mean_y = np.zeros(M) if self.mean_y is None else np.asarray(self.mean_y, dtype=float).reshape(-1)
        if mean_x.size != N or mean_y.size != M:
            raise DimensionMismatch("joint Gaussian means do not match the covariance blocks")
        full = lin.assemble_block(sxx, syy, sxy)
        if not lin.is_spd(full):
            raise NotPositiveDefinite("joint covariance is not positive definite")
        object.__setattr__(self, "sxx", sxx)
        object.__setattr__(self, "syy", syy)
        object.__setattr__(self, "sxy", sxy)
        object.__setattr__(self, "mean_x", mean_x)
        object.__setattr__(self, "mean_y", mean_y)

    @property
    def N(self):
        return self.sxx.shape[0]

    @property
    def M(self):
        return self.syy.shape[0]

    def full_cov(self):
        return lin.assemble_block(self.sxx, self.syy, self.sxy)


@dataclass(frozen=True)
class RenyiOrder:
    alpha: float

    def __post_init__(self):
        alpha = float(self.alpha)
        if not np.isfinite(alpha) or alpha <= 0.0:
            raise ValueError(f"Renyi order must be positive, got {alpha}")
        if abs(alpha - 1.0) <= c.RENYI_SHANNON_GAP:
            raise ValueError("Renyi order too close to 1; use the Shannon entropy instead")
        object.__setattr__(self, "alpha", alpha)


Order = Union[RenyiOrder, float]

def _order(order: Order) -> RenyiOrder:
    return order if isinstance(order, RenyiOrder) else RenyiOrder(order)


################################# ENTROPIES #############################
def entropy_gaussian(cov) -> float:
    """H(X) = 1/2 ln((2 pi e)^N det S)"""
    N = np.asarray(cov).shape[0]
    return 0.5 * (N * LN_2PIE + lin.log_det_spd(cov))

def renyi_entropy(cov, order: Order) -> float:
    """H_a(X) = 1/2 ln((2 pi)^N a^(N/(a-1)) det S)"""
    alpha = _order(order).alpha
    N = np.asarray(cov).shape[0]
    return 0.5 * (N * LN_2PI + (N / (alpha - 1.0)) * np.log(alpha) + lin.log_det_spd(cov))

def conditional_entropy_gaussian(J: JointGaussian) -> float:
    """H(X|Y): entropy of the Schur complement Sxx - Sxy Syy^-1 Syx"""
    schur_x = lin.symmetrize(J.sxx - J.sxy @ lin.solve_spd(J.syy, J.sxy.T))
    return entropy_gaussian(schur_x)


############################ MUTUAL INFORMATION ###########################
def mutual_information_joint(J: JointGaussian) -> float:
    """I(X,Y) = -1/2 ln(det S / (det Sxx det Syy))"""
    return 0.5 * (lin.log_det_spd(J.sxx) + lin.log_det_spd(J.syy) - lin.log_det_spd(J.full_cov()))

def mutual_information_conditional(J: JointGaussian) -> float:
    """I(X,Y) = H(X) - H(X|Y)"""
    return entropy_gaussian(J.sxx) - conditional_entropy_gaussian(J)

def update_mi(prior_cov, posterior_cov) -> float:
    """Information gained by a measurement update, 1/2 ln(det S_prior / det S_post)"""
    if np.shape(prior_cov) != np.shape(posterior_cov):
        raise DimensionMismatch(f"prior {np.shape(prior_cov)} and posterior "
                                f"{np.shape(posterior_cov)} covariances differ in shape")
    return 0.5 * (lin.log_det_spd(prior_cov) - lin.log_det_spd(posterior_cov))

def renyi_update_mi(prior_cov, posterior_cov, order: Order) -> float:
    """H_a(prior) - H_a(posterior); the alpha terms cancel for equal dimension"""
    if np.shape(prior_cov) != np.shape(posterior_cov):
        raise DimensionMismatch(f"prior {np.shape(prior_cov)} and posterior "
                                f"{np.shape(posterior_cov)} covariances differ in shape")
    return renyi_entropy(prior_cov, order) - renyi_entropy(posterior_cov, order)

def renyi_mutual_information(J: JointGaussian, order: Order) -> float:
    """H_a(X) + H_a(Y) - H_a(X,Y), evaluated term by term"""
    order = _order(order)
    return (renyi_entropy(J.sxx, order) + renyi_entropy(J.syy, order)
            - renyi_entropy(J.full_cov(), order))

def induced_joint(prior, model) -> JointGaussian:
    """Joint of (X_{k|k-1}, Z_k) for a predicted belief:
       Sxx = P, Syy = H P H^T + R, Sxy = P H^T"""
    P, H = prior.cov, model.H
    return JointGaussian(sxx=P, syy=lin.symmetrize(H @ P @ H.T + model.R), sxy=P @ H.T,
                         mean_x=prior.mean, mean_y=H @ prior.mean)

def nats_to_bits(nats):
    return nats / np.log(2.0)
