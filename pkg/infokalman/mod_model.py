#!/usr/bin/env python
# -*- coding: UTF-8 -*-

# mod_model.py -- module Model. The discrete-time linear Gaussian state-space model
#   X_k = Phi X_{k-1} + Gamma W_{k-1},   W ~ N(0, Q)
#   Z_k = H X_k + V_k,                   V ~ N(0, R),  E[W V^T] = 0
# its validation, the Gaussian belief over the state and the time update.
#
# This file is part of the "infokalman" Python library
# for deriving the Kalman filter gain from the mutual information
# between the predicted state and the measurement
#

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

import generic.mod_linops as lin
from generic.mod_errors import NotPositiveDefinite, NotSymmetric, DimensionMismatch
import log_utils

logger = log_utils.getLogger(__name__)

#measurement noise requirement passed to validate()
NOISE_PD = "pd"
NOISE_PSD = "psd"


def _as_matrix(a):
    M = np.array(a, dtype=float, ndmin=2)
    M.setflags(write=False)
    return M

def _as_vector(v):
    x = np.array(v, dtype=float).reshape(-1)
    x.setflags(write=False)
    return x

def _as_noise_cov(a):
    """Symmetrizes a noise covariance when it is square and symmetric to round-off.
       Anything else is kept raw so validate() can name the problem."""
    M = _as_matrix(a)
    if M.shape[0] == M.shape[1]:
        try:
            return lin.sym_matrix(M)
        except (NotSymmetric, DimensionMismatch):
            pass
    return M


@dataclass(frozen=True)
class StateSpaceModel:
    n: int
    m: int
    l: int
    Phi: np.ndarray
    Gamma: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Phi", _as_matrix(self.Phi))
        object.__setattr__(self, "Gamma", _as_matrix(self.Gamma))
        object.__setattr__(self, "H", _as_matrix(self.H))
        object.__setattr__(self, "Q", _as_noise_cov(self.Q))
        object.__setattr__(self, "R", _as_noise_cov(self.R))

    @classmethod
    def from_matrices(cls, Phi, Gamma, H, Q, R):
        """Infers (n, m, l) from Phi, H and Q"""
        Phi, H, Q = _as_matrix(Phi), _as_matrix(H), _as_matrix(Q)
        return cls(n=Phi.shape[0], m=H.shape[0], l=Q.shape[0],
                   Phi=Phi, Gamma=Gamma, H=H, Q=Q, R=R)

    def with_measurement_noise(self, R):
        return StateSpaceModel(self.n, self.m, self.l, self.Phi, self.Gamma, self.H, self.Q, R)

    def process_noise_cov(self):
        """Gamma Q Gamma^T, the noise injected into the state per step"""
        return lin.symmetrize(self.Gamma @ self.Q @ self.Gamma.T)


@dataclass(frozen=True)
class Violation:
    field: str
    message: str

    def __str__(self):
        return self.message


@dataclass(frozen=True)
class ValidationResult:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self):
        return len(self.violations) == 0

    def messages(self):
        return [str(v) for v in self.violations]


@dataclass(frozen=True)
class GaussianBelief:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = _as_vector(self.mean)
        cov = lin.sym_matrix(self.cov)
        if not np.all(np.isfinite(mean)):
            raise ValueError("belief mean has non-finite entries")
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch(f"belief covariance shape {cov.shape} does not match mean length {mean.size}")
        if not lin.is_spd(cov):
            raise NotPositiveDefinite("belief covariance is not positive definite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n(self):
        return self.mean.size


################################# FUNCTIONS #############################
def _check_shape(violations, name, M, expected):
    rows, cols = expected
    if M.ndim != 2:
        violations.append(Violation(name, f"{name} is not a matrix"))
        return False
    good = True
    if M.shape[0] != rows[1]:
        violations.append(Violation(name, f"{name} row count ≠ {rows[0]}"))
        good = False
    if M.shape[1] != cols[1]:
        violations.append(Violation(name, f"{name} column count ≠ {cols[0]}"))
        good = False
    return good

def validate(model: StateSpaceModel, measurement_noise=NOISE_PD) -> ValidationResult:
    """Lists every violation of the model invariants, each naming its field.
       measurement_noise=NOISE_PSD relaxes R to semidefinite (simulation only)."""
    violations = []
    for name in ("n", "m", "l"):
        value = getattr(model, name)
        if int(value) != value or value < 1:
            violations.append(Violation(name, f"{name} must be a positive integer"))
    if violations:
        return ValidationResult(violations)
    n, m, l = model.n, model.m, model.l

    shapes = {"Phi": (("n", n), ("n", n)),
              "Gamma": (("n", n), ("l", l)),
              "H": (("m", m), ("n", n)),
              "Q": (("l", l), ("l", l)),
              "R": (("m", m), ("m", m))}
    shaped = {name: _check_shape(violations, name, getattr(model, name), dims)
              for name, dims in shapes.items()}

    for name in shapes:
        if not np.all(np.isfinite(getattr(model, name))):
            violations.append(Violation(name, f"{name} has non-finite entries"))
            shaped[name] = False

    for name in ("Q", "R"):
        M = getattr(model, name)
        if shaped[name] and np.max(np.abs(M - M.T)) > 0.0:
            violations.append(Violation(name, f"{name} not symmetric"))
            shaped[name] = False

    if shaped["Q"] and not lin.is_psd(model.Q):
        violations.append(Violation("Q", "Q not positive semidefinite"))
    if shaped["R"]:
        if measurement_noise == NOISE_PD and not lin.is_spd(model.R):
            violations.append(Violation("R", "R not positive definite"))
        elif measurement_noise == NOISE_PSD and not lin.is_psd(model.R):
            violations.append(Violation("R", "R not positive semidefinite"))

    if violations:
        logger.debug("model validation found %d violation(s): %s", len(violations),
                     "; ".join(str(v) for v in violations))
    return ValidationResult(violations)

def predict(prior: GaussianBelief, model: StateSpaceModel) -> GaussianBelief:
    """Time update: x <- Phi x,  P <- Phi P Phi^T + Gamma Q Gamma^T"""
    if prior.n != model.n:
        raise DimensionMismatch(f"belief has {prior.n} states, model has {model.n}")
    mean = model.Phi @ prior.mean
    cov = lin.symmetrize(model.Phi @ prior.cov @ model.Phi.T + model.Gamma @ model.Q @ model.Gamma.T)
    if not lin.is_spd(cov):
        raise NotPositiveDefinite("predicted covariance is not positive definite "
                                  "(singular Phi without process noise?)")
    return GaussianBelief(mean, cov)
