#!/usr/bin/env python
# -*- coding: UTF-8 -*-

# mod_errors.py -- module Errors. Exception types raised by the library.
# Only mod_main and api_main turn them into exit codes / responses.
#
# This file is part of the "infokalman" Python library
# for deriving the Kalman filter gain from the mutual information
# between the predicted state and the measurement
#

import numpy as np


class NotPositiveDefinite(np.linalg.LinAlgError):
    """A matrix that must be a valid covariance failed its factorization"""


class NotSymmetric(ValueError):
    """Asymmetry larger than round-off was handed to a symmetric constructor"""


class DimensionMismatch(ValueError):
    pass


class NotStationary(ValueError):
    """The gain handed to the concavity check is not a stationary point"""


class DidNotConverge(RuntimeError):
    """Gain optimizer ran out of iterations. The partial trace rides along."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ConfigError(ValueError):
    """Scenario or trajectory file could not be parsed or validated"""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)
