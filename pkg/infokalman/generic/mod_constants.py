#!/usr/bin/env python
# -*- coding: UTF-8 -*-

# mod_constants.py -- module Constants. Numeric defaults, check names and exit codes
# shared by every other module.
#
# This file is part of the "infokalman" Python library
# for deriving the Kalman filter gain from the mutual information
# between the predicted state and the measurement
#

VERSION = "1.0.0"

#declare constants related to matrix numerics
SYMMETRY_TOLERANCE = 1e-12     #relative asymmetry tolerated before symmetrizing
PIVOT_FLOOR = 1e-300           #a factorization pivot at or below this counts as failure
PSD_TOLERANCE = 1e-12          #pivots of a PSD matrix may dip this far below zero

#declare constants related to Renyi orders
RENYI_SHANNON_GAP = 1e-9       #|alpha - 1| must exceed this

#declare constants related to the gain optimizer
MAX_ITERATIONS = 10000
GRADIENT_TOLERANCE = 1e-10
INITIAL_STEP = 1.0
BACKTRACK_FACTOR = 0.5
ARMIJO_CONSTANT = 1e-4
MAX_BACKTRACKS = 60
STEP_CONSTANT = "constant"
STEP_BB = "bb"

#declare constants related to the concavity check
CURVATURE_STEP = 1e-4
STATIONARY_TOLERANCE = 1e-8

#declare constants related to the finite difference check
FD_STEP = 1e-6

#declare constants related to the random generator
RNG_NAME = "numpy.PCG64+SeedSequence.spawn(3)+BoxMuller"
SUBSTREAM_INITIAL = 0
SUBSTREAM_PROCESS = 1
SUBSTREAM_MEASUREMENT = 2

#declare constants related to verification checks
GAIN_EQUIVALENCE = "gain_equivalence"
GRADIENT_FIDELITY = "gradient_fidelity"
CONCAVITY = "concavity"
RENYI_EQUIVALENCE = "renyi_equivalence"
SCHUR_DETERMINANT = "schur_determinant"
MI_FORM_CONSISTENCY = "mi_form_consistency"
JOSEPH_SHORT_FORM = "joseph_short_form"
CHECK_NAMES = [ GAIN_EQUIVALENCE, GRADIENT_FIDELITY, CONCAVITY,
                RENYI_EQUIVALENCE, SCHUR_DETERMINANT, MI_FORM_CONSISTENCY,
                JOSEPH_SHORT_FORM ]

#declare constants related to process exit codes
EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3
