#!/usr/bin/env python
# -*- coding: UTF-8 -*-

# mod_linops.py -- module Linear operations. Numerically stable primitives over
# dense symmetric matrices used by every covariance computation:
#   symmetric construction, SPD / PSD tests,
#   log-determinants by Cholesky pivots, SPD solves,
#   covariance square roots, block (Schur) determinant identity
#
# This file is part of the "infokalman" Python library
# for deriving the Kalman filter gain from the mutual information
# between the predicted state and the measurement
#

import numpy as np
import numpy.typing as npt
import scipy.linalg as la

import generic.mod_constants as c
from generic.mod_errors import NotPositiveDefinite, NotSymmetric, DimensionMismatch

SymMatrix = npt.NDArray[np.float64]     #symmetric after sym_matrix(); read-only

###############################################################################
##                               CONSTRUCTION                                ##
###############################################################################
def sym_matrix(entries) -> SymMatrix:
    """Builds a read-only symmetric matrix M <- (M + M^T)/2.
       Asymmetry above round-off (relative 1e-12) is rejected, not hidden."""
    M = np.array(entries, dtype=float, ndmin=2)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M)))) if np.all(np.isfinite(M)) else 1.0
    if np.max(np.abs(M - M.T)) > c.SYMMETRY_TOLERANCE * scale:
        raise NotSymmetric(f"matrix asymmetric beyond {c.SYMMETRY_TOLERANCE:g} (relative)")
    M = 0.5 * (M + M.T)
    M.setflags(write=False)
    return M

def symmetrize(M) -> SymMatrix:
    """Symmetrizes the result of covariance arithmetic (no asymmetry check)"""
    M = np.asarray(M, dtype=float)
    M = 0.5 * (M + M.T)
    M.setflags(write=False)
    return M

###############################################################################
##                              FACTORIZATIONS                               ##
###############################################################################
def cholesky(M) -> np.ndarray:
    """Lower Cholesky factor of an SPD matrix. Pivots L_ii^2 must exceed 1e-300."""
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as err:
        raise NotPositiveDefinite(f"Cholesky factorization failed: {err}") from err
    pivots = np.diag(L) ** 2
    if np.any(pivots <= c.PIVOT_FLOOR):
        raise NotPositiveDefinite(f"Cholesky pivot {pivots.min():.3e} at or below {c.PIVOT_FLOOR:g}")
    return L

def is_spd(M) -> bool:
    try:
        cholesky(M)
    except (NotPositiveDefinite, ValueError):
        return False
    return True

def is_psd(M, tol=c.PSD_TOLERANCE) -> bool:
    """Semidefinite test: smallest eigenvalue >= -tol (relative to the entry scale)"""
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        return False
    scale = max(1.0, float(np.max(np.abs(M))))
    return bool(np.linalg.eigvalsh(0.5 * (M + M.T)).min() >= -tol * scale)

def log_det_spd(M) -> float:
    """ln det M as the sum of log Cholesky pivots. Never forms det M."""
    L = cholesky(M)
    return float(2.0 * np.sum(np.log(np.diag(L))))

def solve_spd(M, B) -> np.ndarray:
    """X with M X = B, through the Cholesky factor of M (no explicit inverse)"""
    L = cholesky(M)
    return la.cho_solve((L, True), np.asarray(B, dtype=float))

def inv_spd(M) -> SymMatrix:
    return symmetrize(solve_spd(M, np.eye(np.asarray(M).shape[0])))

def psd_sqrt(M, tol=c.PSD_TOLERANCE) -> np.ndarray:
    """Returns A with A A^T = M for a PSD matrix.
       Cholesky when M is SPD, otherwise a clipped eigen-factorization."""
    M = np.asarray(M, dtype=float)
    if not np.any(M):
        return np.zeros_like(M)
    try:
        return cholesky(M)
    except NotPositiveDefinite:
        pass
    if not is_psd(M, tol):
        raise NotPositiveDefinite("covariance is not positive semidefinite")
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return V * np.sqrt(np.clip(w, 0.0, None))

###############################################################################
##                           BLOCK DETERMINANTS                              ##
###############################################################################
def assemble_block(sxx, syy, sxy) -> SymMatrix:
    """[[sxx, sxy], [sxy^T, syy]]"""
    sxx, syy, sxy = (np.asarray(a, dtype=float) for a in (sxx, syy, sxy))
    if sxy.shape != (sxx.shape[0], syy.shape[0]):
        raise DimensionMismatch(f"cross covariance shape {sxy.shape} does not match "
                                f"({sxx.shape[0]}, {syy.shape[0]})")
    return symmetrize(np.block([[sxx, sxy], [sxy.T, syy]]))

def schur_det_check(J):
    """Log-determinant of a joint covariance three ways:
         ln det S
         ln det Sxx + ln det(Syy - Syx Sxx^-1 Sxy)
         ln det Syy + ln det(Sxx - Sxy Syy^-1 Syx)
       J is anything with sxx, syy, sxy (a JointGaussian)."""
    sxx = np.asarray(J.sxx, dtype=float)
    syy = np.asarray(J.syy, dtype=float)
    sxy = np.asarray(J.sxy, dtype=float)
    lhs = log_det_spd(assemble_block(sxx, syy, sxy))
    schur_y = symmetrize(syy - sxy.T @ solve_spd(sxx, sxy))
    schur_x = symmetrize(sxx - sxy @ solve_spd(syy, sxy.T))
    rhs1 = log_det_spd(sxx) + log_det_spd(schur_y)
    rhs2 = log_det_spd(syy) + log_det_spd(schur_x)
    return lhs, rhs1, rhs2
