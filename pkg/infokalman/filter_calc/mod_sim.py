#!/usr/bin/env python
# -*- coding: UTF-8 -*-

# mod_sim.py -- module Simulation. Seeded Monte-Carlo ground truth for the
# state-space model and the filter run over it:
#   generate()   truth states and measurements, X_k = Phi X_{k-1} + Gamma W, Z_k = H X_k + V
#   run_filter() predict + optimal update per step, information gained, NEES / NIS
#
# Gaussian variates come from the Box-Muller transform over the uniform output of
# numpy's PCG64; SeedSequence.spawn gives independent substreams for the initial
# state, the process noise and the measurement noise.
#
# This file is part of the "infokalman" Python library
# for deriving the Kalman filter gain from the mutual information
# between the predicted state and the measurement
#

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Tuple

import numpy as np

import generic.mod_constants as c
import generic.mod_linops as lin
from generic.mod_errors import DimensionMismatch
import mod_model as mdl
from mod_model import GaussianBelief, StateSpaceModel
import filter_calc.mod_filter as flt
import filter_calc.mod_information as info
import log_utils

logger = log_utils.getLogger(__name__)


@dataclass(frozen=True)
class Scenario:
    model: StateSpaceModel
    initial_truth_mean: np.ndarray
    initial_truth_cov: np.ndarray
    initial_belief: GaussianBelief
    steps: int
    seed: int = 0

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class Trajectory:
    truths: np.ndarray          #(steps + 1) x n, row 0 is the initial state
    measurements: np.ndarray    #steps x m, row k-1 is Z_k

    @property
    def steps(self):
        return self.measurements.shape[0]


@dataclass
class FilterSummary:
    steps: int
    cumulative_mi_nats: float
    cumulative_mi_bits: float
    mean_nees: float
    mean_nis: float
    nees: List[float] = field(default_factory=list)
    cumulative_mi: List[float] = field(default_factory=list)
    rng: str = c.RNG_NAME


################################# RANDOM #############################
def substreams(seed):
    """Independent generators for (initial state, process noise, measurement noise)"""
    children = np.random.SeedSequence(int(seed)).spawn(3)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]

def box_muller(rng, count):
    """count standard normal variates from pairs of uniforms"""
    pairs = (count + 1) // 2
    u1 = 1.0 - rng.random(pairs)    #(0, 1], keeps the log finite
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    normals = np.empty(2 * pairs)
    normals[0::2] = radius * np.cos(angle)
    normals[1::2] = radius * np.sin(angle)
    return normals[:count]


################################# FUNCTIONS #############################
def generate(scenario: Scenario) -> Trajectory:
    """Simulates truths X_0..X_steps and measurements Z_1..Z_steps.
       R may be zero here (no inversion happens in the generator)."""
    model = scenario.model
    check = mdl.validate(model, measurement_noise=mdl.NOISE_PSD)
    if not check.ok:
        raise ValueError("invalid scenario model: " + "; ".join(check.messages()))
    if scenario.steps < 1:
        raise ValueError("scenario needs at least one step")
    n, m, l, steps = model.n, model.m, model.l, int(scenario.steps)

    truth_mean = np.asarray(scenario.initial_truth_mean, dtype=float).reshape(-1)
    truth_cov = np.array(scenario.initial_truth_cov, dtype=float, ndmin=2)
    if truth_mean.size != n or truth_cov.shape != (n, n):
        raise DimensionMismatch(f"initial truth does not have {n} states")
    if not (np.all(np.isfinite(truth_mean)) and np.all(np.isfinite(truth_cov))):
        raise ValueError("initial truth has non-finite entries")
    truth_cov = lin.sym_matrix(truth_cov)

    streams = substreams(scenario.seed)
    init_rng = streams[c.SUBSTREAM_INITIAL]
    process_rng = streams[c.SUBSTREAM_PROCESS]
    measurement_rng = streams[c.SUBSTREAM_MEASUREMENT]
    sqrt_p0 = lin.psd_sqrt(truth_cov)
    sqrt_q = lin.psd_sqrt(model.Q)
    sqrt_r = lin.psd_sqrt(model.R)

    W = box_muller(process_rng, steps * l).reshape(steps, l) @ sqrt_q.T
    V = box_muller(measurement_rng, steps * m).reshape(steps, m) @ sqrt_r.T

    truths = np.empty((steps + 1, n))
    measurements = np.empty((steps, m))
    if np.any(truth_cov):
        truths[0] = truth_mean + sqrt_p0 @ box_muller(init_rng, n)
    else:
        truths[0] = truth_mean
    for k in range(1, steps + 1):
        truths[k] = model.Phi @ truths[k - 1] + model.Gamma @ W[k - 1]
        measurements[k - 1] = model.H @ truths[k] + V[k - 1]

    logger.debug("generated %d steps (n=%d, m=%d) with seed %d", steps, n, m, scenario.seed)
    return Trajectory(truths=truths, measurements=measurements)

def nees(belief: GaussianBelief, truth) -> float:
    """(x_hat - x)^T S^-1 (x_hat - x)"""
    error = belief.mean - np.asarray(truth, dtype=float)
    return float(error @ lin.solve_spd(belief.cov, error))

def run_filter(scenario: Scenario, trajectory: Trajectory) -> Tuple[List[flt.UpdateRecord], FilterSummary]:
    model = scenario.model
    check = mdl.validate(model)
    if not check.ok:
        raise ValueError("invalid scenario model: " + "; ".join(check.messages()))
    if trajectory.measurements.ndim != 2 or trajectory.measurements.shape[1] != model.m:
        raise DimensionMismatch(f"trajectory measurements are not {model.m}-vectors")
    if trajectory.truths.shape != (trajectory.steps + 1, model.n):
        raise DimensionMismatch(f"trajectory truths are not {trajectory.steps + 1} x {model.n}")
    if scenario.initial_belief.n != model.n:
        raise DimensionMismatch(f"initial belief has {scenario.initial_belief.n} states, model has {model.n}")

    belief = scenario.initial_belief
    records, nees_values, cumulative = [], [], []
    total = 0.0
    for k in range(1, trajectory.steps + 1):
        predicted = mdl.predict(belief, model)
        record = flt.update_optimal(predicted, trajectory.measurements[k - 1], model, step=k)
        belief = record.posterior
        total += record.mi_nats
        records.append(record)
        cumulative.append(total)
        nees_values.append(nees(belief, trajectory.truths[k]))

    summary = FilterSummary(steps=len(records),
                            cumulative_mi_nats=total,
                            cumulative_mi_bits=float(info.nats_to_bits(total)),
                            mean_nees=float(np.mean(nees_values)),
                            mean_nis=float(np.mean([r.nis for r in records])),
                            nees=nees_values,
                            cumulative_mi=cumulative)
    logger.debug("filtered %d steps: cumulative MI %.6f nats, mean NEES %.4f",
                 summary.steps, summary.cumulative_mi_nats, summary.mean_nees)
    return records, summary
