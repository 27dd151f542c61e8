#!/usr/bin/env python
# -*- coding: UTF-8 -*-

# mod_json.py -- module JSON / file I/O. Everything that touches the disk:
#   scenario configs (JSON) -> ScenarioConfig -> Scenario
#   trajectory and trace files (comma-delimited, header row)
#   filter summary and verification report (JSON)
#   verification suite configuration (verify/verify_cfg.json)
#
# This file is part of the "infokalman" Python library
# for deriving the Kalman filter gain from the mutual information
# between the predicted state and the measurement
#

from os import path
import json

import numpy as np
from pydantic import ValidationError

import generic.mod_constants as c
import generic.mod_linops as lin
from generic.mod_errors import ConfigError
import mod_model as mdl
from mod_scenario import ScenarioConfig, VerificationReport
from filter_calc.mod_sim import Scenario, Trajectory
import log_utils

logger = log_utils.getLogger(__name__)

VERIFY_CFG_PATH = path.join(path.dirname(path.abspath(__file__)), 'verify', 'verify_cfg.json')


def _line_of_key(text, key):
    """1-based line of the first "key": in a JSON document, None if absent"""
    needle = f'"{key}"'
    for lineno, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return lineno
    return None

###############################################################################
##                                SCENARIOS                                  ##
###############################################################################
def parse_scenario_config(text, source="<config>") -> ScenarioConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"invalid JSON (column {err.colno}): {err.msg}", source, err.lineno) from err
    try:
        return ScenarioConfig.model_validate(raw)
    except ValidationError as err:
        first = err.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        key = next((part for part in first["loc"] if isinstance(part, str)), None)
        line = _line_of_key(text, key) if key else None
        raise ConfigError(f"{where}: {first['msg']}", source, line) from err

def scenario_from_config(config: ScenarioConfig, source="<config>", text=None) -> Scenario:
    """Builds and validates the Scenario; the first violation is reported with its line"""
    try:
        model = mdl.StateSpaceModel(n=config.n, m=config.m, l=config.l,
                                    Phi=config.Phi, Gamma=config.Gamma, H=config.H,
                                    Q=config.Q, R=config.R)
    except ValueError as err:
        raise ConfigError(f"ragged matrix: {err}", source) from err
    check = mdl.validate(model)
    if not check.ok:
        first = check.violations[0]
        line = _line_of_key(text, first.field) if text else None
        raise ConfigError("; ".join(check.messages()), source, line)
    try:
        belief = mdl.GaussianBelief(config.initial_belief.mean, config.initial_belief.cov)
    except (ValueError, np.linalg.LinAlgError) as err:
        line = _line_of_key(text, "initial_belief") if text else None
        raise ConfigError(f"initial_belief: {err}", source, line) from err
    truth_line = _line_of_key(text, "initial_truth") if text else None
    truth_mean = np.asarray(config.initial_truth.mean, dtype=float)
    if not np.all(np.isfinite(truth_mean)):
        raise ConfigError("initial_truth.mean has non-finite entries", source, truth_line)
    try:
        truth_cov = np.array(config.initial_truth.cov, dtype=float, ndmin=2)
    except ValueError as err:
        raise ConfigError(f"initial_truth.cov: ragged matrix: {err}", source, truth_line) from err
    if truth_cov.shape != (config.n, config.n):
        raise ConfigError(f"initial_truth.cov shape {truth_cov.shape} ≠ ({config.n}, {config.n})", source, truth_line)
    if not np.all(np.isfinite(truth_cov)):
        raise ConfigError("initial_truth.cov has non-finite entries", source, truth_line)
    try:
        truth_cov = lin.sym_matrix(truth_cov)
    except ValueError as err:
        raise ConfigError(f"initial_truth.cov: {err}", source, truth_line) from err
    if not lin.is_psd(truth_cov):
        raise ConfigError("initial_truth.cov not positive semidefinite", source, truth_line)
    return Scenario(model=model,
                    initial_truth_mean=truth_mean,
                    initial_truth_cov=truth_cov,
                    initial_belief=belief,
                    steps=config.steps,
                    seed=config.seed)

def load_scenario(config_path, seed_override=None) -> Scenario:
    """Reads a scenario JSON file. OSError propagates, everything else is ConfigError."""
    with open(config_path, 'r', encoding='utf-8') as json_configfile:
        text = json_configfile.read()
    config = parse_scenario_config(text, config_path)
    if seed_override is not None:
        config = config.model_copy(update={"seed": int(seed_override)})
    return scenario_from_config(config, config_path, text)

###############################################################################
##                           DELIMITED TEXT FILES                            ##
###############################################################################
def trajectory_columns(n, m):
    return ["k"] + [f"x_{i}" for i in range(1, n + 1)] + [f"z_{j}" for j in range(1, m + 1)]

def trace_columns(n, m):
    """sigma_ij covariance columns; from n = 10 on they are sigma_i_j so names stay unique"""
    sep = "_" if n >= 10 else ""
    return (["k"] + [f"z_{j}" for j in range(1, m + 1)]
            + [f"xhat_{i}" for i in range(1, n + 1)]
            + [f"sigma_{i}{sep}{j}" for i in range(1, n + 1) for j in range(1, n + 1)]
            + [f"innovation_{j}" for j in range(1, m + 1)]
            + ["mi_nats", "cum_mi_nats", "nees"])

def _write_table(out_path, columns, rows):
    np.savetxt(out_path, rows, delimiter=",", header=",".join(columns), comments="",
               fmt="%.17g", encoding="utf-8")

def _read_table(in_path):
    with open(in_path, 'r', encoding='utf-8') as table_file:
        header = table_file.readline().strip().split(",")
        try:
            rows = np.loadtxt(table_file, delimiter=",", ndmin=2)
        except ValueError as err:
            raise ConfigError(f"malformed numeric rows: {err}", in_path) from err
    if rows.size and rows.shape[1] != len(header):
        raise ConfigError(f"{rows.shape[1]} columns but header names {len(header)}", in_path, 1)
    return header, rows

def write_trajectory(out_path, trajectory: Trajectory, seed=None):
    """Writes the table plus <out>.meta.json naming the generator; returns the metadata path"""
    steps, m = trajectory.measurements.shape
    n = trajectory.truths.shape[1]
    z = np.vstack([np.full((1, m), np.nan), trajectory.measurements])
    rows = np.column_stack([np.arange(steps + 1), trajectory.truths, z])
    _write_table(out_path, trajectory_columns(n, m), rows)
    meta_path = out_path + ".meta.json"
    with open(meta_path, 'w', encoding='utf-8') as json_metafile:
        json.dump({"steps": steps,
                   "n": n,
                   "m": m,
                   "seed": seed,
                   "rng": c.RNG_NAME}, json_metafile, indent=4)
    logger.info("wrote trajectory (%d steps) to %s and metadata to %s", steps, out_path, meta_path)
    return meta_path

def load_trajectory(in_path, model) -> Trajectory:
    header, rows = _read_table(in_path)
    expected = trajectory_columns(model.n, model.m)
    if header != expected:
        raise ConfigError(f"trajectory header does not match a model with n = {model.n}, "
                          f"m = {model.m}", in_path, 1)
    if rows.shape[0] < 2:
        raise ConfigError("trajectory needs the initial state and at least one measurement", in_path)
    truths = rows[:, 1:1 + model.n]
    measurements = rows[1:, 1 + model.n:]
    if not (np.all(np.isfinite(truths)) and np.all(np.isfinite(measurements))):
        raise ConfigError("trajectory has non-finite entries", in_path)
    return Trajectory(truths=truths, measurements=measurements)

def write_trace(out_path, records, summary):
    n = records[0].posterior.n
    m = records[0].measurement.size
    rows = [np.concatenate([[record.step], record.measurement, record.posterior.mean,
                            record.posterior.cov.reshape(-1), record.innovation,
                            [record.mi_nats, cumulative, nees]])
            for record, cumulative, nees in zip(records, summary.cumulative_mi, summary.nees)]
    _write_table(out_path, trace_columns(n, m), np.vstack(rows))
    summary_path = out_path + ".summary.json"
    with open(summary_path, 'w', encoding='utf-8') as json_summaryfile:
        json.dump({"steps": summary.steps,
                   "cumulative_mi_nats": summary.cumulative_mi_nats,
                   "cumulative_mi_bits": summary.cumulative_mi_bits,
                   "mean_nees": summary.mean_nees,
                   "mean_nis": summary.mean_nis,
                   "rng": summary.rng}, json_summaryfile, indent=4)
    logger.info("wrote trace (%d rows) to %s and summary to %s", len(rows), out_path, summary_path)
    return summary_path

def load_trace(in_path):
    """Header and rows of a trace file, for analysis and tests"""
    return _read_table(in_path)

###############################################################################
##                           VERIFICATION SUITE                              ##
###############################################################################
def load_verify_config(cfg_path=VERIFY_CFG_PATH):
    with open(cfg_path, 'r', encoding='utf-8') as json_cfgfile:
        cfg = json.loads(json_cfgfile.read())
    missing = [name for name in c.CHECK_NAMES if name not in cfg["tolerances"]]
    if missing:
        raise ConfigError(f"tolerances missing for {', '.join(missing)}", cfg_path)
    return cfg

def write_report(report_path, report: VerificationReport):
    with open(report_path, 'w', encoding='utf-8') as json_reportfile:
        json_reportfile.write(report.model_dump_json(indent=4))
        json_reportfile.write("\n")
    logger.info("wrote verification report to %s", report_path)

def load_report(report_path) -> VerificationReport:
    with open(report_path, 'r', encoding='utf-8') as json_reportfile:
        return VerificationReport.model_validate_json(json_reportfile.read())
