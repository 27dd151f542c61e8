#!/usr/bin/env python
# -*- coding: UTF-8 -*-

# mod_main.py -- main module. Command line front end. The simulate, filter and
# verify commands are triggered from here:
#   python mod_main.py simulate --config scenarios/scalar_golden.json --out traj.csv
#   python mod_main.py filter --config scenarios/scalar_golden.json --trajectory traj.csv --out trace.csv
#   python mod_main.py verify --trials 100 --seed 42 --report report.json
# Exit codes: 0 pass, 1 verification failure, 2 usage / validation, 3 I/O.
#
# This file is part of the "infokalman" Python library
# for deriving the Kalman filter gain from the mutual information
# between the predicted state and the measurement
#

import argparse
import sys

import numpy as np

import generic.mod_constants as c
from generic.mod_errors import ConfigError
import mod_json as js
import filter_calc.mod_sim as sim
import verify.mod_verify as vf
import log_utils

logger = log_utils.getLogger(__name__)


def cmd_simulate(config_path, out_path, seed_override=None):
    logger.info("simulate: config %s", config_path)
    try:
        scenario = js.load_scenario(config_path, seed_override)
        trajectory = sim.generate(scenario)
        js.write_trajectory(out_path, trajectory, scenario.seed)
    except OSError as err:
        logger.error("I/O error: %s", err)
        return c.EXIT_IO
    except (ConfigError, ValueError, np.linalg.LinAlgError) as err:
        logger.error("%s", err)
        return c.EXIT_USAGE
    return c.EXIT_OK

def cmd_filter(config_path, trajectory_path, out_path):
    logger.info("filter: config %s, trajectory %s", config_path, trajectory_path)
    try:
        scenario = js.load_scenario(config_path)
        trajectory = js.load_trajectory(trajectory_path, scenario.model)
        records, summary = sim.run_filter(scenario, trajectory)
        js.write_trace(out_path, records, summary)
    except OSError as err:
        logger.error("I/O error: %s", err)
        return c.EXIT_IO
    except (ConfigError, ValueError, np.linalg.LinAlgError) as err:
        logger.error("%s", err)
        return c.EXIT_USAGE
    logger.info("cumulative MI %.10f nats (%.10f bits), mean NEES %.4f, mean NIS %.4f",
                summary.cumulative_mi_nats, summary.cumulative_mi_bits, summary.mean_nees, summary.mean_nis)
    return c.EXIT_OK

def cmd_verify(trials, seed, tolerance_overrides=None, report_path=None, jobs=1):
    if trials < 1:
        logger.error("--trials must be at least 1")
        return c.EXIT_USAGE
    try:
        vf.verifyCfg = js.load_verify_config()
        report = vf.run_suite(trials, seed, tolerance_overrides, jobs=jobs)
    except OSError as err:
        logger.error("I/O error: %s", err)
        return c.EXIT_IO
    except (ConfigError, ValueError) as err:
        logger.error("%s", err)
        return c.EXIT_USAGE
    try:
        if report_path:
            js.write_report(report_path, report)
    except OSError as err:
        logger.error("I/O error: %s", err)
        return c.EXIT_IO
    logger.info("verification %s", "PASSED" if report.overall_passed else "FAILED")
    return c.EXIT_OK if report.overall_passed else c.EXIT_VERIFY_FAILED

def parse_tolerance(text):
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got '{text}'")
    if name not in c.CHECK_NAMES:
        raise argparse.ArgumentTypeError(f"unknown check '{name}' (one of {', '.join(c.CHECK_NAMES)})")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance for {name} is not a number: '{value}'")

def _is_u64(value):
    return 0 <= value < 2 ** 64

def build_parser():
    parser = argparse.ArgumentParser(prog="infokalman",
                                     description="Kalman filtering and its mutual-information gain derivation")
    parser.add_argument("--log-level", default=None, help="override the logging.conf level (DEBUG, INFO, ...)")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="generate a seeded ground-truth trajectory")
    simulate.add_argument("--config", required=True)
    simulate.add_argument("--out", required=True)
    simulate.add_argument("--seed", type=int, default=None, help="override the scenario seed (u64)")

    filt = commands.add_parser("filter", help="run the Kalman filter over a trajectory")
    filt.add_argument("--config", required=True)
    filt.add_argument("--trajectory", required=True)
    filt.add_argument("--out", required=True)

    verify = commands.add_parser("verify", help="run the verification suite")
    verify.add_argument("--trials", type=int, default=100)
    verify.add_argument("--seed", type=int, default=42)
    verify.add_argument("--tol", type=parse_tolerance, action="append", default=[],
                        metavar="NAME=VALUE", help="override one check tolerance (repeatable)")
    verify.add_argument("--report", default=None)
    verify.add_argument("--jobs", type=int, default=1, help="concurrent verification instances")
    return parser

def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.log_level:
        log_utils.setLevel(args.log_level)
    if args.command == "simulate":
        if args.seed is not None and not _is_u64(args.seed):
            logger.error("--seed must be a u64")
            return c.EXIT_USAGE
        return cmd_simulate(args.config, args.out, args.seed)
    if args.command == "filter":
        return cmd_filter(args.config, args.trajectory, args.out)
    if not _is_u64(args.seed) or args.jobs < 1:
        logger.error("--seed must be a u64 and --jobs at least 1")
        return c.EXIT_USAGE
    return cmd_verify(args.trials, args.seed, dict(args.tol), args.report, args.jobs)

if __name__ == "__main__":
    sys.exit(main())
