from os import path

import numpy as np
import pytest

import mod_model as mdl

SCENARIO_DIR = path.join(path.dirname(path.dirname(path.abspath(__file__))), "scenarios")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

@pytest.fixture
def scalar_model():
    """Phi = Gamma = H = 1, Q = 0, R = 1"""
    return mdl.StateSpaceModel.from_matrices(Phi=[[1.0]], Gamma=[[1.0]], H=[[1.0]], Q=[[0.0]], R=[[1.0]])

@pytest.fixture
def unit_belief():
    return mdl.GaussianBelief([0.0], [[1.0]])

@pytest.fixture
def golden_config_path():
    return path.join(SCENARIO_DIR, "scalar_golden.json")

@pytest.fixture
def two_state_config_path():
    return path.join(SCENARIO_DIR, "stable_two_state.json")
