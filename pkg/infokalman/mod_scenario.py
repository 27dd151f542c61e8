from __future__ import annotations

from typing import Dict, List, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

import generic.mod_constants as c

Matrix = List[List[float]]
Vector = List[float]


class OptimizerSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_iterations: int = Field(c.MAX_ITERATIONS, gt=0)
    gradient_tolerance: float = Field(c.GRADIENT_TOLERANCE, gt=0)
    initial_step: float = Field(c.INITIAL_STEP, gt=0)
    backtrack_factor: float = Field(c.BACKTRACK_FACTOR, gt=0, lt=1)
    armijo_constant: float = Field(c.ARMIJO_CONSTANT, gt=0, lt=1)
    step_rule: Literal["constant", "bb"] = c.STEP_BB


class BeliefConfig(BaseModel):
    mean: Vector
    cov: Matrix


class ScenarioConfig(BaseModel):
    """Scenario file contents. Shapes and definiteness are checked by mod_model.validate."""
    model_config = ConfigDict(populate_by_name=True)

    n: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    l: int = Field(..., ge=1)
    Phi: Matrix
    Gamma: Matrix
    H: Matrix
    Q: Matrix
    R: Matrix
    initial_belief: BeliefConfig
    initial_truth: BeliefConfig
    steps: int = Field(..., ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)

    @model_validator(mode="after")
    def _belief_lengths(self):
        for name in ("initial_belief", "initial_truth"):
            belief = getattr(self, name)
            if len(belief.mean) != self.n:
                raise ValueError(f"{name}.mean has {len(belief.mean)} entries, expected n = {self.n}")
        return self


class CheckResult(BaseModel):
    """failures counts instances that produced no error value at all
       (optimizer did not converge, a curvature was not negative)"""
    check_name: str
    instances_run: int
    max_error: float
    tolerance: float
    passed: bool
    failures: int = 0


class ReportMetadata(BaseModel):
    seed: int
    build: str
    timestamp: str
    trials: int
    rng: str = c.RNG_NAME


class VerificationReport(BaseModel):
    suite: List[CheckResult]
    overall_passed: bool
    metadata: ReportMetadata

    @model_validator(mode="after")
    def _overall_is_conjunction(self):
        if self.overall_passed != all(check.passed for check in self.suite):
            raise ValueError("overall_passed must equal the conjunction of the check verdicts")
        return self


class TrajectoryPayload(BaseModel):
    truths: Matrix
    measurements: Matrix


class FilterRequest(BaseModel):
    scenario: ScenarioConfig
    trajectory: TrajectoryPayload


class VerifyRequest(BaseModel):
    trials: int = Field(100, ge=1)
    seed: int = Field(42, ge=0, lt=2 ** 64)
    tolerances: Dict[str, float] = Field(default_factory=dict)
