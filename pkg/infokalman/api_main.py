from fastapi import FastAPI, HTTPException

import numpy as np

import generic.mod_constants as c
from generic.mod_errors import ConfigError
import mod_json as js
import mod_scenario as mdata
import filter_calc.mod_sim as sim
import verify.mod_verify as vf
import log_utils

app = FastAPI()
logger = log_utils.getLogger(__name__)

@app.get("/")
async def root():
    return {"message": "infokalman", "version": c.VERSION}

@app.post("/scenario/simulate")
def simulate(config: mdata.ScenarioConfig):
    logger.info("simulate request: n=%d, m=%d, steps=%d", config.n, config.m, config.steps)
    try:
        trajectory = sim.generate(js.scenario_from_config(config))
    except (ConfigError, ValueError, np.linalg.LinAlgError) as err:
        raise HTTPException(status_code=422, detail=str(err))
    return {"truths": trajectory.truths.tolist(),
            "measurements": trajectory.measurements.tolist(),
            "rng": c.RNG_NAME}

@app.post("/scenario/filter")
def filter_trajectory(request: mdata.FilterRequest):
    try:
        scenario = js.scenario_from_config(request.scenario)
        trajectory = sim.Trajectory(truths=np.array(request.trajectory.truths, dtype=float, ndmin=2),
                                    measurements=np.array(request.trajectory.measurements, dtype=float, ndmin=2))
        records, summary = sim.run_filter(scenario, trajectory)
    except (ConfigError, ValueError, np.linalg.LinAlgError) as err:
        raise HTTPException(status_code=422, detail=str(err))
    rows = [{"k": record.step,
             "xhat": record.posterior.mean.tolist(),
             "sigma": record.posterior.cov.tolist(),
             "innovation": record.innovation.tolist(),
             "mi_nats": record.mi_nats,
             "cum_mi_nats": cumulative,
             "nees": nees}
            for record, cumulative, nees in zip(records, summary.cumulative_mi, summary.nees)]
    return {"trace": rows,
            "summary": {"steps": summary.steps,
                        "cumulative_mi_nats": summary.cumulative_mi_nats,
                        "cumulative_mi_bits": summary.cumulative_mi_bits,
                        "mean_nees": summary.mean_nees,
                        "mean_nis": summary.mean_nis}}

@app.post("/verify", response_model=mdata.VerificationReport)
def verify(request: mdata.VerifyRequest):
    try:
        return vf.run_suite(request.trials, request.seed, request.tolerances, cfg=js.load_verify_config())
    except ValueError as err:
        raise HTTPException(status_code=422, detail=str(err))
