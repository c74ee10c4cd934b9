"""
FastAPI application for the AutoProp design toolkit.
"""

from typing import Any, Dict

from fastapi import FastAPI, HTTPException, Path
from loguru import logger
from pydantic import ValidationError

from src.analysis.hydrodynamics import bem_evaluate
from src.analysis.stress import root_bending_stress
from src.config import DEFAULT_PWM_FREQ_HZ, DEFAULT_TRACE_DURATION_MS, validate_config
from src.control.motor_control import REPORTED_CHANNEL, command_to_motor_states, parse_command
from src.control.pwm_trace import generate_pwm_trace, measure_duty
from src.models.errors import AutoPropError, CommandParseError
from src.models.schema import AmdLevel, DesignSpec, EvaluateRequest, PipelinePlan
from src.pipeline.planner import planner


# Create the FastAPI app
app = FastAPI(
    title="AutoProp Design Toolkit",
    description="Plans, evaluates and simulates small-vessel propulsion designs",
    version="1.0.0"
)


@app.on_event("startup")
async def startup_event():
    """Validate configuration on startup."""
    valid, error_message = validate_config()
    if not valid:
        logger.error(f"Invalid configuration: {error_message}")
        raise RuntimeError(f"Invalid configuration: {error_message}")
    logger.info("API started")


@app.get("/health", summary="Health check endpoint")
async def health_check():
    """
    Check the health of the API and its configuration.
    """
    valid, error_message = validate_config()
    if not valid:
        return {"status": "unhealthy", "version": app.version, "error": error_message}
    return {"status": "healthy", "version": app.version}


@app.post("/plan", response_model=PipelinePlan, summary="Plan a design spec")
async def create_plan(spec: DesignSpec):
    """
    Turn a design spec into a pipeline plan.

    - **functional_requirements**: thrust, cruise speed and payload
    - **constraints**: dimensional envelope, stress limit and densities
    - **human_feedback**: ordered overrides applied after planning
    """
    try:
        return planner.plan(spec)
    except AutoPropError as e:
        logger.error(f"Planning failed: {e}")
        raise HTTPException(status_code=400, detail=str(e))


@app.post("/classify", response_model=AmdLevel, summary="Classify a plan's autonomy level")
async def classify_plan(plan: PipelinePlan):
    """
    Classify how much of the design process a plan automates.
    """
    return planner.classify_amd_level(plan)


@app.post("/evaluate", summary="Evaluate a propeller design")
async def evaluate_design(request: EvaluateRequest) -> Dict[str, Any]:
    """
    Blade-element thrust, torque and efficiency plus root bending stress.
    """
    try:
        result = bem_evaluate(request.params, request.operating_point)
    except AutoPropError as e:
        logger.error(f"Evaluation failed: {e}")
        raise HTTPException(status_code=400, detail=str(e))

    stress = root_bending_stress(result, request.params) if result.thrust > 0 else None
    return {
        "thrust": result.thrust,
        "torque": result.torque,
        "efficiency": result.efficiency,
        "root_stress_Pa": stress,
        "station_loads": [load.dict() for load in result.station_loads],
    }


@app.get("/control/{command}", summary="Simulate a motion command")
async def simulate_command(command: str = Path(..., description="forward, backward, left, right or stop")):
    """
    Motor states and measured PWM duty for one serial command.
    """
    try:
        parsed = parse_command(command)
    except CommandParseError as e:
        raise HTTPException(status_code=400, detail=str(e))
    if parsed is None:
        raise HTTPException(status_code=400, detail="Empty command")

    states = command_to_motor_states(parsed)
    try:
        trace = generate_pwm_trace(states, DEFAULT_TRACE_DURATION_MS, DEFAULT_PWM_FREQ_HZ)
        duty = measure_duty(trace, REPORTED_CHANNEL)
    except (AutoPropError, ValidationError) as e:
        logger.error(f"Control simulation failed: {e}")
        raise HTTPException(status_code=500, detail=str(e))

    return {
        "command": parsed.kind.value,
        "motor_a": states[0].dict(),
        "motor_b": states[1].dict(),
        "channel": REPORTED_CHANNEL.value,
        "duty_pct": round(100 * duty, 3),
    }
