"""
Sequential stage runner for pipeline plans.
"""

import hashlib
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Tuple

from loguru import logger

from src.analysis.hydrodynamics import bem_evaluate
from src.analysis.stress import root_bending_stress
from src.config import HUB_SEGMENTS
from src.control.motor_control import REPORTED_CHANNEL, command_to_motor_states
from src.control.pwm_trace import export_trace_csv, generate_pwm_trace, measure_duty
from src.generator.document_generator import document_generator
from src.geometry.blade_geometry import generate_blade_sections
from src.mesh.builders import assemble_propeller, generate_hull, hull_envelope
from src.mesh.buoyancy import buoyancy_check
from src.mesh.stl_io import export_stl
from src.mesh.tri_mesh import mesh_stats
from src.models.errors import StageFailure
from src.models.schema import (
    ControlCommand,
    PipelinePlan,
    RunReport,
    RunStatus,
    Stage,
    StageResult,
    StageStatus,
)
from src.optimizer.pattern_search import best_record, export_history_csv, optimize
from src.pipeline.planner import classify_amd_level

StageOutput = Tuple[Dict[str, Any], List[str]]


def plan_digest(plan: PipelinePlan) -> str:
    """sha256 of the canonical plan JSON."""
    return hashlib.sha256(plan.json().encode("utf-8")).hexdigest()


class RunContext:
    """Artifacts and intermediate results shared between stages of one run."""

    def __init__(self, plan: PipelinePlan, output_dir: Path):
        self.plan = plan
        self.output_dir = output_dir
        self.params = plan.initial_params
        self.sections = None
        self.propeller = None
        self.hydro = None

    def write(self, name: str, payload: bytes) -> str:
        """Write an artifact and return its path relative to the output directory."""
        path = self.output_dir / name
        path.write_bytes(payload)
        logger.info(f"Wrote artifact {path} ({len(payload)} bytes)")
        return name


def _generate_geometry(ctx: RunContext) -> StageOutput:
    ctx.sections = generate_blade_sections(ctx.params)
    artifact = ctx.write("sections.csv", document_generator.generate_sections_csv(ctx.sections))
    metrics = {
        "n_sections": len(ctx.sections),
        "points_per_section": len(ctx.sections[0].points),
        "span_m": ctx.params.span_L,
    }
    return metrics, [artifact]


def _assemble_mesh(ctx: RunContext) -> StageOutput:
    ctx.propeller = assemble_propeller(ctx.params, HUB_SEGMENTS)
    stats = mesh_stats(ctx.propeller)
    if not stats.watertight:
        raise StageFailure("propeller mesh is not watertight")
    artifact = ctx.write("propeller.stl", export_stl(ctx.propeller, ctx.plan.stl_mode, name=ctx.plan.name))
    metrics = {
        "solids": stats.solid_count,
        "triangles": stats.triangle_count,
        "volume_m3": stats.volume_m3,
    }
    return metrics, [artifact]


def _evaluate(ctx: RunContext) -> StageOutput:
    op = ctx.plan.operating_point
    ctx.hydro = bem_evaluate(ctx.params, op)
    stress = root_bending_stress(ctx.hydro, ctx.params) if ctx.hydro.thrust > 0 else None
    report = document_generator.generate_hydro_report(ctx.params, op, ctx.hydro, stress)
    artifacts = [
        ctx.write("hydro_report.md", report.encode("utf-8")),
        ctx.write("hydro_report.json", ctx.hydro.json(indent=2).encode("utf-8")),
    ]
    metrics = {
        "thrust_N": ctx.hydro.thrust,
        "torque_Nm": ctx.hydro.torque,
        "efficiency": ctx.hydro.efficiency,
        "root_stress_Pa": stress,
    }
    return metrics, artifacts


def _optimize(ctx: RunContext) -> StageOutput:
    plan = ctx.plan
    history = optimize(
        ctx.params,
        plan.bounds,
        plan.objective,
        plan.operating_point,
        plan.optimizer_budget
    )
    best = best_record(history)
    ctx.params = best.params_Pn
    ctx.hydro = best.feedback_Rn
    fields = plan.bounds.tunable_fields()
    artifacts = [
        ctx.write("optimization_history.csv", export_history_csv(history, fields)),
        ctx.write("optimized_params.json", best.params_Pn.json(indent=2).encode("utf-8")),
    ]
    metrics = {
        "evaluations": len(history),
        "best_iteration": best.iteration_n,
        "best_objective": best.objective_value,
        "thrust_N": best.feedback_Rn.thrust,
        "efficiency": best.feedback_Rn.efficiency,
    }
    return metrics, artifacts


def _buoyancy_check(ctx: RunContext) -> StageOutput:
    plan = ctx.plan
    hull = generate_hull(plan.hull)
    shell = mesh_stats(hull)
    if not shell.watertight:
        raise StageFailure("hull mesh is not watertight")
    hull_mass = shell.volume_m3 * plan.hull_material_density
    total_mass = plan.payload_mass_kg + hull_mass
    result = buoyancy_check(hull_envelope(plan.hull), total_mass, plan.water_density)
    artifact = ctx.write("hull.stl", export_stl(hull, plan.stl_mode, name=f"{plan.name}_hull"))
    metrics = {
        "hull_mass_kg": hull_mass,
        "total_mass_kg": total_mass,
        "draft_m": result.draft,
        "freeboard_margin_m": result.freeboard_margin,
        "sinks": result.sinks,
    }
    return metrics, [artifact]


def _control_sim(ctx: RunContext) -> StageOutput:
    plan = ctx.plan
    metrics: Dict[str, Any] = {}
    artifacts = []
    for kind in plan.control_commands:
        states = command_to_motor_states(ControlCommand(kind=kind))
        trace = generate_pwm_trace(states, plan.trace_duration_ms, plan.pwm_freq_hz)
        metrics[f"duty_pct_{kind.value}"] = round(100 * measure_duty(trace, REPORTED_CHANNEL), 3)
        artifacts.append(ctx.write(f"trace_{kind.value}.csv", export_trace_csv(trace)))
    return metrics, artifacts


STAGE_HANDLERS: Dict[Stage, Callable[[RunContext], StageOutput]] = {
    Stage.GENERATE_GEOMETRY: _generate_geometry,
    Stage.ASSEMBLE_MESH: _assemble_mesh,
    Stage.EVALUATE: _evaluate,
    Stage.OPTIMIZE: _optimize,
    Stage.BUOYANCY_CHECK: _buoyancy_check,
    Stage.CONTROL_SIM: _control_sim,
}


def run_pipeline(
    plan: PipelinePlan,
    output_dir: str,
    approved: Iterable[Stage] = ()
) -> RunReport:
    """
    Execute a plan's stages in order and persist artifacts and reports.

    A stage gated by a human_review checkpoint that is not in `approved`
    pauses the run and writes review_<stage>.md. A failing stage is recorded
    and every later stage is skipped.

    Args:
        plan: Validated pipeline plan
        output_dir: Directory for artifacts; created if missing
        approved: Checkpointed stages cleared to run

    Returns:
        The run report, also written as report.json and report.md
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    approved = {Stage(stage) for stage in approved}
    digest = plan_digest(plan)
    ctx = RunContext(plan, out)
    logger.info(f"Running plan '{plan.name}' ({digest[:12]}) into {out}")

    results = [StageResult(stage=stage) for stage in plan.stages]
    status = RunStatus.COMPLETED
    for index, result in enumerate(results):
        stage = result.stage
        if status == RunStatus.FAILED:
            result.status = StageStatus.SKIPPED
            result.message = "skipped after an upstream failure"
            continue
        if status == RunStatus.PAUSED:
            continue

        if stage in plan.reviewed_stages() and stage not in approved:
            review = document_generator.generate_review(plan, digest, stage, results[:index])
            result.status = StageStatus.AWAITING_REVIEW
            result.artifacts = [ctx.write(f"review_{stage.value}.md", review.encode("utf-8"))]
            result.message = f"paused for human review; re-run with --approve {stage.value}"
            logger.info(f"Paused before {stage.value} for human review")
            status = RunStatus.PAUSED
            continue

        logger.info(f"Stage {stage.value} started")
        try:
            result.metrics, result.artifacts = STAGE_HANDLERS[stage](ctx)
            result.status = StageStatus.SUCCEEDED
            logger.info(f"Stage {stage.value} succeeded")
        except Exception as e:
            logger.error(f"Stage {stage.value} failed: {e}")
            result.status = StageStatus.FAILED
            result.message = f"{type(e).__name__}: {e}"
            status = RunStatus.FAILED

    report = RunReport(
        plan_name=plan.name,
        plan_digest=digest,
        status=status,
        amd_level=classify_amd_level(plan),
        stages=results,
        rules_applied=plan.rules_applied,
        overrides_applied=plan.overrides_applied
    )
    write_report(report, out)
    return report


def write_report(report: RunReport, output_dir: Path) -> None:
    """Persist the report as JSON and Markdown."""
    (output_dir / "report.json").write_text(document_generator.generate_json(report) + "\n", encoding="utf-8")
    (output_dir / "report.md").write_text(document_generator.generate_markdown(report), encoding="utf-8")
    logger.info(f"Run report written to {output_dir} with status {report.status.value}")
