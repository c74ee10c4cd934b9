"""
Command-line entry point for the AutoProp design toolkit.

Exit codes: 0 success (including a run paused for review), 2 validation
error, 3 stage failure.
"""

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Type

import uvicorn
from loguru import logger
from pydantic import BaseModel, ValidationError

from src.analysis.hydrodynamics import bem_evaluate
from src.analysis.stress import root_bending_stress
from src.config import (
    API_HOST,
    API_PORT,
    DEFAULT_PWM_FREQ_HZ,
    DEFAULT_RPM,
    DEFAULT_STL_MODE,
    DEFAULT_TRACE_DURATION_MS,
    HUB_SEGMENTS,
    OPTIMIZER_BUDGET,
    validate_config,
)
from src.control.pwm_trace import export_trace_csv, simulate_script
from src.generator.document_generator import document_generator
from src.geometry.blade_geometry import generate_blade_sections
from src.mesh.builders import assemble_propeller, generate_hull
from src.mesh.stl_io import export_stl
from src.mesh.tri_mesh import mesh_stats
from src.models.errors import AutoPropError
from src.models.schema import (
    BladeDesignParams,
    DesignSpec,
    HullParams,
    ObjectiveConfig,
    OperatingPoint,
    PipelinePlan,
    RunStatus,
    Stage,
    StlMode,
)
from src.optimizer.pattern_search import best_record, export_history_csv, optimize
from src.pipeline.planner import default_bounds, planner
from src.pipeline.runner import run_pipeline

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_STAGE_FAILURE = 3

UNIT_SCALE = {"mm": 1e-3, "m": 1.0}
ANGLE_SCALE = {"deg": math.pi / 180, "rad": 1.0}

LENGTH_FIELDS = {
    "span_L", "chord_root_Cr", "chord_tip_Ct", "chord_mid_Cm", "hub_diameter", "hub_length",
    "length", "beam", "depth", "wall_thickness",
}


def parse_quantity(raw: str, units: str, is_length: bool) -> float:
    """
    Parse a number with an optional mm, m, deg or rad suffix.

    Bare values of length fields are read in `units`.
    """
    text = raw.strip()
    for suffix, scale in list(UNIT_SCALE.items()) + list(ANGLE_SCALE.items()):
        # "mm" must win over "m"
        if suffix == "m" and text.endswith("mm"):
            continue
        if text.endswith(suffix):
            return float(text[:-len(suffix)]) * scale
    value = float(text)
    return value * UNIT_SCALE[units] if is_length else value


def apply_settings(model: Type[BaseModel], base: Dict[str, Any], settings: Sequence[str], units: str) -> BaseModel:
    """Build a model from base values updated by key=value settings."""
    values = dict(base)
    for setting in settings or []:
        if "=" not in setting:
            raise AutoPropError(f"Setting must be key=value, got {setting!r}")
        key, raw = setting.split("=", 1)
        field = model.__fields__.get(key)
        if field is None:
            raise AutoPropError(f"Unknown parameter {key!r} for {model.__name__}")
        if isinstance(field.type_, type) and issubclass(field.type_, float):
            values[key] = parse_quantity(raw, units, key in LENGTH_FIELDS)
        else:
            values[key] = raw
    return model(**values)


def load_params(args: argparse.Namespace) -> BladeDesignParams:
    base = json.loads(Path(args.params).read_text(encoding="utf-8")) if args.params else {}
    return apply_settings(BladeDesignParams, base, args.set, args.units)


def write_output(payload: bytes, output: Optional[str]) -> None:
    if output:
        Path(output).write_bytes(payload)
        logger.info(f"Wrote {output} ({len(payload)} bytes)")
    else:
        sys.stdout.write(payload.decode("utf-8"))


def output_json(data: Any) -> None:
    sys.stdout.write(json.dumps(data, indent=2, sort_keys=True) + "\n")


def cmd_plan(args: argparse.Namespace) -> int:
    spec = DesignSpec.parse_file(args.spec)
    plan = planner.plan(spec)
    write_output((plan.json(indent=2) + "\n").encode("utf-8"), args.output)
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    plan = PipelinePlan.parse_file(args.plan)
    report = run_pipeline(plan, args.output, approved=[Stage(s) for s in args.approve or []])
    output_json({
        "status": report.status.value,
        "stages": {r.stage.value: r.status.value for r in report.stages},
        "amd_level": report.amd_level.level,
    })
    return EXIT_STAGE_FAILURE if report.status == RunStatus.FAILED else EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    sections = generate_blade_sections(load_params(args))
    write_output(document_generator.generate_sections_csv(sections), args.output)
    return EXIT_OK


def cmd_mesh(args: argparse.Namespace) -> int:
    if args.hull:
        hull_params = apply_settings(HullParams, {}, args.set, args.units)
        mesh = generate_hull(hull_params)
    else:
        mesh = assemble_propeller(load_params(args), HUB_SEGMENTS)
    Path(args.output).write_bytes(export_stl(mesh, args.stl))
    output_json(json.loads(mesh_stats(mesh).json()))
    return EXIT_OK


def _operating_point(args: argparse.Namespace) -> OperatingPoint:
    return OperatingPoint(rpm=args.rpm, advance_speed_V=args.speed, fluid_density=args.density)


def cmd_eval(args: argparse.Namespace) -> int:
    params = load_params(args)
    result = bem_evaluate(params, _operating_point(args))
    stress = root_bending_stress(result, params) if result.thrust > 0 else None
    output_json({
        "thrust_N": result.thrust,
        "torque_Nm": result.torque,
        "efficiency": result.efficiency,
        "root_stress_Pa": stress,
    })
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    if args.plan:
        plan = PipelinePlan.parse_file(args.plan)
        params, bounds, cfg, op = plan.initial_params, plan.bounds, plan.objective, plan.operating_point
        budget = plan.optimizer_budget if args.budget is None else args.budget
    else:
        params = load_params(args)
        bounds, cfg, op = default_bounds(params), ObjectiveConfig(), _operating_point(args)
        budget = OPTIMIZER_BUDGET if args.budget is None else args.budget

    history = optimize(params, bounds, cfg, op, budget)
    write_output(export_history_csv(history, bounds.tunable_fields()), args.output)
    if args.output:
        best = best_record(history)
        output_json({
            "evaluations": len(history),
            "best_iteration": best.iteration_n,
            "objective": best.objective_value,
            "params": json.loads(best.params_Pn.json()),
        })
    return EXIT_OK


def cmd_simctl(args: argparse.Namespace) -> int:
    script = Path(args.script).read_text(encoding="utf-8")
    segments = simulate_script(script, args.duration_ms, args.freq, args.first_pulse_delay_us)
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        for segment in segments:
            name = f"trace_{segment['line']:03d}_{segment['command'].kind.value}.csv"
            (out / name).write_bytes(export_trace_csv(segment["trace"]))
    output_json([
        {
            "line": segment["line"],
            "command": segment["command"].kind.value,
            "duty_pct": {ch.value: round(100 * d, 3) for ch, d in segment["duty"].items()},
        }
        for segment in segments
    ])
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    plan = PipelinePlan.parse_file(args.plan)
    output_json(planner.classify_amd_level(plan).dict())
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    logger.info("Starting AutoProp API")
    uvicorn.run(
        "src.api.app:app",
        host=API_HOST,
        port=API_PORT,
        reload=args.reload,
        log_level="info"
    )
    return EXIT_OK


def _add_param_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--params", help="JSON file of design parameters")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="Override a parameter; values accept mm, m, deg or rad suffixes")


def _add_operating_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rpm", type=float, default=DEFAULT_RPM, help="Rotation rate")
    p.add_argument("--speed", type=float, default=1.0, help="Advance speed in m/s")
    p.add_argument("--density", type=float, default=1000.0, help="Fluid density in kg/m^3")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="autoprop", description="AutoProp design toolkit")
    parser.add_argument("--units", choices=sorted(UNIT_SCALE), default="m",
                        help="Unit of bare length values in --set")
    subparsers = parser.add_subparsers(dest="command", help="Command to execute")
    subparsers.required = True

    p = subparsers.add_parser("plan", help="Plan a design spec")
    p.add_argument("spec", help="Design spec JSON")
    p.add_argument("-o", "--output", help="Plan JSON (stdout if omitted)")
    p.set_defaults(func=cmd_plan)

    p = subparsers.add_parser("run", help="Run a plan's stages")
    p.add_argument("plan", help="Plan JSON")
    p.add_argument("-o", "--output", required=True, help="Artifact directory")
    p.add_argument("--approve", action="append", choices=[s.value for s in Stage],
                   help="Approve a human_review checkpoint")
    p.set_defaults(func=cmd_run)

    p = subparsers.add_parser("generate", help="Tabulate blade sections")
    _add_param_options(p)
    p.add_argument("-o", "--output", help="Sections CSV (stdout if omitted)")
    p.set_defaults(func=cmd_generate)

    p = subparsers.add_parser("mesh", help="Build a propeller or hull STL")
    _add_param_options(p)
    p.add_argument("--hull", action="store_true", help="Mesh the hull instead of the propeller")
    p.add_argument("--stl", choices=[m.value for m in StlMode], default=DEFAULT_STL_MODE)
    p.add_argument("-o", "--output", required=True, help="STL file")
    p.set_defaults(func=cmd_mesh)

    p = subparsers.add_parser("eval", help="Blade-element evaluation")
    _add_param_options(p)
    _add_operating_options(p)
    p.set_defaults(func=cmd_eval)

    p = subparsers.add_parser("optimize", help="Pattern-search refinement")
    _add_param_options(p)
    _add_operating_options(p)
    p.add_argument("--plan", help="Take bounds, objective and operating point from a plan")
    p.add_argument("--budget", type=int, help="Evaluation budget")
    p.add_argument("-o", "--output", help="History CSV (stdout if omitted)")
    p.set_defaults(func=cmd_optimize)

    p = subparsers.add_parser("simctl", help="Simulate a serial command script")
    p.add_argument("script", help="One command per line")
    p.add_argument("-o", "--output", help="Directory for trace CSVs")
    p.add_argument("--duration-ms", type=float, default=DEFAULT_TRACE_DURATION_MS)
    p.add_argument("--freq", type=float, default=DEFAULT_PWM_FREQ_HZ, help="PWM frequency in Hz")
    p.add_argument("--first-pulse-delay-us", type=float, default=0.0)
    p.set_defaults(func=cmd_simctl)

    p = subparsers.add_parser("classify", help="AMD level of a plan")
    p.add_argument("plan", help="Plan JSON")
    p.set_defaults(func=cmd_classify)

    p = subparsers.add_parser("serve", help="Run the HTTP API")
    p.add_argument("--reload", action="store_true")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line."""
    args = build_parser().parse_args(argv)

    valid, error_message = validate_config()
    if not valid:
        logger.error(f"Invalid configuration: {error_message}")
        return EXIT_VALIDATION

    try:
        return args.func(args)
    except (ValidationError, AutoPropError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
