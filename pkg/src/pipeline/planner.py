"""
Rule-table planner: turns a DesignSpec into a PipelinePlan and classifies
how autonomous the resulting design process is.

Every rule that shapes the plan is named and recorded in
PipelinePlan.rules_applied so a run report shows how each value was chosen.
"""

import json
import math
from typing import Any, Dict, List, Sequence

from loguru import logger
from pydantic import ValidationError

from src.config import (
    DEFAULT_PWM_FREQ_HZ,
    DEFAULT_RPM,
    DEFAULT_STL_MODE,
    DEFAULT_TRACE_DURATION_MS,
    OPTIMIZER_BUDGET,
)
from src.models.errors import OverrideError, PlanningError
from src.models.schema import (
    AmdLevel,
    BladeDesignParams,
    Bound,
    DesignSpec,
    HullParams,
    ObjectiveConfig,
    OperatingPoint,
    OverrideDirective,
    ParameterBounds,
    PipelinePlan,
    Stage,
    STAGE_ORDER,
)

# Stages that only produce shapes; no physics or integration decisions.
CODEGEN_STAGES = {Stage.GENERATE_GEOMETRY, Stage.ASSEMBLE_MESH}

# Plan fields whose values are maps, so an override may add a new key.
MAP_PATHS = {"checkpoints", "bounds.bounds"}


def max_root_chord(params: BladeDesignParams) -> float:
    """Longest root chord whose section, at any pitch, still sinks into the hub."""
    reach = math.hypot(max(params.pitch_axis_x0, 1 - params.pitch_axis_x0), params.thickness_ratio_tmax)
    return min(params.hub_length, 0.99 * params.hub_diameter / 2 / reach)


def default_bounds(params: BladeDesignParams) -> ParameterBounds:
    """Search box around a planned design; span may only shrink."""
    return ParameterBounds(bounds={
        "span_L": Bound(lower=0.5 * params.span_L, upper=params.span_L),
        "chord_root_Cr": Bound(lower=0.006, upper=min(0.014, max_root_chord(params))),
        "chord_tip_Ct": Bound(lower=0.004, upper=0.012),
        "pitch_root_ar": Bound(lower=0.10, upper=0.80),
        "pitch_tip_at": Bound(lower=0.05, upper=0.60),
    })


class Planner:
    """
    Maps requirements, constraints and human feedback onto a plan through a named rule table.
    """

    def plan(self, spec: DesignSpec) -> PipelinePlan:
        """
        Build a pipeline plan from a design spec.

        Args:
            spec: Functional requirements, constraints and human feedback

        Returns:
            The plan, with overrides from spec.human_feedback applied last

        Raises:
            PlanningError: if a constraint cannot be satisfied
            OverrideError: if an override names an unknown plan field
        """
        F = spec.functional_requirements
        C = spec.constraints
        dims = C.max_dimensions_m
        rules: List[str] = []

        defaults = BladeDesignParams()
        span = min(defaults.span_L, (dims.propeller_diameter - defaults.hub_diameter) / 2)
        if span <= 0:
            raise PlanningError(
                "constraints.max_dimensions_m.propeller_diameter",
                f"diameter {dims.propeller_diameter} m leaves no blade span around a "
                f"{defaults.hub_diameter} m hub"
            )
        initial_params = BladeDesignParams(**{**defaults.dict(), "span_L": span})
        rules.append(f"span_from_propeller_diameter: span_L={span:.6f} m")

        if C.hull_wall_thickness_m >= min(dims.hull_length, dims.hull_beam, dims.hull_depth) / 2:
            raise PlanningError(
                "constraints.hull_wall_thickness_m",
                f"wall {C.hull_wall_thickness_m} m leaves no cavity in a "
                f"{dims.hull_length} x {dims.hull_beam} x {dims.hull_depth} m hull"
            )
        try:
            hull = HullParams(
                length=dims.hull_length,
                beam=dims.hull_beam,
                depth=dims.hull_depth,
                wall_thickness=C.hull_wall_thickness_m
            )
        except ValidationError as e:
            raise PlanningError("constraints.max_dimensions_m", str(e)) from None
        rules.append(
            f"hull_from_max_dimensions: {hull.length:.6f} x {hull.beam:.6f} x {hull.depth:.6f} m"
        )

        rpm = F.rpm if F.rpm is not None else DEFAULT_RPM
        operating_point = OperatingPoint(
            rpm=rpm,
            advance_speed_V=F.cruise_speed_mps,
            fluid_density=C.water_density
        )
        rules.append(
            f"operating_point_from_cruise_speed: V={F.cruise_speed_mps:.6f} m/s, rpm={rpm:.3f}"
        )

        objective = ObjectiveConfig(
            min_thrust_N=F.required_thrust_N,
            max_root_stress_Pa=C.max_stress_Pa
        )
        rules.append(
            f"objective_from_requirements: min_thrust={F.required_thrust_N:.6f} N, "
            f"max_stress={C.max_stress_Pa:.6e} Pa"
        )
        rules.append(f"payload_to_buoyancy: payload={F.payload_mass_kg:.6f} kg")

        bounds = default_bounds(initial_params)
        rules.append(f"default_bounds: tunable={','.join(bounds.tunable_fields())}")

        plan = PipelinePlan(
            name=spec.name,
            stages=list(STAGE_ORDER),
            initial_params=initial_params,
            bounds=bounds,
            hull=hull,
            objective=objective,
            operating_point=operating_point,
            payload_mass_kg=F.payload_mass_kg,
            water_density=C.water_density,
            hull_material_density=C.hull_material_density,
            optimizer_budget=OPTIMIZER_BUDGET,
            pwm_freq_hz=DEFAULT_PWM_FREQ_HZ,
            trace_duration_ms=DEFAULT_TRACE_DURATION_MS,
            stl_mode=DEFAULT_STL_MODE,
            rules_applied=rules
        )
        for rule in rules:
            logger.info(f"Planning rule: {rule}")

        plan = self.apply_overrides(plan, spec.human_feedback)
        logger.info(f"Planned '{plan.name}': {len(plan.stages)} stages, {len(plan.overrides_applied)} overrides")
        return plan

    def apply_overrides(self, plan: PipelinePlan, directives: Sequence[OverrideDirective]) -> PipelinePlan:
        """
        Apply override directives in order, re-validating after each one.

        Raises:
            OverrideError: for an unknown path or a value the plan rejects
        """
        for directive in directives:
            data = json.loads(plan.json())
            _set_path(data, directive.path, directive.value)
            applied = f"{directive.path}={json.dumps(directive.value, sort_keys=True)}"
            data["overrides_applied"] = plan.overrides_applied + [applied]
            try:
                plan = PipelinePlan.parse_obj(data)
            except ValidationError as e:
                raise OverrideError(directive.path, f"Override {applied} rejected: {e}") from None
            logger.info(f"Override applied: {applied}")
        return plan

    def classify_amd_level(self, plan: PipelinePlan) -> AmdLevel:
        """
        Map the plan's automation and checkpoints onto the 0-4 autonomy scale.

        The scale is qualitative; this table is one quantization of it and
        each rationale names the rule that fired.
        """
        if not plan.stages:
            return AmdLevel(level=0, rationale="manual: no automated stages")

        reviewed = plan.reviewed_stages()
        if not reviewed:
            return AmdLevel(level=4, rationale="end-to-end automation: zero checkpoints")

        if len(reviewed) == len(plan.stages):
            if set(plan.stages) <= CODEGEN_STAGES:
                return AmdLevel(
                    level=1,
                    rationale="assisted: only geometry/mesh generation automated, every decision checkpointed"
                )
            return AmdLevel(
                level=2,
                rationale="semi-autonomous: domain stages automated, every integration boundary checkpointed"
            )

        if reviewed == [plan.stages[-1]]:
            return AmdLevel(
                level=3,
                rationale="conditional autonomy: cross-stage handoffs automated, only final review checkpointed"
            )

        return AmdLevel(
            level=2,
            rationale=f"semi-autonomous: {len(reviewed)} of {len(plan.stages)} stage boundaries checkpointed"
        )


def _set_path(data: Dict[str, Any], path: str, value: Any) -> None:
    """Set a dotted path inside plan JSON, refusing to create unknown fields."""
    keys = path.split(".")
    node: Any = data
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise OverrideError(path)
        node = node[key]
    last = keys[-1]
    parent = ".".join(keys[:-1])
    if not isinstance(node, dict) or (last not in node and parent not in MAP_PATHS):
        raise OverrideError(path)
    node[last] = value


# Singleton instance
planner = Planner()


def plan(spec: DesignSpec) -> PipelinePlan:
    """Plan a design spec with the shared planner."""
    return planner.plan(spec)


def classify_amd_level(plan: PipelinePlan) -> AmdLevel:
    """Classify a plan with the shared planner."""
    return planner.classify_amd_level(plan)
