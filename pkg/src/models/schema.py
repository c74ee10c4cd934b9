"""
Data models and schema for the AutoProp design toolkit.

Lengths are meters, angles radians, unless a field says otherwise.
"""

import math
from typing import List, Dict, Optional, Any, Tuple
from datetime import datetime
from enum import Enum
from pydantic import BaseModel, Field, validator, root_validator, conint


class ChordMode(str, Enum):
    """Spanwise chord distribution law."""
    LINEAR = "linear"
    GAUSSIAN_BULGE = "gaussian_bulge"
    PIECEWISE_MIDSPAN = "piecewise_midspan"


class PitchMode(str, Enum):
    """Spanwise pitch distribution law."""
    LINEAR = "linear"
    PIECEWISE_MIDSPAN = "piecewise_midspan"


class StlMode(str, Enum):
    """STL encodings."""
    BINARY = "binary"
    ASCII = "ascii"


class BladeDesignParams(BaseModel):
    """Full parameter vector for one propeller design."""
    span_L: float = Field(0.026, gt=0, description="Blade length along z")
    chord_root_Cr: float = Field(0.010, gt=0)
    chord_tip_Ct: float = Field(0.008, gt=0)
    chord_mid_Cm: float = Field(0.012, gt=0)
    pitch_root_ar: float = 0.40
    pitch_tip_at: float = 0.20
    pitch_mid_am: float = 0.30
    bulge_beta: float = 0.0
    bulge_gamma: float = Field(10.0, ge=0)
    bulge_r0: float = Field(0.5, ge=0, le=1)
    rake_angle: float = 0.0
    skew_angle: float = 0.0
    thickness_ratio_tmax: float = Field(0.12, gt=0, description="Max thickness as fraction of chord")
    pitch_axis_x0: float = Field(0.25, ge=0, le=1)
    chord_mode: ChordMode = ChordMode.LINEAR
    pitch_mode: PitchMode = PitchMode.LINEAR
    n_sections: int = Field(11, ge=2)
    n_chord_points: int = Field(40, ge=8)
    n_blades: int = Field(3, ge=1)
    hub_diameter: float = Field(0.020, gt=0)
    hub_length: float = Field(0.014, gt=0)
    cosine_spacing: bool = True

    class Config:
        allow_mutation = False
        extra = "forbid"

    @validator("rake_angle", "skew_angle")
    def _finite_tangent(cls, value: float) -> float:
        if not abs(value) < math.pi / 2:
            raise ValueError("angle magnitude must be below pi/2")
        return value

    @validator("n_chord_points")
    def _even_point_count(cls, value: int) -> int:
        if value % 2:
            raise ValueError("n_chord_points must be even for a symmetric closed section")
        return value

    @root_validator(skip_on_failure=True)
    def _bulge_positive(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        # A negative bulge must not pinch the chord to zero at r0.
        if values["chord_mode"] == ChordMode.GAUSSIAN_BULGE and values["bulge_beta"] <= -1.0:
            raise ValueError("bulge_beta must exceed -1 so chords stay positive")
        return values


class AirfoilSection(BaseModel):
    """Chord-normalized symmetric 2D section, counter-clockwise from the trailing edge."""
    points: List[Tuple[float, float]]
    closed: bool = True

    class Config:
        allow_mutation = False

    @validator("points")
    def _symmetric(cls, points: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
        point_set = set(points)
        if {(x, -y) for x, y in points} != point_set:
            raise ValueError("section is not symmetric about y=0")
        return points


class Section3D(BaseModel):
    """An airfoil section placed at its spanwise station."""
    station_z: float
    points: List[Tuple[float, float, float]]

    class Config:
        allow_mutation = False

    @validator("points")
    def _on_station(cls, points: List[Tuple[float, float, float]], values: Dict[str, Any]):
        station = values.get("station_z")
        if station is not None and any(p[2] != station for p in points):
            raise ValueError("all points must share station_z")
        return points


class HullParams(BaseModel):
    """Parametric open-top hull."""
    length: float = Field(0.30, gt=0)
    beam: float = Field(0.20, gt=0)
    depth: float = Field(0.10, gt=0)
    wall_thickness: float = Field(0.003, gt=0)
    bow_exponent: float = Field(2.0, ge=1)
    deck_open: bool = True
    bow_segments: int = Field(24, ge=2)

    class Config:
        allow_mutation = False
        extra = "forbid"


class OperatingPoint(BaseModel):
    """Rotational and inflow conditions for a hydrodynamic evaluation."""
    rpm: float = Field(3000.0, gt=0)
    advance_speed_V: float = Field(1.0, ge=0)
    fluid_density: float = Field(1000.0, gt=0)
    kinematic_viscosity: float = Field(1.0e-6, gt=0)

    class Config:
        allow_mutation = False


class StationLoad(BaseModel):
    """Spanwise load at one blade station."""
    r: float
    dT_dr: float
    dQ_dr: float


class HydroResult(BaseModel):
    """Blade-element feedback signal for one design."""
    thrust: float
    torque: float
    efficiency: float
    station_loads: List[StationLoad] = Field(default_factory=list)


class StressState(BaseModel):
    """Principal stresses in Pa."""
    sigma1: float = 0.0
    sigma2: float = 0.0
    sigma3: float = 0.0


class Bound(BaseModel):
    """Search interval for one design parameter."""
    lower: float
    upper: float
    tunable: bool = True

    @root_validator(skip_on_failure=True)
    def _ordered(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        if values["tunable"] and not values["lower"] < values["upper"]:
            raise ValueError("lower must be below upper for a tunable bound")
        return values


TUNABLE_FIELDS = [
    name for name, field in BladeDesignParams.__fields__.items()
    if isinstance(field.type_, type) and issubclass(field.type_, float)
]


class ParameterBounds(BaseModel):
    """Feasible search box over the float fields of BladeDesignParams."""
    bounds: Dict[str, Bound] = Field(default_factory=dict)

    @validator("bounds")
    def _known_fields(cls, bounds: Dict[str, Bound]) -> Dict[str, Bound]:
        unknown = sorted(set(bounds) - set(TUNABLE_FIELDS))
        if unknown:
            raise ValueError(f"bounds reference non-tunable fields: {unknown}")
        return bounds

    def tunable_fields(self) -> List[str]:
        """Tunable field names in BladeDesignParams declaration order."""
        return [name for name in TUNABLE_FIELDS if name in self.bounds and self.bounds[name].tunable]

    def contains(self, params: BladeDesignParams) -> bool:
        for name, bound in self.bounds.items():
            value = getattr(params, name)
            if value < bound.lower or value > bound.upper:
                return False
        return True


class ObjectiveTarget(str, Enum):
    """Quantity the optimizer maximizes."""
    MAX_EFFICIENCY = "max_efficiency"
    MAX_THRUST = "max_thrust"


class ObjectiveConfig(BaseModel):
    """Objective and constraints binding the optimizer. A zero constraint is disabled."""
    target: ObjectiveTarget = ObjectiveTarget.MAX_EFFICIENCY
    min_thrust_N: float = Field(2.0, ge=0)
    max_root_stress_Pa: float = Field(40.0e6, ge=0)
    penalty_weight: float = Field(10.0, gt=0)


class IterationRecord(BaseModel):
    """One evaluated design in the refinement history."""
    iteration_n: int
    params_Pn: BladeDesignParams
    feedback_Rn: HydroResult
    objective_value: float
    accepted: bool


class CommandKind(str, Enum):
    """Motion commands understood by the firmware."""
    FORWARD = "forward"
    BACKWARD = "backward"
    LEFT = "left"
    RIGHT = "right"
    STOP = "stop"


class ControlCommand(BaseModel):
    """A parsed serial command."""
    kind: CommandKind


class MotorState(BaseModel):
    """H-bridge inputs and PWM level for one motor channel."""
    in1: bool = False
    in2: bool = False
    pwm_level: conint(ge=0, le=255) = 0
    duty: Optional[float] = None

    class Config:
        allow_mutation = False

    @validator("in2")
    def _no_shoot_through(cls, in2: bool, values: Dict[str, Any]) -> bool:
        if in2 and values.get("in1"):
            raise ValueError("in1 and in2 both high would short the H-bridge")
        return in2

    @validator("duty", always=True)
    def _duty_from_level(cls, duty: Optional[float], values: Dict[str, Any]) -> float:
        level = values.get("pwm_level")
        if level is None:
            return duty
        expected = level / 255
        if duty is not None and abs(duty - expected) > 1e-12:
            raise ValueError(f"duty {duty} inconsistent with pwm_level {level}")
        return expected


class TraceChannel(str, Enum):
    """Logic analyzer channels."""
    A_IN1 = "A_IN1"
    A_IN2 = "A_IN2"
    A_PWM = "A_PWM"
    B_IN1 = "B_IN1"
    B_IN2 = "B_IN2"
    B_PWM = "B_PWM"


class TraceEvent(BaseModel):
    """A level change captured on one channel."""
    time_us: conint(ge=0)
    channel: TraceChannel
    value: conint(ge=0, le=1)

    class Config:
        allow_mutation = False


class Stage(str, Enum):
    """Pipeline stages in canonical order."""
    GENERATE_GEOMETRY = "generate_geometry"
    ASSEMBLE_MESH = "assemble_mesh"
    EVALUATE = "evaluate"
    OPTIMIZE = "optimize"
    BUOYANCY_CHECK = "buoyancy_check"
    CONTROL_SIM = "control_sim"


STAGE_ORDER = list(Stage)

# Each stage must follow its data dependency when both are planned.
STAGE_DEPENDENCIES = {
    Stage.ASSEMBLE_MESH: Stage.GENERATE_GEOMETRY,
    Stage.EVALUATE: Stage.ASSEMBLE_MESH,
    Stage.OPTIMIZE: Stage.EVALUATE,
}


class Checkpoint(str, Enum):
    """Human involvement before a stage runs."""
    NONE = "none"
    HUMAN_REVIEW = "human_review"


class FunctionalRequirements(BaseModel):
    """What the vessel must do."""
    required_thrust_N: float = Field(..., ge=0)
    cruise_speed_mps: float = Field(..., ge=0)
    payload_mass_kg: float = Field(..., gt=0)
    rpm: Optional[float] = Field(None, gt=0)


class MaxDimensions(BaseModel):
    """Envelope limits in meters."""
    hull_length: float
    hull_beam: float
    hull_depth: float
    propeller_diameter: float


class DesignConstraints(BaseModel):
    """Limits the design must respect."""
    max_dimensions_m: MaxDimensions
    max_stress_Pa: float = Field(..., gt=0)
    water_density: float = Field(1000.0, gt=0)
    hull_material_density: float = Field(1240.0, gt=0)
    hull_wall_thickness_m: float = Field(0.003, gt=0)


class OverrideDirective(BaseModel):
    """Human feedback: set a plan field after planning."""
    path: str
    value: Any


class DesignSpec(BaseModel):
    """Functional requirements, constraints and human feedback for one design."""
    name: str = "design"
    functional_requirements: FunctionalRequirements
    constraints: DesignConstraints
    human_feedback: List[OverrideDirective] = Field(default_factory=list)


class PipelinePlan(BaseModel):
    """Deterministic realization of a design spec as an ordered stage chain."""
    name: str
    stages: List[Stage]
    initial_params: BladeDesignParams
    bounds: ParameterBounds
    hull: HullParams
    objective: ObjectiveConfig
    operating_point: OperatingPoint
    checkpoints: Dict[Stage, Checkpoint] = Field(default_factory=dict)
    payload_mass_kg: float = Field(..., gt=0)
    water_density: float = Field(1000.0, gt=0)
    hull_material_density: float = Field(1240.0, gt=0)
    optimizer_budget: int = Field(200, ge=0)
    control_commands: List[CommandKind] = Field(default_factory=lambda: list(CommandKind))
    pwm_freq_hz: float = Field(490.0, gt=0)
    trace_duration_ms: float = Field(50.0, gt=0)
    stl_mode: StlMode = StlMode.BINARY
    rules_applied: List[str] = Field(default_factory=list)
    overrides_applied: List[str] = Field(default_factory=list)

    @validator("stages")
    def _dependency_order(cls, stages: List[Stage]) -> List[Stage]:
        if len(set(stages)) != len(stages):
            raise ValueError("stages must not repeat")
        position = {stage: index for index, stage in enumerate(stages)}
        for stage, dependency in STAGE_DEPENDENCIES.items():
            if stage in position and dependency in position and position[dependency] > position[stage]:
                raise ValueError(f"{dependency.value} must run before {stage.value}")
        return stages

    @validator("checkpoints")
    def _checkpoints_reference_stages(cls, checkpoints: Dict[Stage, Checkpoint], values: Dict[str, Any]):
        stages = values.get("stages") or []
        stray = [stage.value for stage in checkpoints if stage not in stages]
        if stray:
            raise ValueError(f"checkpoints reference unplanned stages: {stray}")
        return checkpoints

    def reviewed_stages(self) -> List[Stage]:
        """Stages gated by a human review, in plan order."""
        return [s for s in self.stages if self.checkpoints.get(s) == Checkpoint.HUMAN_REVIEW]


class AmdLevel(BaseModel):
    """Design-process autonomy level."""
    level: conint(ge=0, le=4)
    rationale: str


class StageStatus(str, Enum):
    """Outcome of one pipeline stage."""
    PENDING = "pending"
    SUCCEEDED = "succeeded"
    FAILED = "failed"
    SKIPPED = "skipped"
    AWAITING_REVIEW = "awaiting_review"


class RunStatus(str, Enum):
    """Outcome of a pipeline run."""
    COMPLETED = "completed"
    FAILED = "failed"
    PAUSED = "paused"


class StageResult(BaseModel):
    """Status, metrics and artifacts of one stage."""
    stage: Stage
    status: StageStatus = StageStatus.PENDING
    message: Optional[str] = None
    metrics: Dict[str, Any] = Field(default_factory=dict)
    artifacts: List[str] = Field(default_factory=list)


class RunReport(BaseModel):
    """Final report of a pipeline run."""
    plan_name: str
    plan_digest: str
    status: RunStatus
    generated_at: datetime = Field(default_factory=datetime.utcnow)
    amd_level: AmdLevel
    stages: List[StageResult] = Field(default_factory=list)
    rules_applied: List[str] = Field(default_factory=list)
    overrides_applied: List[str] = Field(default_factory=list)


class EvaluateRequest(BaseModel):
    """Request body for a hydrodynamic evaluation."""
    params: BladeDesignParams = Field(default_factory=BladeDesignParams)
    operating_point: OperatingPoint = Field(default_factory=OperatingPoint)
