"""
Iterative design refinement as a bounded coordinate pattern search.

Each refinement step tries +/- step * range along every tunable coordinate
in declaration order, moves to the first strictly improving trial point and halves
the step when no trial improves. The search is deterministic: trial order is
fixed and parallel evaluation never changes which trial is accepted.
"""

import io
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

from loguru import logger
from pydantic import ValidationError

from src.analysis.hydrodynamics import bem_evaluate
from src.analysis.stress import root_bending_stress
from src.config import OPTIMIZER_MAX_WORKERS
from src.models.errors import ConfigurationError
from src.models.schema import (
    BladeDesignParams,
    HydroResult,
    IterationRecord,
    ObjectiveConfig,
    ObjectiveTarget,
    OperatingPoint,
    ParameterBounds,
)

INITIAL_STEP = 0.25
MIN_STEP = 1e-4

Evaluator = Callable[[BladeDesignParams], Tuple[HydroResult, float]]


def objective(result: HydroResult, stress: float, cfg: ObjectiveConfig) -> float:
    """
    Penalized objective; larger is better.

    base - w * (thrust shortfall / min_thrust + stress excess / max_stress),
    a zero constraint contributing no penalty.
    """
    base = result.efficiency if cfg.target == ObjectiveTarget.MAX_EFFICIENCY else result.thrust

    penalty = 0.0
    if cfg.min_thrust_N > 0:
        penalty += max(0.0, cfg.min_thrust_N - result.thrust) / cfg.min_thrust_N
    if cfg.max_root_stress_Pa > 0:
        penalty += max(0.0, stress - cfg.max_root_stress_Pa) / cfg.max_root_stress_Pa
    return base - cfg.penalty_weight * penalty


class HydroEvaluator:
    """Blade-element feedback plus root stress for one operating point."""

    def __init__(self, op: OperatingPoint):
        self.op = op

    def __call__(self, params: BladeDesignParams) -> Tuple[HydroResult, float]:
        result = bem_evaluate(params, self.op)
        # No thrust, no bending load: only the thrust penalty applies.
        stress = root_bending_stress(result, params) if result.thrust > 0 else 0.0
        return result, stress


class SearchState:
    """Mutable bookkeeping of one optimization run."""

    def __init__(
        self,
        bounds: ParameterBounds,
        cfg: ObjectiveConfig,
        evaluator: Evaluator,
        budget: int,
        max_workers: int = 1
    ):
        self.bounds = bounds
        self.cfg = cfg
        self.evaluator = evaluator
        self.budget = budget
        self.max_workers = max(1, max_workers)
        self.step = INITIAL_STEP
        self.best_value = float("-inf")
        self.history: List[IterationRecord] = []

    @property
    def evaluations(self) -> int:
        return len(self.history)

    @property
    def remaining(self) -> int:
        # The starting point is evaluated outside the budget.
        return self.budget + 1 - self.evaluations

    @property
    def converged(self) -> bool:
        return self.step < MIN_STEP

    def evaluate(self, candidates: Sequence[BladeDesignParams]) -> List[Tuple[HydroResult, float]]:
        if self.max_workers == 1 or len(candidates) == 1:
            return [self.evaluator(c) for c in candidates]
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            return list(pool.map(self.evaluator, candidates))

    def record(self, params: BladeDesignParams, result: HydroResult, value: float, accepted: bool) -> None:
        self.history.append(IterationRecord(
            iteration_n=self.evaluations,
            params_Pn=params,
            feedback_Rn=result,
            objective_value=value,
            accepted=accepted
        ))


def _trials(params: BladeDesignParams, state: SearchState) -> List[BladeDesignParams]:
    """Valid, in-bounds trial points in fixed coordinate order, + before -."""
    trials = []
    current = params.dict()
    for name in state.bounds.tunable_fields():
        bound = state.bounds.bounds[name]
        delta = state.step * (bound.upper - bound.lower)
        for sign in (1.0, -1.0):
            value = min(bound.upper, max(bound.lower, current[name] + sign * delta))
            if value == current[name]:
                continue
            try:
                trials.append(BladeDesignParams(**{**current, name: value}))
            except ValidationError as e:
                logger.debug(f"Skipping invalid trial {name}={value}: {e.errors()[0]['msg']}")
    return trials


def refine(P_n: BladeDesignParams, R_n: HydroResult, state: SearchState) -> BladeDesignParams:
    """
    One pattern-search step from P_n.

    Args:
        P_n: Current design
        R_n: Feedback for the current design
        state: Search state, updated in place

    Returns:
        The next design, P_n itself when no trial improved
    """
    if state.converged or not state.bounds.tunable_fields():
        return P_n

    trials = _trials(P_n, state)
    logger.debug(f"Refining from T={R_n.thrust:.4f} N with step {state.step:.6f}, {len(trials)} trials")

    for start in range(0, len(trials), state.max_workers):
        if state.remaining <= 0:
            return P_n
        chunk = trials[start:start + min(state.max_workers, state.remaining)]
        accepted: Optional[BladeDesignParams] = None
        for candidate, (result, stress) in zip(chunk, state.evaluate(chunk)):
            value = objective(result, stress, state.cfg)
            improves = accepted is None and value > state.best_value
            state.record(candidate, result, value, improves)
            if improves:
                accepted = candidate
                state.best_value = value
        if accepted is not None:
            return accepted

    if state.remaining > 0:
        state.step /= 2
    return P_n


def optimize(
    P_0: BladeDesignParams,
    bounds: ParameterBounds,
    cfg: ObjectiveConfig,
    op: OperatingPoint,
    budget: int,
    evaluator: Optional[Evaluator] = None,
    max_workers: int = OPTIMIZER_MAX_WORKERS
) -> List[IterationRecord]:
    """
    Refine a starting design until the budget is spent or the step collapses.

    Args:
        P_0: Starting design, inside the bounds
        bounds: Search box
        cfg: Objective and constraints
        op: Operating point for the default evaluator
        budget: Number of evaluations after the starting point
        evaluator: Optional replacement for the blade-element evaluator
        max_workers: Trial evaluation pool width

    Returns:
        Every evaluation in order; the last accepted record is the best design
    """
    if budget < 0:
        raise ConfigurationError(f"budget must be >= 0, got {budget}")
    if not bounds.contains(P_0):
        raise ConfigurationError("starting design lies outside the parameter bounds")

    state = SearchState(bounds, cfg, evaluator or HydroEvaluator(op), budget, max_workers)
    result, stress = state.evaluate([P_0])[0]
    state.best_value = objective(result, stress, cfg)
    state.record(P_0, result, state.best_value, True)

    current, feedback = P_0, result
    while state.remaining > 0 and not state.converged and bounds.tunable_fields():
        current = refine(current, feedback, state)
        feedback = best_record(state.history).feedback_Rn

    accepted = sum(1 for record in state.history if record.accepted) - 1
    logger.info(
        f"Optimization finished: {state.evaluations} evaluations, {accepted} accepted moves, "
        f"best objective {state.best_value:.6f}"
    )
    return state.history


def best_record(history: Sequence[IterationRecord]) -> IterationRecord:
    """The last accepted record, which carries the best objective."""
    return [record for record in history if record.accepted][-1]


def export_history_csv(history: Sequence[IterationRecord], fields: Sequence[str]) -> bytes:
    """Delimited table: iteration, parameters, thrust, torque, efficiency, objective, accepted."""
    out = io.StringIO()
    out.write(",".join(["iteration", *fields, "thrust_N", "torque_Nm", "efficiency", "objective", "accepted"]) + "\n")
    for record in history:
        values = [getattr(record.params_Pn, name) for name in fields]
        feedback = record.feedback_Rn
        cells = [str(record.iteration_n)]
        cells += [f"{v:.9e}" for v in values]
        cells += [f"{v:.9e}" for v in (feedback.thrust, feedback.torque, feedback.efficiency, record.objective_value)]
        cells.append("1" if record.accepted else "0")
        out.write(",".join(cells) + "\n")
    return out.getvalue().encode("ascii")
