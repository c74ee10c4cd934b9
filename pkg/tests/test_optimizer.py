"""
Tests for the pattern-search optimizer.
"""

import pytest

from src.models.errors import ConfigurationError
from src.models.schema import (
    BladeDesignParams,
    Bound,
    HydroResult,
    ObjectiveConfig,
    ObjectiveTarget,
    OperatingPoint,
    ParameterBounds,
)
from src.optimizer.pattern_search import (
    INITIAL_STEP,
    MIN_STEP,
    SearchState,
    best_record,
    export_history_csv,
    objective,
    optimize,
    refine,
)

TARGET = {
    "chord_root_Cr": 0.0113,
    "chord_tip_Ct": 0.0051,
    "pitch_root_ar": 0.62,
    "pitch_tip_at": 0.41,
}


@pytest.fixture
def bounds():
    """Search box over four tunable parameters."""
    return ParameterBounds(bounds={
        "chord_root_Cr": Bound(lower=0.006, upper=0.014),
        "chord_tip_Ct": Bound(lower=0.004, upper=0.012),
        "pitch_root_ar": Bound(lower=0.10, upper=0.80),
        "pitch_tip_at": Bound(lower=0.05, upper=0.60),
    })


@pytest.fixture
def surrogate(bounds):
    """Negative squared distance to TARGET, normalized by each range."""
    def evaluate(params):
        score = 0.0
        for name, target in TARGET.items():
            bound = bounds.bounds[name]
            score -= ((getattr(params, name) - target) / (bound.upper - bound.lower)) ** 2
        return HydroResult(thrust=0.0, torque=0.0, efficiency=score), 0.0
    return evaluate


@pytest.fixture
def unconstrained():
    """Objective with both constraints disabled."""
    return ObjectiveConfig(min_thrust_N=0.0, max_root_stress_Pa=0.0)


def _pitch_only(peak):
    """One-coordinate box over pitch_root_ar and a concave score peaking at peak."""
    bounds = ParameterBounds(bounds={"pitch_root_ar": Bound(lower=0.10, upper=0.80)})

    def evaluate(params):
        return HydroResult(thrust=0.0, torque=0.0, efficiency=-(params.pitch_root_ar - peak) ** 2), 0.0
    return bounds, evaluate


def _started(bounds, cfg, evaluator, budget, start):
    state = SearchState(bounds, cfg, evaluator, budget)
    result, stress = evaluator(start)
    state.best_value = objective(result, stress, cfg)
    state.record(start, result, state.best_value, True)
    return state, result


def _run(bounds, cfg, evaluator, budget, max_workers=1):
    return optimize(
        BladeDesignParams(),
        bounds,
        cfg,
        OperatingPoint(),
        budget,
        evaluator=evaluator,
        max_workers=max_workers
    )


def test_surrogate_converges(bounds, unconstrained, surrogate):
    """Test that the search finds the surrogate optimum within 500 evaluations."""
    history = _run(bounds, unconstrained, surrogate, budget=499)
    best = best_record(history).params_Pn

    assert len(history) <= 500
    for name, target in TARGET.items():
        bound = bounds.bounds[name]
        assert abs(getattr(best, name) - target) <= 1e-3 * (bound.upper - bound.lower)


def test_best_so_far_is_monotone(bounds, unconstrained, surrogate):
    """Test that accepted objectives strictly increase."""
    history = _run(bounds, unconstrained, surrogate, budget=300)
    accepted = [r.objective_value for r in history if r.accepted]

    assert history[0].accepted
    assert all(b > a for a, b in zip(accepted, accepted[1:]))
    assert best_record(history).objective_value == max(r.objective_value for r in history)


def test_histories_are_reproducible(bounds, unconstrained, surrogate):
    """Test bitwise-identical histories across runs."""
    first = _run(bounds, unconstrained, surrogate, budget=200)
    second = _run(bounds, unconstrained, surrogate, budget=200)
    assert [r.dict() for r in first] == [r.dict() for r in second]


def test_parallel_trials_accept_the_same_designs(bounds, unconstrained, surrogate):
    """Test that a worker pool changes cost, not the accepted path."""
    serial = _run(bounds, unconstrained, surrogate, budget=5000)
    pooled = _run(bounds, unconstrained, surrogate, budget=5000, max_workers=4)

    def accepted(history):
        return [r.params_Pn for r in history if r.accepted]

    assert accepted(serial) == accepted(pooled)


def test_iterations_are_numbered(bounds, unconstrained, surrogate):
    """Test iteration numbering and parameter bounds in the history."""
    history = _run(bounds, unconstrained, surrogate, budget=50)

    assert [r.iteration_n for r in history] == list(range(len(history)))
    assert len(history) == 51
    for record in history:
        assert bounds.contains(record.params_Pn)


def test_zero_budget_evaluates_start_only(bounds, unconstrained, surrogate):
    """Test that a zero budget only scores the starting design."""
    history = _run(bounds, unconstrained, surrogate, budget=0)
    assert len(history) == 1
    assert history[0].params_Pn == BladeDesignParams()


def test_no_tunable_fields(unconstrained, surrogate):
    """Test that frozen bounds leave the design unchanged."""
    frozen = ParameterBounds(bounds={"chord_root_Cr": Bound(lower=0.010, upper=0.010, tunable=False)})
    history = _run(frozen, unconstrained, surrogate, budget=20)
    assert len(history) == 1


def test_invalid_configuration(bounds, unconstrained, surrogate):
    """Test negative budgets and out-of-bounds starts."""
    with pytest.raises(ConfigurationError):
        _run(bounds, unconstrained, surrogate, budget=-1)
    with pytest.raises(ConfigurationError):
        optimize(
            BladeDesignParams(chord_root_Cr=0.02, hub_length=0.03),
            bounds,
            unconstrained,
            OperatingPoint(),
            10,
            evaluator=surrogate
        )


def test_objective_penalties():
    """Test thrust-shortfall and stress-excess penalties."""
    cfg = ObjectiveConfig(min_thrust_N=2.0, max_root_stress_Pa=40e6, penalty_weight=10.0)
    result = HydroResult(thrust=1.0, torque=0.1, efficiency=0.5)

    assert objective(result, 20e6, cfg) == pytest.approx(0.5 - 10.0 * 0.5)
    assert objective(result, 60e6, cfg) == pytest.approx(0.5 - 10.0 * (0.5 + 0.5))

    thrust_cfg = ObjectiveConfig(target=ObjectiveTarget.MAX_THRUST, min_thrust_N=0.0, max_root_stress_Pa=0.0)
    assert objective(result, 1e9, thrust_cfg) == 1.0


def test_real_evaluator_improves_design(bounds):
    """Test a short run against the blade-element evaluator."""
    history = optimize(
        BladeDesignParams(),
        bounds,
        ObjectiveConfig(),
        OperatingPoint(rpm=3000, advance_speed_V=1.0),
        40
    )
    assert best_record(history).objective_value >= history[0].objective_value


def test_export_history_csv(bounds, unconstrained, surrogate):
    """Test the history table layout."""
    history = _run(bounds, unconstrained, surrogate, budget=10)
    fields = bounds.tunable_fields()
    lines = export_history_csv(history, fields).decode("ascii").splitlines()

    assert lines[0] == "iteration,chord_root_Cr,chord_tip_Ct,pitch_root_ar,pitch_tip_at,thrust_N,torque_Nm,efficiency,objective,accepted"
    assert len(lines) == len(history) + 1
    assert lines[1].startswith("0,")
    assert lines[1].endswith(",1")


def test_refine_takes_first_improving_move(unconstrained):
    """Test a single concave coordinate: the + move is accepted without trying -."""
    bounds, evaluate = _pitch_only(0.62)
    start = BladeDesignParams()
    state, result = _started(bounds, unconstrained, evaluate, 10, start)

    moved = refine(start, result, state)

    assert moved.pitch_root_ar == pytest.approx(0.40 + INITIAL_STEP * 0.70)
    assert state.evaluations == 2
    assert state.history[-1].accepted
    assert state.step == INITIAL_STEP


def test_refine_halves_step_without_improvement(unconstrained):
    """Test that a design at the peak stays put and the step halves."""
    bounds, evaluate = _pitch_only(0.40)
    start = BladeDesignParams()
    state, result = _started(bounds, unconstrained, evaluate, 10, start)

    assert refine(start, result, state) == start
    assert state.evaluations == 3
    assert not any(r.accepted for r in state.history[1:])
    assert state.step == INITIAL_STEP / 2


def test_refine_fixed_point_once_converged(unconstrained):
    """Test that a collapsed step returns the design without evaluating."""
    bounds, evaluate = _pitch_only(0.62)
    start = BladeDesignParams()
    state, result = _started(bounds, unconstrained, evaluate, 10, start)
    state.step = MIN_STEP / 2

    assert refine(start, result, state) == start
    assert state.evaluations == 1


def test_refine_without_tunable_fields(unconstrained, surrogate):
    """Test that frozen bounds make refine a no-op."""
    frozen = ParameterBounds(bounds={"pitch_root_ar": Bound(lower=0.40, upper=0.40, tunable=False)})
    start = BladeDesignParams()
    state, result = _started(frozen, unconstrained, surrogate, 10, start)

    assert refine(start, result, state) == start
    assert state.evaluations == 1
    assert state.step == INITIAL_STEP


def test_optimal_start_accepts_no_moves(unconstrained):
    """Test that an optimal starting design is never left and the step collapses."""
    bounds, evaluate = _pitch_only(0.40)
    history = optimize(BladeDesignParams(), bounds, unconstrained, OperatingPoint(), 50, evaluator=evaluate)

    # 12 halvings take the step from 0.25 below 1e-4, two trials each
    assert len(history) == 1 + 2 * 12
    assert [r.accepted for r in history] == [True] + [False] * 24
    assert best_record(history).params_Pn == BladeDesignParams()
