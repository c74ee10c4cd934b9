"""
Tests for serial command parsing, motor mapping and PWM traces.
"""

import pytest

from src.control.motor_control import (
    REPORTED_CHANNEL,
    SerialCommandParser,
    command_to_motor_states,
    differential_steer,
    parse_command,
    steer_to_motor_states,
)
from src.control.pwm_trace import (
    export_trace_csv,
    generate_pwm_trace,
    import_trace_csv,
    measure_duty,
    simulate_script,
)
from src.models.errors import CommandParseError, DomainError, InsufficientDataError
from src.models.schema import CommandKind, ControlCommand, MotorState, TraceChannel, TraceEvent

EXPECTED_DUTY_PCT = {
    CommandKind.FORWARD: 39.2,
    CommandKind.BACKWARD: 31.4,
    CommandKind.LEFT: 58.8,
    CommandKind.RIGHT: 15.7,
}


def _square_wave(channel, period_us, high_us, periods):
    events = []
    for k in range(periods):
        events.append(TraceEvent(time_us=k * period_us, channel=channel, value=1))
        events.append(TraceEvent(time_us=k * period_us + high_us, channel=channel, value=0))
    return events


@pytest.mark.parametrize("text,kind", [
    ("forward", CommandKind.FORWARD),
    ("BACKWARD\n", CommandKind.BACKWARD),
    ("Left\r\n", CommandKind.LEFT),
    ("right", CommandKind.RIGHT),
    ("stop\n", CommandKind.STOP),
])
def test_parse_command(text, kind):
    """Test case-insensitive parsing with line terminators."""
    assert parse_command(text) == ControlCommand(kind=kind)


def test_parse_empty_and_unknown():
    """Test empty frames and unknown tokens."""
    assert parse_command("") is None
    assert parse_command("\n") is None

    with pytest.raises(CommandParseError) as excinfo:
        parse_command("jump\n")
    assert excinfo.value.token == "jump"


def test_serial_parser_buffers_partial_frames():
    """Test that commands are emitted only on complete frames."""
    parser = SerialCommandParser()

    assert parser.feed("forw") == []
    assert parser.pending == "forw"
    assert parser.feed("ard\n\nle") == [ControlCommand(kind=CommandKind.FORWARD)]
    assert parser.feed("ft\nstop\n") == [
        ControlCommand(kind=CommandKind.LEFT),
        ControlCommand(kind=CommandKind.STOP),
    ]
    assert parser.pending == ""


def test_motor_table():
    """Test H-bridge polarity and levels per command."""
    a, b = command_to_motor_states(ControlCommand(kind=CommandKind.FORWARD))
    assert (a.in1, a.in2, a.pwm_level) == (True, False, 100)
    assert b == a

    a, b = command_to_motor_states(ControlCommand(kind=CommandKind.BACKWARD))
    assert (a.in1, a.in2, a.pwm_level) == (False, True, 80)

    a, b = command_to_motor_states(ControlCommand(kind=CommandKind.LEFT))
    assert b.pwm_level > a.pwm_level

    a, b = command_to_motor_states(ControlCommand(kind=CommandKind.STOP))
    assert a.pwm_level == b.pwm_level == 0
    assert not (a.in1 or a.in2 or b.in1 or b.in2)


def test_motor_state_rejects_shoot_through():
    """Test that both H-bridge inputs high is invalid."""
    with pytest.raises(ValueError):
        MotorState(in1=True, in2=True, pwm_level=10)


def test_differential_steer():
    """Test signed duties from linear and angular demands."""
    assert differential_steer(0.0, 1.0) == (-1.0, 1.0)
    assert differential_steer(0.5, 0.25) == (0.25, 0.75)
    assert differential_steer(1.0, 0.5) == (0.5, 1.0)

    a, b = differential_steer(0.0, 0.3)
    assert differential_steer(0.0, -0.3) == (b, a)

    with pytest.raises(DomainError):
        differential_steer(1.5, 0.0)
    with pytest.raises(DomainError):
        differential_steer(0.0, -1.01)


def test_steer_to_motor_states():
    """Test polarity and level from a steering demand."""
    a, b = steer_to_motor_states(0.0, 1.0)
    assert (a.in1, a.in2, a.pwm_level) == (False, True, 255)
    assert (b.in1, b.in2, b.pwm_level) == (True, False, 255)

    a, b = steer_to_motor_states(0.0, 0.0)
    assert a.pwm_level == b.pwm_level == 0


@pytest.mark.parametrize("kind", list(EXPECTED_DUTY_PCT))
def test_reported_duty_cycles(kind):
    """Test the measured duty of each motion command."""
    trace = generate_pwm_trace(command_to_motor_states(ControlCommand(kind=kind)), 50, 490)
    duty_pct = 100 * measure_duty(trace, REPORTED_CHANNEL)
    assert abs(duty_pct - EXPECTED_DUTY_PCT[kind]) <= 0.1


def test_trace_layout():
    """Test ordering, initial levels and edge spacing."""
    states = command_to_motor_states(ControlCommand(kind=CommandKind.FORWARD))
    trace = generate_pwm_trace(states, 50, 490)

    times = [e.time_us for e in trace]
    assert times == sorted(times)
    assert all(e.time_us < 50_000 for e in trace)

    initial = {e.channel: e.value for e in trace if e.time_us == 0}
    assert initial[TraceChannel.A_IN1] == 1
    assert initial[TraceChannel.A_IN2] == 0
    assert initial[TraceChannel.B_PWM] == 1

    rises = [e.time_us for e in trace if e.channel == TraceChannel.A_PWM and e.value == 1]
    assert len(rises) == 25
    assert rises[1] == 2040
    assert all(2040 <= b - a <= 2041 for a, b in zip(rises, rises[1:]))


def test_constant_channels():
    """Test stopped and fully driven PWM channels."""
    off = MotorState(in1=False, in2=False, pwm_level=0)
    full = MotorState(in1=True, in2=False, pwm_level=255)
    trace = generate_pwm_trace((off, full), 50, 490)

    assert [e for e in trace if e.channel == TraceChannel.A_PWM] == [
        TraceEvent(time_us=0, channel=TraceChannel.A_PWM, value=0)
    ]
    assert measure_duty(trace, TraceChannel.A_PWM) == 0.0
    assert measure_duty(trace, TraceChannel.B_PWM) == 1.0


def test_first_pulse_delay_is_excluded():
    """Test that a stretched first pulse does not bias the measurement."""
    states = command_to_motor_states(ControlCommand(kind=CommandKind.LEFT))
    plain = generate_pwm_trace(states, 50, 490)
    delayed = generate_pwm_trace(states, 50, 490, first_pulse_delay_us=300)

    first_fall = [e.time_us for e in delayed if e.channel == TraceChannel.B_PWM and e.value == 0][0]
    plain_fall = [e.time_us for e in plain if e.channel == TraceChannel.B_PWM and e.value == 0][0]
    assert first_fall == plain_fall + 300
    assert measure_duty(delayed, TraceChannel.B_PWM) == measure_duty(plain, TraceChannel.B_PWM)


def test_measure_duty_square_wave():
    """Test a synthetic 25 % wave over ten periods."""
    trace = _square_wave(TraceChannel.A_PWM, 1000, 250, 10)
    assert measure_duty(trace, TraceChannel.A_PWM) == 0.25


def test_measure_duty_needs_periods():
    """Test that fewer than two complete periods is an error."""
    with pytest.raises(InsufficientDataError):
        measure_duty(_square_wave(TraceChannel.A_PWM, 1000, 250, 2), TraceChannel.A_PWM)
    with pytest.raises(InsufficientDataError):
        measure_duty([], TraceChannel.A_PWM)
    short = generate_pwm_trace(command_to_motor_states(ControlCommand(kind=CommandKind.FORWARD)), 3, 490)
    with pytest.raises(InsufficientDataError):
        measure_duty(short, TraceChannel.A_PWM)


def test_measure_duty_two_complete_periods():
    """Test that two complete periods suffice and the first one is left out."""
    start_up = [
        TraceEvent(time_us=0, channel=TraceChannel.A_PWM, value=1),
        TraceEvent(time_us=900, channel=TraceChannel.A_PWM, value=0),
    ]
    steady = _square_wave(TraceChannel.A_PWM, 1000, 250, 3)[2:]

    assert measure_duty(start_up + steady, TraceChannel.A_PWM) == pytest.approx(0.25)


def test_invalid_trace_requests():
    """Test non-positive duration and frequency."""
    states = command_to_motor_states(ControlCommand(kind=CommandKind.FORWARD))
    with pytest.raises(DomainError):
        generate_pwm_trace(states, 0, 490)
    with pytest.raises(DomainError):
        generate_pwm_trace(states, 50, 0)


def test_trace_csv():
    """Test the CSV header, line endings and import."""
    states = command_to_motor_states(ControlCommand(kind=CommandKind.RIGHT))
    trace = generate_pwm_trace(states, 20, 490)
    data = export_trace_csv(trace)

    assert data.startswith(b"time_us,channel,value\n")
    assert b"\r" not in data
    assert import_trace_csv(data) == trace


def test_simulate_script():
    """Test a script of commands with a blank line."""
    segments = simulate_script("forward\n\nleft\nstop\n", 50, 490)

    assert [s["command"].kind for s in segments] == [CommandKind.FORWARD, CommandKind.LEFT, CommandKind.STOP]
    assert [s["line"] for s in segments] == [1, 3, 4]
    assert segments[1]["duty"][TraceChannel.B_PWM] == pytest.approx(0.588, abs=1e-3)
    assert segments[2]["duty"][TraceChannel.A_PWM] == 0.0

    with pytest.raises(CommandParseError):
        simulate_script("forward\nwarp\n")
