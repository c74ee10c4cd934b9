"""
Logic-analyzer model: synthesizes IN1/IN2/PWM traces for two motors and
measures duty cycles from captured traces.
"""

import io
import math
from typing import Dict, List, Sequence, Tuple

from loguru import logger

from src.config import DEFAULT_PWM_FREQ_HZ, DEFAULT_TRACE_DURATION_MS
from src.control.motor_control import command_to_motor_states, parse_command
from src.models.errors import DomainError, InsufficientDataError
from src.models.schema import MotorState, TraceChannel, TraceEvent

CSV_HEADER = "time_us,channel,value"
CHANNEL_ORDER = {channel: index for index, channel in enumerate(TraceChannel)}

MOTOR_CHANNELS = (
    (TraceChannel.A_IN1, TraceChannel.A_IN2, TraceChannel.A_PWM),
    (TraceChannel.B_IN1, TraceChannel.B_IN2, TraceChannel.B_PWM),
)


def _append_edge(edges: List[Tuple[int, int]], time_us: int, value: int) -> None:
    """Append a level change, dropping repeats and zero-width pulses."""
    if edges and edges[-1][1] == value:
        return
    if edges and edges[-1][0] == time_us:
        edges.pop()
        if edges:
            return
    edges.append((time_us, value))


def _pwm_edges(state: MotorState, duration_us: float, freq_hz: float, first_pulse_delay_us: float) -> List[Tuple[int, int]]:
    if state.pwm_level == 0:
        return [(0, 0)]
    if state.pwm_level == 255:
        return [(0, 1)]

    period = 1e6 / freq_hz
    high = state.duty * period
    edges: List[Tuple[int, int]] = []
    k = 0
    while k * period < duration_us:
        start = k * period
        # Initialization latency stretches only the first pulse.
        stretch = first_pulse_delay_us if k == 0 else 0.0
        rise = math.floor(start)
        fall = min(math.floor(start + high + stretch), math.floor(start + period) - 1)
        _append_edge(edges, rise, 1)
        if fall < duration_us:
            _append_edge(edges, fall, 0)
        k += 1
    return edges


def generate_pwm_trace(
    states: Tuple[MotorState, MotorState],
    duration_ms: float = DEFAULT_TRACE_DURATION_MS,
    pwm_freq_hz: float = DEFAULT_PWM_FREQ_HZ,
    first_pulse_delay_us: float = 0.0
) -> List[TraceEvent]:
    """
    Synthesize the six logic-analyzer channels for motors A and B.

    IN1/IN2 are sampled once at t = 0. Each PWM channel rises at the start
    of every period and falls after duty * period; edge times are floored to
    whole microseconds.

    Args:
        states: Motor A and motor B states
        duration_ms: Trace length
        pwm_freq_hz: PWM carrier frequency
        first_pulse_delay_us: Extra high time on the first pulse

    Returns:
        Events ordered by time, then channel
    """
    if duration_ms <= 0:
        raise DomainError(f"duration must be positive, got {duration_ms} ms")
    if pwm_freq_hz <= 0:
        raise DomainError(f"PWM frequency must be positive, got {pwm_freq_hz} Hz")

    duration_us = duration_ms * 1000.0
    events = []
    for state, (in1, in2, pwm) in zip(states, MOTOR_CHANNELS):
        events.append(TraceEvent(time_us=0, channel=in1, value=int(state.in1)))
        events.append(TraceEvent(time_us=0, channel=in2, value=int(state.in2)))
        for time_us, value in _pwm_edges(state, duration_us, pwm_freq_hz, first_pulse_delay_us):
            events.append(TraceEvent(time_us=time_us, channel=pwm, value=value))

    events.sort(key=lambda e: (e.time_us, CHANNEL_ORDER[e.channel]))
    return events


def measure_duty(trace: Sequence[TraceEvent], channel: TraceChannel) -> float:
    """
    Duty cycle of one channel over whole periods.

    Periods run from one rising edge to the next. The first complete period
    is treated as start-up and left out of the measurement.

    Raises:
        InsufficientDataError: when the channel is absent or holds fewer than
            two complete periods
    """
    events = sorted((e for e in trace if e.channel == channel), key=lambda e: e.time_us)
    if not events:
        raise InsufficientDataError(f"no events on channel {channel.value}")
    if len(events) == 1:
        return float(events[0].value)

    rises = [i for i, e in enumerate(events) if e.value == 1 and (i == 0 or events[i - 1].value == 0)]
    complete = list(zip(rises[:-1], rises[1:]))
    if len(complete) < 2:
        raise InsufficientDataError(
            f"channel {channel.value} holds {len(complete)} complete periods, need 2"
        )
    periods = complete[1:]

    high_time = 0
    total_time = 0
    for start, stop in periods:
        fall = next(i for i in range(start + 1, stop + 1) if events[i].value == 0)
        high_time += events[fall].time_us - events[start].time_us
        total_time += events[stop].time_us - events[start].time_us
    return high_time / total_time


def export_trace_csv(trace: Sequence[TraceEvent]) -> bytes:
    """CSV with header time_us,channel,value and LF line endings."""
    out = io.StringIO(newline="")
    out.write(CSV_HEADER + "\n")
    for event in sorted(trace, key=lambda e: (e.time_us, CHANNEL_ORDER[e.channel])):
        out.write(f"{event.time_us},{event.channel.value},{event.value}\n")
    return out.getvalue().encode("ascii")


def import_trace_csv(data: bytes) -> List[TraceEvent]:
    """Parse a trace written by export_trace_csv."""
    lines = data.decode("ascii").split("\n")
    if lines[0] != CSV_HEADER:
        raise DomainError(f"unexpected trace header: {lines[0]!r}")
    events = []
    for line in lines[1:]:
        if not line:
            continue
        time_us, channel, value = line.split(",")
        events.append(TraceEvent(time_us=int(time_us), channel=TraceChannel(channel), value=int(value)))
    return events


def simulate_script(
    script: str,
    duration_ms: float = DEFAULT_TRACE_DURATION_MS,
    pwm_freq_hz: float = DEFAULT_PWM_FREQ_HZ,
    first_pulse_delay_us: float = 0.0
) -> List[Dict]:
    """
    Run a command script (one command per line) through the control stack.

    Returns:
        One segment per command with its motor states, trace and measured
        duties per PWM channel
    """
    segments = []
    for line_number, line in enumerate(script.split("\n"), start=1):
        command = parse_command(line)
        if command is None:
            continue
        states = command_to_motor_states(command)
        trace = generate_pwm_trace(states, duration_ms, pwm_freq_hz, first_pulse_delay_us)
        segments.append({
            "line": line_number,
            "command": command,
            "states": states,
            "trace": trace,
            "duty": {
                channel: measure_duty(trace, channel)
                for channel in (TraceChannel.A_PWM, TraceChannel.B_PWM)
            },
        })
        logger.info(f"Simulated '{command.kind.value}' from line {line_number}: {len(trace)} events")
    return segments
