"""
Serial command parsing and differential-drive motor mapping.
"""

from typing import Dict, List, Optional, Tuple

from loguru import logger

from src.models.errors import CommandParseError, DomainError
from src.models.schema import CommandKind, ControlCommand, MotorState, TraceChannel

FORWARD_LEVEL = 100
BACKWARD_LEVEL = 80
OUTER_TURN_LEVEL = 150
INNER_TURN_LEVEL = 40

# Turning toward the slow side: the outer motor runs at the high level.
MOTOR_TABLE: Dict[CommandKind, Tuple[MotorState, MotorState]] = {
    CommandKind.FORWARD: (
        MotorState(in1=True, in2=False, pwm_level=FORWARD_LEVEL),
        MotorState(in1=True, in2=False, pwm_level=FORWARD_LEVEL),
    ),
    CommandKind.BACKWARD: (
        MotorState(in1=False, in2=True, pwm_level=BACKWARD_LEVEL),
        MotorState(in1=False, in2=True, pwm_level=BACKWARD_LEVEL),
    ),
    CommandKind.LEFT: (
        MotorState(in1=True, in2=False, pwm_level=INNER_TURN_LEVEL),
        MotorState(in1=True, in2=False, pwm_level=OUTER_TURN_LEVEL),
    ),
    CommandKind.RIGHT: (
        MotorState(in1=True, in2=False, pwm_level=OUTER_TURN_LEVEL),
        MotorState(in1=True, in2=False, pwm_level=INNER_TURN_LEVEL),
    ),
    CommandKind.STOP: (
        MotorState(in1=False, in2=False, pwm_level=0),
        MotorState(in1=False, in2=False, pwm_level=0),
    ),
}

# Each command is verified on motor B's PWM line.
REPORTED_CHANNEL = TraceChannel.B_PWM


def parse_command(text: str) -> Optional[ControlCommand]:
    """
    Parse one serial frame.

    Args:
        text: Frame contents, optionally with its LF/CRLF terminator

    Returns:
        The command, or None for an empty frame

    Raises:
        CommandParseError: for an unknown token
    """
    token = text.strip()
    if not token:
        return None
    try:
        return ControlCommand(kind=CommandKind(token.lower()))
    except ValueError:
        raise CommandParseError(token) from None


class SerialCommandParser:
    """
    Buffers incoming serial bytes and yields commands for each complete
    LF-terminated frame.
    """

    def __init__(self):
        self._buffer = ""

    def feed(self, chunk: str) -> List[ControlCommand]:
        """Consume a chunk of serial data and return the completed commands."""
        self._buffer += chunk
        *frames, self._buffer = self._buffer.split("\n")
        commands = []
        for frame in frames:
            command = parse_command(frame)
            if command is not None:
                logger.debug(f"Received command: {command.kind.value}")
                commands.append(command)
        return commands

    @property
    def pending(self) -> str:
        """Bytes of an incomplete frame still waiting for its terminator."""
        return self._buffer


def command_to_motor_states(cmd: ControlCommand) -> Tuple[MotorState, MotorState]:
    """H-bridge states for motor A and motor B."""
    return MOTOR_TABLE[cmd.kind]


def differential_steer(linear: float, angular: float) -> Tuple[float, float]:
    """
    Signed duties for motors A and B from normalized linear/angular demands.

    Positive angular speeds up motor B, turning toward motor A's side.
    """
    for name, value in (("linear", linear), ("angular", angular)):
        if value < -1 or value > 1:
            raise DomainError(f"{name} demand {value} outside [-1, 1]")
    duty_a = min(1.0, max(-1.0, linear - angular))
    duty_b = min(1.0, max(-1.0, linear + angular))
    return duty_a, duty_b


def duty_to_motor_state(duty: float) -> MotorState:
    """Sign selects H-bridge polarity, magnitude the 8-bit PWM level."""
    level = round(abs(duty) * 255)
    if level == 0:
        return MotorState(in1=False, in2=False, pwm_level=0)
    if duty > 0:
        return MotorState(in1=True, in2=False, pwm_level=level)
    return MotorState(in1=False, in2=True, pwm_level=level)


def steer_to_motor_states(linear: float, angular: float) -> Tuple[MotorState, MotorState]:
    """Motor states realizing a differential steering demand."""
    duty_a, duty_b = differential_steer(linear, angular)
    return duty_to_motor_state(duty_a), duty_to_motor_state(duty_b)
