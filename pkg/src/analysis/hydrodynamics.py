"""
Blade-element hydrodynamic evaluator.

A strip model without induced-velocity iteration: each station sees the
vector sum of advance speed and blade rotation, produces thin-foil lift and
a parabolic drag, and the strips are integrated spanwise with the trapezoid
rule. It is a ranking surrogate for the optimizer, not a CFD substitute.
"""

import math
from typing import Optional

import numpy as np
from loguru import logger

from src.geometry.blade_geometry import chord_at, pitch_at
from src.models.errors import OperatingPointError
from src.models.schema import BladeDesignParams, HydroResult, OperatingPoint, StationLoad

LIFT_SLOPE = 2 * math.pi
STALL_CL = 1.2
PARASITIC_CD = 0.008
INDUCED_CD_FACTOR = 0.01


class BladeElementEvaluator:
    """
    Evaluates thrust, torque and efficiency of a propeller design.
    """

    def __init__(
        self,
        parasitic_cd: float = PARASITIC_CD,
        induced_cd_factor: float = INDUCED_CD_FACTOR,
        stall_cl: float = STALL_CL
    ):
        """
        Initialize the evaluator.

        Args:
            parasitic_cd: Zero-lift drag coefficient
            induced_cd_factor: Coefficient k in Cd = Cd0 + k * Cl^2
            stall_cl: Magnitude cap on the section lift coefficient
        """
        self.parasitic_cd = parasitic_cd
        self.induced_cd_factor = induced_cd_factor
        self.stall_cl = stall_cl

    def evaluate(self, params: BladeDesignParams, op: OperatingPoint) -> HydroResult:
        """
        Integrate section loads over the span.

        Args:
            params: Blade design parameters
            op: Operating point

        Returns:
            Total thrust (N), torque (N m), efficiency and per-station loads
        """
        if op.rpm <= 0:
            raise OperatingPointError(f"rotation rate must be positive, got {op.rpm} rpm")

        omega = 2 * math.pi * op.rpm / 60.0
        V = op.advance_speed_V
        hub_radius = params.hub_diameter / 2

        r = np.linspace(0.0, 1.0, params.n_sections)
        radius = hub_radius + r * params.span_L
        chord = np.array([chord_at(float(ri), params) for ri in r])
        pitch = np.array([pitch_at(float(ri), params) for ri in r])

        tangential = omega * radius
        phi = np.arctan2(V, tangential)
        attack = pitch - phi
        cl = np.clip(LIFT_SLOPE * attack, -self.stall_cl, self.stall_cl)
        cd = self.parasitic_cd + self.induced_cd_factor * cl**2
        dynamic = 0.5 * op.fluid_density * (V**2 + tangential**2) * chord

        # Loads per unit radius for one blade.
        dT = dynamic * (cl * np.cos(phi) - cd * np.sin(phi))
        dQ = dynamic * (cl * np.sin(phi) + cd * np.cos(phi)) * radius

        thrust = params.n_blades * float(np.trapz(dT, radius))
        torque = params.n_blades * float(np.trapz(dQ, radius))
        efficiency = thrust * V / (torque * omega) if V > 0 else 0.0

        loads = [
            StationLoad(r=float(ri), dT_dr=float(t), dQ_dr=float(q))
            for ri, t, q in zip(r, dT, dQ)
        ]
        logger.debug(f"BEM at {op.rpm:.0f} rpm, V={V:.3f} m/s: T={thrust:.4f} N, Q={torque:.5f} N m, eta={efficiency:.4f}")
        return HydroResult(thrust=thrust, torque=torque, efficiency=efficiency, station_loads=loads)


# Singleton instance
blade_element_evaluator = BladeElementEvaluator()


def bem_evaluate(
    params: BladeDesignParams,
    op: OperatingPoint,
    evaluator: Optional[BladeElementEvaluator] = None
) -> HydroResult:
    """Evaluate a design with the shared (or a given) blade-element evaluator."""
    return (evaluator or blade_element_evaluator).evaluate(params, op)
