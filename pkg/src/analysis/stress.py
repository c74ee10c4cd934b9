"""
Structural stress utilities.
"""

import math

from src.models.errors import StressUndefinedError
from src.models.schema import BladeDesignParams, HydroResult, StressState


def von_mises(s: StressState) -> float:
    """Equivalent stress (Pa) from principal stresses."""
    return math.sqrt(
        0.5 * ((s.sigma1 - s.sigma2) ** 2 + (s.sigma2 - s.sigma3) ** 2 + (s.sigma3 - s.sigma1) ** 2)
    )


def root_bending_stress(result: HydroResult, params: BladeDesignParams) -> float:
    """
    Bending stress at the blade root, treating each blade as a cantilever.

    The blade's share of thrust acts at mid-span; the root section is
    approximated by a rectangle of chord C_r and thickness t_max * C_r.

    Raises:
        StressUndefinedError: if thrust is not positive
    """
    if result.thrust <= 0:
        raise StressUndefinedError(f"root stress needs positive thrust, got {result.thrust} N")

    moment = (result.thrust / params.n_blades) * (0.5 * params.span_L)
    chord = params.chord_root_Cr
    section_modulus = chord * (params.thickness_ratio_tmax * chord) ** 2 / 6
    return moment / section_modulus


def root_von_mises(result: HydroResult, params: BladeDesignParams) -> float:
    """Root bending stress as a uniaxial state through the von Mises criterion."""
    return von_mises(StressState(sigma1=root_bending_stress(result, params)))
