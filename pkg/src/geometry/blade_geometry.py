"""
Parametric blade geometry: spanwise chord/pitch laws, symmetric airfoil
sections and their placement along the blade span.
"""

import math
from typing import List

import numpy as np
from loguru import logger

from src.models.errors import DomainError, DegenerateSectionError
from src.models.schema import (
    AirfoilSection,
    BladeDesignParams,
    ChordMode,
    PitchMode,
    Section3D,
)

# Four-digit symmetric foil polynomial; last term closes the trailing edge.
THICKNESS_COEFFICIENTS = (0.2969, -0.1260, -0.3516, 0.2843, -0.1036)


def normalized_coord(z: float, L: float) -> float:
    """Map a spanwise station z in [0, L] onto r in [0, 1]."""
    if L <= 0:
        raise DomainError(f"blade length must be positive, got {L}")
    if z < 0 or z > L:
        raise DomainError(f"station z={z} outside [0, {L}]")
    return z / L


def _check_unit(r: float) -> None:
    if r < 0 or r > 1:
        raise DomainError(f"normalized coordinate r={r} outside [0, 1]")


def _piecewise_midspan(r: float, root: float, mid: float, tip: float) -> float:
    # Second branch uses (2r - 1) so the law is continuous at r = 0.5.
    if r <= 0.5:
        return root + (mid - root) * (2 * r)
    return mid + (tip - mid) * (2 * r - 1)


def chord_at(r: float, params: BladeDesignParams) -> float:
    """
    Local chord length at normalized span position r.

    Args:
        r: Normalized span coordinate in [0, 1]
        params: Blade design parameters

    Returns:
        Chord in meters
    """
    _check_unit(r)
    root, tip = params.chord_root_Cr, params.chord_tip_Ct

    if params.chord_mode == ChordMode.PIECEWISE_MIDSPAN:
        return _piecewise_midspan(r, root, params.chord_mid_Cm, tip)

    linear = root + (tip - root) * r
    if params.chord_mode == ChordMode.GAUSSIAN_BULGE:
        bulge = params.bulge_beta * math.exp(-params.bulge_gamma * (r - params.bulge_r0) ** 2)
        return linear * (1 + bulge)
    return linear


def pitch_at(r: float, params: BladeDesignParams) -> float:
    """Local pitch angle (radians) at normalized span position r."""
    _check_unit(r)
    root, tip = params.pitch_root_ar, params.pitch_tip_at

    if params.pitch_mode == PitchMode.PIECEWISE_MIDSPAN:
        return _piecewise_midspan(r, root, params.pitch_mid_am, tip)
    return root + (tip - root) * r


def thickness(x: np.ndarray, t_max: float) -> np.ndarray:
    """Half-thickness f(x) of the symmetric section, x in [0, 1]."""
    x = np.asarray(x, dtype=float)
    a0, a1, a2, a3, a4 = THICKNESS_COEFFICIENTS
    return 5 * t_max * (a0 * np.sqrt(x) + a1 * x + a2 * x**2 + a3 * x**3 + a4 * x**4)


def chordwise_stations(n_half: int, cosine_spacing: bool = True) -> np.ndarray:
    """n_half + 1 chordwise positions from leading edge (0) to trailing edge (1)."""
    if cosine_spacing:
        theta = np.linspace(0.0, math.pi, n_half + 1)
        x = (1 - np.cos(theta)) / 2
    else:
        x = np.linspace(0.0, 1.0, n_half + 1)
    x[0], x[-1] = 0.0, 1.0
    return x


def make_airfoil(
    n_points: int,
    t_max: float,
    x0: float,
    cosine_spacing: bool = True
) -> AirfoilSection:
    """
    Build a closed symmetric section shifted so the pitch axis sits at the origin.

    The polyline starts at the trailing edge, runs over the upper surface to
    the leading edge and returns along the lower surface, which makes it
    counter-clockwise. Leading and trailing edges appear once each.

    Args:
        n_points: Total number of section points (even, >= 8)
        t_max: Maximum thickness as a fraction of chord
        x0: Chordwise position of the pitch axis
        cosine_spacing: Cluster points toward the edges

    Returns:
        The airfoil section
    """
    if t_max <= 0:
        raise DegenerateSectionError(f"thickness ratio must be positive, got {t_max}")
    if n_points < 8 or n_points % 2:
        raise DomainError(f"n_points must be an even count >= 8, got {n_points}")
    if x0 < 0 or x0 > 1:
        raise DomainError(f"pitch axis x0={x0} outside [0, 1]")

    n_half = n_points // 2
    x = chordwise_stations(n_half, cosine_spacing)
    y = thickness(x, t_max)
    y[0], y[-1] = 0.0, 0.0

    upper = [(float(xi - x0), float(yi)) for xi, yi in zip(x[::-1], y[::-1])]
    lower = [(float(xi - x0), float(-yi)) for xi, yi in zip(x[1:-1], y[1:-1])]
    return AirfoilSection(points=upper + lower, closed=True)


def transform_section(section: AirfoilSection, z: float, params: BladeDesignParams) -> Section3D:
    """
    Scale, pitch and translate a normalized section to its station z.

    Args:
        section: Chord-normalized airfoil section
        z: Spanwise station in meters
        params: Blade design parameters

    Returns:
        The placed section
    """
    r = normalized_coord(z, params.span_L)
    chord = chord_at(r, params)
    alpha = pitch_at(r, params)
    thickness_scale = 1.0

    xy = np.asarray(section.points, dtype=float)
    X = chord * xy[:, 0]
    Y = chord * thickness_scale * xy[:, 1]

    cos_a, sin_a = math.cos(alpha), math.sin(alpha)
    X_r = X * cos_a - Y * sin_a
    Y_r = X * sin_a + Y * cos_a

    skew_shift = r * params.span_L * math.tan(params.skew_angle)
    rake_shift = -z * math.tan(params.rake_angle)
    X_f = X_r + skew_shift
    Y_f = Y_r + rake_shift

    points = [(float(xf), float(yf), float(z)) for xf, yf in zip(X_f, Y_f)]
    return Section3D(station_z=float(z), points=points)


def generate_blade_sections(params: BladeDesignParams) -> List[Section3D]:
    """Place n_sections airfoil sections uniformly from root to tip."""
    airfoil = make_airfoil(
        params.n_chord_points,
        params.thickness_ratio_tmax,
        params.pitch_axis_x0,
        params.cosine_spacing
    )
    stations = np.linspace(0.0, params.span_L, params.n_sections)
    sections = [transform_section(airfoil, float(z), params) for z in stations]
    logger.debug(
        f"Generated {len(sections)} sections x {params.n_chord_points} points "
        f"({params.chord_mode.value} chord, {params.pitch_mode.value} pitch)"
    )
    return sections
