"""
Hydrostatic draft solver for closed hull meshes.
"""

from typing import List

import numpy as np
from loguru import logger
from pydantic import BaseModel
from scipy import optimize

from src.mesh.tri_mesh import TriMesh, is_watertight, mesh_volume
from src.models.errors import DomainError, MeshValidityError

DRAFT_TOLERANCE_M = 1e-10
RESIDUAL_TOLERANCE = 1e-6
MAX_BISECTIONS = 200


class BuoyancyResult(BaseModel):
    """Equilibrium draft of a hull under load."""
    draft: float
    freeboard_margin: float
    displaced_mass_kg: float
    total_mass_kg: float
    max_displacement_kg: float
    sinks: bool


def _clip_below(polygon: List[np.ndarray], level: float) -> List[np.ndarray]:
    """Clip a polygon to the half-space z <= level."""
    clipped = []
    count = len(polygon)
    for i in range(count):
        current, following = polygon[i], polygon[(i + 1) % count]
        current_in = current[2] <= level
        following_in = following[2] <= level
        if current_in:
            clipped.append(current)
        if current_in != following_in:
            s = (level - current[2]) / (following[2] - current[2])
            crossing = current + s * (following - current)
            crossing[2] = level
            clipped.append(crossing)
    return clipped


def submerged_volume(mesh: TriMesh, waterline_z: float) -> float:
    """
    Volume of a closed mesh below the plane z = waterline_z.

    Each triangle is clipped to the half-space below the plane and its signed
    tetrahedron volume is taken about a point on the plane, so the cut face
    itself contributes nothing.
    """
    apex = np.array([0.0, 0.0, waterline_z])
    volume = 0.0
    for triangle in mesh.vertices[mesh.triangles]:
        if triangle[:, 2].min() >= waterline_z:
            continue
        if triangle[:, 2].max() <= waterline_z:
            polygon = list(triangle)
        else:
            polygon = _clip_below([p.copy() for p in triangle], waterline_z)
        p0 = polygon[0] - apex
        for k in range(1, len(polygon) - 1):
            volume += np.dot(p0, np.cross(polygon[k] - apex, polygon[k + 1] - apex)) / 6.0
    return float(volume)


def buoyancy_check(hull: TriMesh, total_mass: float, water_density: float = 1000.0) -> BuoyancyResult:
    """
    Solve for the draft at which the displaced water balances the load.

    Draft is measured from the lowest point of the hull. The solve bisects on
    draft with scipy until the bracket is below 1e-10 m; a displaced mass
    further than 1e-6 relative from the load is logged as a warning. When the load exceeds full displacement the result
    is flagged as sinking and the draft is extrapolated over the deck-level
    waterplane.

    Args:
        hull: Closed displacement envelope of the hull
        total_mass: Vessel mass in kg
        water_density: kg/m^3

    Returns:
        Draft, freeboard margin and displacement figures
    """
    if total_mass <= 0:
        raise DomainError(f"total mass must be positive, got {total_mass}")
    if not is_watertight(hull).watertight:
        raise MeshValidityError("buoyancy needs a watertight hull")

    keel, deck = float(hull.vertices[:, 2].min()), float(hull.vertices[:, 2].max())
    depth = deck - keel
    full_mass = water_density * mesh_volume(hull)

    if total_mass > full_mass:
        step = depth * 1e-4
        waterplane = (full_mass - water_density * submerged_volume(hull, deck - step)) / (water_density * step)
        draft = depth + (total_mass - full_mass) / (water_density * waterplane)
        logger.warning(
            f"Hull sinks: load {total_mass:.3f} kg exceeds full displacement {full_mass:.3f} kg"
        )
        return BuoyancyResult(
            draft=draft,
            freeboard_margin=depth - draft,
            displaced_mass_kg=full_mass,
            total_mass_kg=total_mass,
            max_displacement_kg=full_mass,
            sinks=True
        )

    def excess(draft: float) -> float:
        return water_density * submerged_volume(hull, keel + draft) - total_mass

    draft, solve = optimize.bisect(
        excess, 0.0, depth, xtol=DRAFT_TOLERANCE_M, maxiter=MAX_BISECTIONS, full_output=True, disp=False
    )
    displaced = total_mass + excess(draft)
    if not solve.converged or abs(displaced - total_mass) > RESIDUAL_TOLERANCE * total_mass:
        logger.warning(
            f"Draft solve did not settle after {solve.iterations} bisections: "
            f"displaced {displaced:.6f} kg for a {total_mass:.6f} kg load"
        )

    logger.info(f"Draft {draft * 1000:.3f} mm for {total_mass:.3f} kg, freeboard {(depth - draft) * 1000:.3f} mm")
    return BuoyancyResult(
        draft=draft,
        freeboard_margin=depth - draft,
        displaced_mass_kg=displaced,
        total_mass_kg=total_mass,
        max_displacement_kg=full_mass,
        sinks=False
    )
