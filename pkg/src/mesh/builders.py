"""
Mesh builders: section lofting, propeller assembly, parametric hulls and
reference solids.
"""

import math
from typing import Dict, List, Sequence, Tuple

import numpy as np
from loguru import logger

from src.config import HUB_SEGMENTS
from src.geometry.blade_geometry import generate_blade_sections
from src.mesh.tri_mesh import TriMesh
from src.models.errors import FitError, HullParameterError, LoftError, OrderingError
from src.models.schema import BladeDesignParams, HullParams, Section3D


def _band(lower: np.ndarray, upper: np.ndarray, outward: bool = True) -> List[Tuple[int, int, int]]:
    """Two triangles per quad between two index rings of equal length."""
    triangles = []
    count = len(lower)
    for i in range(count):
        j = (i + 1) % count
        a, b, c, d = lower[i], lower[j], upper[j], upper[i]
        if outward:
            triangles += [(a, b, c), (a, c, d)]
        else:
            triangles += [(a, c, b), (a, d, c)]
    return triangles


def _fan(ring: np.ndarray, facing_up: bool) -> List[Tuple[int, int, int]]:
    """Fan from the first ring vertex; the ring must be convex."""
    triangles = []
    for i in range(1, len(ring) - 1):
        if facing_up:
            triangles.append((ring[0], ring[i], ring[i + 1]))
        else:
            triangles.append((ring[0], ring[i + 1], ring[i]))
    return triangles


def _centroid_fan(centre: int, ring: np.ndarray, facing_up: bool) -> List[Tuple[int, int, int]]:
    triangles = []
    count = len(ring)
    for i in range(count):
        j = (i + 1) % count
        if facing_up:
            triangles.append((centre, ring[i], ring[j]))
        else:
            triangles.append((centre, ring[j], ring[i]))
    return triangles


def loft_sections(sections: Sequence[Section3D], cap: str = "fan") -> TriMesh:
    """
    Loft counter-clockwise sections into a closed, outward-facing surface.

    Adjacent sections are joined by two triangles per quad; root and tip are
    capped by a fan from the first section point (cap="fan") or from an added
    centroid vertex (cap="centroid").

    Args:
        sections: At least two sections with equal point counts, root to tip
        cap: Cap triangulation

    Returns:
        A watertight mesh
    """
    if len(sections) < 2:
        raise LoftError(f"lofting needs at least 2 sections, got {len(sections)}")
    counts = {len(section.points) for section in sections}
    if len(counts) != 1:
        raise LoftError(f"sections have mismatched point counts: {sorted(counts)}")
    if cap not in ("fan", "centroid"):
        raise LoftError(f"unknown cap triangulation: {cap}")
    stations = [section.station_z for section in sections]
    if any(b <= a for a, b in zip(stations[:-1], stations[1:])):
        raise OrderingError(f"section stations must strictly increase: {stations}")

    points = counts.pop()
    vertices = np.array([p for section in sections for p in section.points], dtype=float)
    rings = [np.arange(k * points, (k + 1) * points) for k in range(len(sections))]

    triangles = []
    for lower, upper in zip(rings[:-1], rings[1:]):
        triangles += _band(lower, upper)

    if cap == "fan":
        triangles += _fan(rings[0], facing_up=False)
        triangles += _fan(rings[-1], facing_up=True)
    else:
        root_centre, tip_centre = len(vertices), len(vertices) + 1
        vertices = np.vstack([vertices, vertices[rings[0]].mean(axis=0), vertices[rings[-1]].mean(axis=0)])
        triangles += _centroid_fan(root_centre, rings[0], facing_up=False)
        triangles += _centroid_fan(tip_centre, rings[-1], facing_up=True)

    return TriMesh(vertices, triangles)


def _ring_section(ring_xy: np.ndarray, z: float) -> Section3D:
    return Section3D(station_z=z, points=[(float(x), float(y), z) for x, y in ring_xy])


def make_cylinder(radius: float, length: float, segments: int = HUB_SEGMENTS) -> TriMesh:
    """Closed cylinder about the z axis, centred on the origin."""
    phi = np.linspace(0.0, 2 * math.pi, segments, endpoint=False)
    ring = np.column_stack([radius * np.cos(phi), radius * np.sin(phi)])
    half = length / 2
    return loft_sections([_ring_section(ring, -half), _ring_section(ring, half)])


def make_box(
    size_x: float,
    size_y: float,
    size_z: float,
    origin: Sequence[float] = (0.0, 0.0, 0.0)
) -> TriMesh:
    """Axis-aligned box with outward normals: 8 vertices, 12 triangles."""
    ox, oy, oz = origin
    ring = np.array([[ox, oy], [ox + size_x, oy], [ox + size_x, oy + size_y], [ox, oy + size_y]])
    return loft_sections([_ring_section(ring, float(oz)), _ring_section(ring, float(oz + size_z))])


def make_icosphere(radius: float, subdivisions: int = 3) -> TriMesh:
    """Geodesic sphere by repeated midpoint subdivision of an icosahedron."""
    t = (1 + math.sqrt(5)) / 2
    vertices = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    vertices = [tuple(np.array(v) / np.linalg.norm(v)) for v in vertices]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]

    for _ in range(subdivisions):
        midpoints: Dict[Tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (min(a, b), max(a, b))
            if key not in midpoints:
                m = (np.array(vertices[a]) + np.array(vertices[b])) / 2
                vertices.append(tuple(m / np.linalg.norm(m)))
                midpoints[key] = len(vertices) - 1
            return midpoints[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = refined

    return TriMesh(np.array(vertices) * radius, faces)


def _sunk_root(root: Section3D, hub_radius: float) -> Section3D:
    """Copy of the root section moved inward until all its points lie inside the hub."""
    c_max = max(abs(x) for x, _, _ in root.points)
    if c_max >= hub_radius:
        raise FitError(
            f"root section half-width {c_max} m does not fit inside hub radius {hub_radius} m"
        )
    sagitta = hub_radius - math.sqrt(hub_radius ** 2 - c_max ** 2)
    sink = sagitta + 0.1 * (hub_radius - sagitta)
    return Section3D(
        station_z=root.station_z - sink,
        points=[(x, y, root.station_z - sink) for x, y, _ in root.points]
    )


def assemble_propeller(params: BladeDesignParams, hub_segments: int = HUB_SEGMENTS) -> TriMesh:
    """
    Hub cylinder plus n_blades lofted blades as one multi-solid mesh.

    The hub axis is z. Blade k points radially along angle 2*pi*k/n_blades;
    its local span axis becomes the radial direction, local X the tangential
    direction and local Y the axial direction. The tip stays at hub radius plus
    span; an extra root section is sunk below the hub surface by more than the
    sagitta of the widest root chord point, so every blade overlaps the hub.

    Args:
        params: Blade design parameters
        hub_segments: Circumferential facets of the hub

    Returns:
        Multi-solid mesh: hub first, then blades in angular order
    """
    if params.chord_root_Cr > params.hub_length:
        raise FitError(
            f"root chord {params.chord_root_Cr} m exceeds hub length {params.hub_length} m"
        )

    hub_radius = params.hub_diameter / 2
    hub = make_cylinder(hub_radius, params.hub_length, hub_segments)
    sections = generate_blade_sections(params)
    blade = loft_sections([_sunk_root(sections[0], hub_radius)] + sections)

    solids = [hub]
    for k in range(params.n_blades):
        theta = 2 * math.pi * k / params.n_blades
        radial = np.array([math.cos(theta), math.sin(theta), 0.0])
        tangential = np.array([-math.sin(theta), math.cos(theta), 0.0])
        axial = np.array([0.0, 0.0, 1.0])
        placement = np.column_stack([tangential, axial, radial])
        solids.append(blade.transformed(placement, hub_radius * radial))

    propeller = TriMesh.merge(solids)
    logger.info(
        f"Assembled propeller: {params.n_blades} blades, hub {params.hub_diameter * 1000:.1f} mm, "
        f"{len(propeller.triangles)} triangles"
    )
    return propeller


def _check_hull(params: HullParams) -> None:
    limit = min(params.length, params.beam, params.depth) / 2
    if params.wall_thickness >= limit:
        raise HullParameterError(
            f"wall thickness {params.wall_thickness} m must be below min(length, beam, depth)/2 = {limit} m"
        )


def hull_plan_ring(length: float, beam: float, bow_exponent: float, segments: int, inset: float = 0.0) -> np.ndarray:
    """
    Counter-clockwise plan-form outline, midship at x = 0.

    Forward of midship the outline is the superellipse
    |2x/L|^n + |2y/B|^n = 1; aft of midship it is rectangular. An inset
    shrinks both semi-axes and the transom by the same distance, keeping the
    point correspondence used to join outer and inner rings.
    """
    a = length / 2 - inset
    b = beam / 2 - inset
    transom = -length / 2 + inset
    theta = np.linspace(-math.pi / 2, math.pi / 2, segments + 1)
    x = a * np.abs(np.cos(theta)) ** (2 / bow_exponent)
    y = b * np.sign(np.sin(theta)) * np.abs(np.sin(theta)) ** (2 / bow_exponent)
    x[0], x[-1] = 0.0, 0.0
    bow = np.column_stack([x, y])
    aft = np.array([[transom, b], [transom, -b]])
    return np.vstack([bow, aft])


def hull_envelope(params: HullParams) -> TriMesh:
    """Closed outer solid of the hull; this is what displaces water."""
    _check_hull(params)
    ring = hull_plan_ring(params.length, params.beam, params.bow_exponent, params.bow_segments)
    return loft_sections(
        [_ring_section(ring, 0.0), _ring_section(ring, float(params.depth))],
        cap="centroid"
    )


def generate_hull(params: HullParams) -> TriMesh:
    """
    Hollow hull shell as one closed 2-manifold.

    The outer shell has a superelliptic bow and a flat keel at z = 0. The
    cavity is the outline inset by the wall thickness, floored at
    z = wall_thickness. With an open deck the shell ends in a rim joining
    outer and inner walls at z = depth; otherwise the cavity is sealed a wall
    thickness below the deck.
    """
    _check_hull(params)
    t = params.wall_thickness
    outer = hull_plan_ring(params.length, params.beam, params.bow_exponent, params.bow_segments)
    inner = hull_plan_ring(params.length, params.beam, params.bow_exponent, params.bow_segments, inset=t)
    count = len(outer)
    cavity_top = params.depth if params.deck_open else params.depth - t

    def lift(ring: np.ndarray, z: float) -> np.ndarray:
        return np.column_stack([ring, np.full(len(ring), z)])

    layers = [lift(outer, 0.0), lift(outer, params.depth), lift(inner, t), lift(inner, cavity_top)]
    vertices = np.vstack(layers + [
        [*outer.mean(axis=0), 0.0],
        [*inner.mean(axis=0), t],
        [*outer.mean(axis=0), params.depth],
        [*inner.mean(axis=0), cavity_top],
    ])
    o0, o1, i0, i1 = (np.arange(k * count, (k + 1) * count) for k in range(4))
    keel, floor, deck, ceiling = range(4 * count, 4 * count + 4)

    triangles = _band(o0, o1)
    triangles += _centroid_fan(keel, o0, facing_up=False)
    triangles += _band(i0, i1, outward=False)
    triangles += _centroid_fan(floor, i0, facing_up=True)

    if params.deck_open:
        for i in range(count):
            j = (i + 1) % count
            triangles += [(o1[i], o1[j], i1[j]), (o1[i], i1[j], i1[i])]
        vertices = vertices[:deck]
    else:
        triangles += _centroid_fan(deck, o1, facing_up=True)
        triangles += _centroid_fan(ceiling, i1, facing_up=False)

    hull = TriMesh(vertices, triangles)
    logger.info(
        f"Generated hull {params.length:.3f}x{params.beam:.3f}x{params.depth:.3f} m, "
        f"wall {t * 1000:.1f} mm, {'open' if params.deck_open else 'closed'} deck"
    )
    return hull
