"""
Tests for the triangle mesh kernel and mesh builders.
"""

import math

import numpy as np
import pytest

from src.mesh.builders import (
    assemble_propeller,
    generate_hull,
    hull_envelope,
    loft_sections,
    make_box,
    make_cylinder,
    make_icosphere,
)
from src.mesh.tri_mesh import TriMesh, is_watertight, mesh_stats, mesh_volume
from src.models.errors import FitError, HullParameterError, LoftError, MeshValidityError, OrderingError
from src.models.schema import BladeDesignParams, HullParams, Section3D


@pytest.fixture
def unit_cube():
    """Unit cube at the origin."""
    return make_box(1.0, 1.0, 1.0)


@pytest.fixture
def propeller():
    """Three-blade propeller: 26 mm span on a 20 mm hub."""
    return assemble_propeller(BladeDesignParams(span_L=0.026, hub_diameter=0.020, n_blades=3))


def _square(z, size=1.0):
    return Section3D(
        station_z=z,
        points=[(0.0, 0.0, z), (size, 0.0, z), (size, size, z), (0.0, size, z)]
    )


def test_unit_cube_volume(unit_cube):
    """Test the unit cube oracle."""
    assert len(unit_cube.vertices) == 8
    assert len(unit_cube.triangles) == 12
    assert is_watertight(unit_cube).watertight
    assert abs(mesh_volume(unit_cube) - 1.0) <= 1e-12


def test_cube_missing_triangle(unit_cube):
    """Test that removing a triangle opens exactly three boundary edges."""
    opened = unit_cube.without_triangle(0)
    report = is_watertight(opened)

    assert not report.watertight
    assert len(report.boundary_edges) == 3
    with pytest.raises(MeshValidityError):
        mesh_volume(opened)


def test_flipped_mesh_has_negative_volume(unit_cube):
    """Test that reversing orientation negates the signed volume."""
    assert mesh_volume(unit_cube.flipped()) == pytest.approx(-1.0, abs=1e-12)


def test_inconsistent_orientation_detected(unit_cube):
    """Test that one reversed triangle is reported as inconsistent."""
    triangles = unit_cube.triangles.copy()
    triangles[0] = triangles[0][::-1]
    report = is_watertight(TriMesh(unit_cube.vertices, triangles))

    assert not report.watertight
    assert len(report.inconsistent_edges) == 3


def test_icosphere_volume():
    """Test the icosphere approaches the sphere volume."""
    sphere = make_icosphere(0.5, subdivisions=3)
    exact = 4 / 3 * math.pi * 0.5**3

    assert is_watertight(sphere).watertight
    assert abs(mesh_volume(sphere) - exact) / exact < 0.01


def test_cylinder_volume():
    """Test the cylinder volume equals its polygonal prism volume."""
    segments = 48
    cylinder = make_cylinder(0.01, 0.014, segments)
    prism = 0.5 * segments * 0.01**2 * math.sin(2 * math.pi / segments) * 0.014

    assert mesh_volume(cylinder) == pytest.approx(prism, rel=1e-12)


def test_mesh_rejects_bad_triangles():
    """Test index range and degenerate triangle checks."""
    vertices = [(0, 0, 0), (1, 0, 0), (0, 1, 0)]
    with pytest.raises(MeshValidityError):
        TriMesh(vertices, [(0, 1, 3)])
    with pytest.raises(MeshValidityError):
        TriMesh(vertices, [(0, 1, 1)])


def test_loft_errors():
    """Test loft preconditions."""
    with pytest.raises(LoftError):
        loft_sections([_square(0.0)])
    with pytest.raises(OrderingError):
        loft_sections([_square(1.0), _square(0.0)])

    triangle = Section3D(station_z=1.0, points=[(0.0, 0.0, 1.0), (1.0, 0.0, 1.0), (0.0, 1.0, 1.0)])
    with pytest.raises(LoftError):
        loft_sections([_square(0.0), triangle])


def test_loft_cap_styles():
    """Test that both cap triangulations close the surface."""
    sections = [_square(0.0), _square(0.5), _square(1.0)]
    fan = loft_sections(sections)
    centroid = loft_sections(sections, cap="centroid")

    assert len(fan.triangles) == 2 * 4 * 2 + 2 * 2
    assert len(centroid.triangles) == 2 * 4 * 2 + 2 * 4
    assert mesh_volume(fan) == pytest.approx(1.0, abs=1e-12)
    assert mesh_volume(centroid) == pytest.approx(1.0, abs=1e-12)


def test_propeller_solids(propeller):
    """Test that hub and every blade are closed with positive volume."""
    solids = propeller.solids()

    assert len(solids) == 4
    for solid in solids:
        assert is_watertight(solid).watertight
        assert mesh_volume(solid) > 0


def test_propeller_radial_extent(propeller):
    """Test that the first blade's tip reaches hub radius plus span."""
    _, upper = propeller.bounds
    assert upper[0] == pytest.approx(0.010 + 0.026, abs=1e-12)


def test_propeller_blade_triangle_count():
    """Test the blade surface triangle count for a lofted blade."""
    params = BladeDesignParams(n_blades=1, n_sections=5, n_chord_points=8)
    blade = assemble_propeller(params, hub_segments=12).solids()[1]

    # n_sections blade sections plus the sunk root section
    p, s = params.n_chord_points, params.n_sections
    assert len(blade.triangles) == 2 * p * s + 2 * (p - 2)


def test_propeller_blade_root_inside_hub():
    """Test that each blade's root ring lies strictly inside the hub radius."""
    params = BladeDesignParams(n_blades=3)
    hub_radius = params.hub_diameter / 2

    for blade in assemble_propeller(params).solids()[1:]:
        radius = np.hypot(blade.vertices[:, 0], blade.vertices[:, 1])
        assert np.count_nonzero(radius < hub_radius - 1e-6) == params.n_chord_points
        assert radius.max() == pytest.approx(hub_radius + params.span_L, rel=0.05)


def test_propeller_must_fit_hub():
    """Test that a root chord longer than the hub is rejected."""
    with pytest.raises(FitError):
        assemble_propeller(BladeDesignParams(chord_root_Cr=0.02, hub_length=0.014))


def test_propeller_root_wider_than_hub_radius():
    """Test that a root section too wide to sink into the hub is rejected."""
    with pytest.raises(FitError):
        assemble_propeller(BladeDesignParams(hub_diameter=0.008))


def test_hull_open_deck():
    """Test the open-deck hull shell."""
    params = HullParams()
    hull = generate_hull(params)
    envelope = hull_envelope(params)

    assert is_watertight(hull).watertight
    assert 0 < mesh_volume(hull) < mesh_volume(envelope)
    lower, upper = hull.bounds
    assert lower[2] == 0.0
    assert upper[2] == pytest.approx(params.depth)


def test_hull_closed_deck():
    """Test the sealed hull shell."""
    open_hull = generate_hull(HullParams())
    closed_hull = generate_hull(HullParams(deck_open=False))

    assert is_watertight(closed_hull).watertight
    assert mesh_volume(closed_hull) > mesh_volume(open_hull)


def test_hull_wall_too_thick():
    """Test that a wall leaving no cavity is rejected."""
    with pytest.raises(HullParameterError):
        generate_hull(HullParams(beam=0.02, depth=0.1, wall_thickness=0.01))


def test_hull_wall_longer_than_half_length():
    """Test that a wall meeting itself along the length is rejected."""
    with pytest.raises(HullParameterError):
        generate_hull(HullParams(length=0.02, beam=0.2, depth=0.1, wall_thickness=0.012))


def test_hull_blunt_bow():
    """Test that a straight-line bow (exponent 1) still closes."""
    envelope = hull_envelope(HullParams(bow_exponent=1.0))
    assert is_watertight(envelope).watertight
    assert mesh_volume(envelope) > 0


def test_mesh_stats(propeller):
    """Test mesh statistics for a multi-solid mesh."""
    stats = mesh_stats(propeller)

    assert stats.solid_count == 4
    assert stats.watertight
    assert stats.triangle_count == len(propeller.triangles)
    assert stats.volume_m3 == pytest.approx(sum(mesh_volume(s) for s in propeller.solids()))


def test_transformed_preserves_volume(unit_cube):
    """Test that a rigid motion keeps the volume."""
    c, s = math.cos(0.3), math.sin(0.3)
    rotation = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    moved = unit_cube.transformed(rotation, (1.0, 2.0, 3.0))
    assert mesh_volume(moved) == pytest.approx(1.0, abs=1e-12)
