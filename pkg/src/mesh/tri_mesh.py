"""
Indexed triangle mesh with watertightness and volume queries.
"""

from collections import Counter
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field

from src.models.errors import MeshValidityError


Edge = Tuple[int, int]


class WatertightReport(BaseModel):
    """Edge defects found by the watertightness check."""
    watertight: bool
    boundary_edges: List[Edge] = Field(default_factory=list)
    non_manifold_edges: List[Edge] = Field(default_factory=list)
    inconsistent_edges: List[Edge] = Field(default_factory=list)


class MeshStats(BaseModel):
    """Summary of a mesh for reports."""
    vertex_count: int
    triangle_count: int
    solid_count: int
    watertight: bool
    volume_m3: Optional[float] = None
    bounds_min: Tuple[float, float, float]
    bounds_max: Tuple[float, float, float]


class TriMesh:
    """
    Immutable indexed triangle mesh.

    Vertices are float64 meters, triangles int64 index triples. A mesh may
    hold several solids; `solid_offsets` marks where each solid's triangles
    start.
    """

    def __init__(
        self,
        vertices: Sequence[Sequence[float]],
        triangles: Sequence[Sequence[int]],
        solid_offsets: Optional[Sequence[int]] = None
    ):
        vertices = np.array(vertices, dtype=np.float64).reshape(-1, 3)
        triangles = np.array(triangles, dtype=np.int64).reshape(-1, 3)

        if triangles.size and (triangles.min() < 0 or triangles.max() >= len(vertices)):
            raise MeshValidityError("triangle index out of range")

        if triangles.size:
            areas = self._areas(vertices, triangles)
            degenerate = np.flatnonzero(areas <= 0.0)
            if degenerate.size:
                raise MeshValidityError(
                    f"{degenerate.size} degenerate triangle(s), first at index {int(degenerate[0])}"
                )

        vertices.setflags(write=False)
        triangles.setflags(write=False)
        self._vertices = vertices
        self._triangles = triangles
        self._solid_offsets = tuple(solid_offsets) if solid_offsets is not None else (0,)

    @staticmethod
    def _areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
        v0, v1, v2 = (vertices[triangles[:, i]] for i in range(3))
        return 0.5 * np.linalg.norm(np.cross(v1 - v0, v2 - v0), axis=1)

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    @property
    def triangles(self) -> np.ndarray:
        return self._triangles

    @property
    def face_normals(self) -> np.ndarray:
        """Unit normals following the right-hand rule."""
        v0, v1, v2 = (self._vertices[self._triangles[:, i]] for i in range(3))
        normals = np.cross(v1 - v0, v2 - v0)
        lengths = np.linalg.norm(normals, axis=1, keepdims=True)
        return np.divide(normals, lengths, out=np.zeros_like(normals), where=lengths > 0)

    @property
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return self._vertices.min(axis=0), self._vertices.max(axis=0)

    def __len__(self) -> int:
        return len(self._triangles)

    def transformed(self, rotation: np.ndarray, translation: Sequence[float] = (0.0, 0.0, 0.0)) -> "TriMesh":
        """Rigidly move the mesh: v -> R v + t."""
        vertices = self._vertices @ np.asarray(rotation, dtype=float).T + np.asarray(translation, dtype=float)
        return TriMesh(vertices, self._triangles, self._solid_offsets)

    def flipped(self) -> "TriMesh":
        """Same surface with every triangle's orientation reversed."""
        return TriMesh(self._vertices, self._triangles[:, ::-1], self._solid_offsets)

    def without_triangle(self, index: int) -> "TriMesh":
        return TriMesh(self._vertices, np.delete(self._triangles, index, axis=0))

    def solids(self) -> List["TriMesh"]:
        """Split into the solids this mesh was merged from."""
        if len(self._solid_offsets) == 1:
            return [self]
        bounds = list(self._solid_offsets) + [len(self._triangles)]
        parts = []
        for start, stop in zip(bounds[:-1], bounds[1:]):
            tris = self._triangles[start:stop]
            used, remap = np.unique(tris, return_inverse=True)
            parts.append(TriMesh(self._vertices[used], remap.reshape(-1, 3)))
        return parts

    @classmethod
    def merge(cls, meshes: Sequence["TriMesh"]) -> "TriMesh":
        """Concatenate solids into one multi-solid mesh without sharing vertices."""
        vertices, triangles, offsets = [], [], []
        vertex_base, triangle_base = 0, 0
        for mesh in meshes:
            for part in mesh.solids():
                offsets.append(triangle_base)
                vertices.append(part.vertices)
                triangles.append(part.triangles + vertex_base)
                vertex_base += len(part.vertices)
                triangle_base += len(part.triangles)
        return cls(np.vstack(vertices), np.vstack(triangles), offsets)


def is_watertight(mesh: TriMesh) -> WatertightReport:
    """
    Check that every undirected edge is shared by exactly two triangles whose
    half-edges run in opposite directions.
    """
    directed: Counter = Counter()
    for a, b, c in mesh.triangles.tolist():
        directed[(a, b)] += 1
        directed[(b, c)] += 1
        directed[(c, a)] += 1

    undirected: Dict[Edge, int] = Counter()
    for (a, b), count in directed.items():
        undirected[(min(a, b), max(a, b))] += count

    boundary, non_manifold, inconsistent = [], [], []
    for edge, count in sorted(undirected.items()):
        if count == 1:
            boundary.append(edge)
        elif count > 2:
            non_manifold.append(edge)
        else:
            a, b = edge
            if directed.get((a, b), 0) != 1 or directed.get((b, a), 0) != 1:
                inconsistent.append(edge)

    watertight = len(mesh) > 0 and not (boundary or non_manifold or inconsistent)
    return WatertightReport(
        watertight=watertight,
        boundary_edges=boundary,
        non_manifold_edges=non_manifold,
        inconsistent_edges=inconsistent
    )


def mesh_volume(mesh: TriMesh) -> float:
    """
    Signed volume by the divergence theorem; positive for outward normals.

    Raises:
        MeshValidityError: if the mesh is not watertight
    """
    report = is_watertight(mesh)
    if not report.watertight:
        raise MeshValidityError(
            f"volume needs a watertight mesh: {len(report.boundary_edges)} boundary, "
            f"{len(report.non_manifold_edges)} non-manifold, "
            f"{len(report.inconsistent_edges)} inconsistent edges"
        )
    v0, v1, v2 = (mesh.vertices[mesh.triangles[:, i]] for i in range(3))
    return float(np.einsum("ij,ij->i", v0, np.cross(v1, v2)).sum() / 6.0)


def mesh_stats(mesh: TriMesh) -> MeshStats:
    """Vertex/triangle counts, watertightness and volume summed over solids."""
    solids = mesh.solids()
    watertight = all(is_watertight(solid).watertight for solid in solids)
    volume = sum(mesh_volume(solid) for solid in solids) if watertight else None
    lower, upper = mesh.bounds
    stats = MeshStats(
        vertex_count=len(mesh.vertices),
        triangle_count=len(mesh.triangles),
        solid_count=len(solids),
        watertight=watertight,
        volume_m3=volume,
        bounds_min=tuple(float(v) for v in lower),
        bounds_max=tuple(float(v) for v in upper)
    )
    if not watertight:
        logger.warning(f"Mesh with {stats.triangle_count} triangles is not watertight")
    return stats
