"""
Binary and ASCII STL encoding.

Binary layout: 80-byte header, little-endian uint32 triangle count, then
50 bytes per triangle (normal and three vertices as little-endian float32,
uint16 attribute).
"""

import re
from typing import Union

import numpy as np
from loguru import logger

from src.mesh.tri_mesh import TriMesh
from src.models.errors import StlParseError
from src.models.schema import StlMode

HEADER_SIZE = 80
COUNT_SIZE = 4

STL_RECORD = np.dtype([
    ("normal", "<f4", (3,)),
    ("vertices", "<f4", (3, 3)),
    ("attribute", "<u2"),
])

_FLOAT = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_FACET = re.compile(
    rf"facet\s+normal\s+{_FLOAT}\s+{_FLOAT}\s+{_FLOAT}\s+outer\s+loop\s+"
    rf"vertex\s+({_FLOAT})\s+({_FLOAT})\s+({_FLOAT})\s+"
    rf"vertex\s+({_FLOAT})\s+({_FLOAT})\s+({_FLOAT})\s+"
    rf"vertex\s+({_FLOAT})\s+({_FLOAT})\s+({_FLOAT})\s+"
    r"endloop\s+endfacet"
)


def export_stl(mesh: TriMesh, mode: Union[StlMode, str] = StlMode.BINARY, name: str = "autoprop") -> bytes:
    """
    Encode a mesh as STL.

    Args:
        mesh: Mesh to encode
        mode: Binary or ASCII
        name: Solid name (ASCII) / header text (binary)

    Returns:
        The encoded byte stream
    """
    mode = StlMode(mode)
    corners = mesh.vertices[mesh.triangles]
    normals = mesh.face_normals

    if mode == StlMode.BINARY:
        records = np.zeros(len(mesh.triangles), dtype=STL_RECORD)
        records["normal"] = normals
        records["vertices"] = corners
        header = name.encode("ascii", "replace")[:HEADER_SIZE].ljust(HEADER_SIZE, b" ")
        count = np.array([len(records)], dtype="<u4").tobytes()
        payload = header + count + records.tobytes()
    else:
        lines = [f"solid {name}"]
        for normal, triangle in zip(normals, corners):
            lines.append("  facet normal {:.9e} {:.9e} {:.9e}".format(*normal))
            lines.append("    outer loop")
            for vertex in triangle:
                lines.append("      vertex {:.9e} {:.9e} {:.9e}".format(*vertex))
            lines.append("    endloop")
            lines.append("  endfacet")
        lines.append(f"endsolid {name}")
        payload = ("\n".join(lines) + "\n").encode("ascii")

    logger.debug(f"Encoded {len(mesh.triangles)} triangles as {mode.value} STL ({len(payload)} bytes)")
    return payload


def _merge_corners(corners: np.ndarray) -> TriMesh:
    """Rebuild the index structure, merging vertices with identical coordinates."""
    flat = corners.reshape(-1, 3).astype(np.float64)
    vertices, inverse = np.unique(flat, axis=0, return_inverse=True)
    return TriMesh(vertices, inverse.reshape(-1, 3))


def _import_binary(data: bytes) -> TriMesh:
    if len(data) < HEADER_SIZE + COUNT_SIZE:
        raise StlParseError("truncated STL header", len(data))
    count = int(np.frombuffer(data, dtype="<u4", count=1, offset=HEADER_SIZE)[0])
    expected = HEADER_SIZE + COUNT_SIZE + count * STL_RECORD.itemsize
    if len(data) < expected:
        complete = (len(data) - HEADER_SIZE - COUNT_SIZE) // STL_RECORD.itemsize
        offset = HEADER_SIZE + COUNT_SIZE + complete * STL_RECORD.itemsize
        raise StlParseError(f"header declares {count} triangles but stream holds {complete}", offset)
    if len(data) > expected:
        raise StlParseError(f"{len(data) - expected} trailing bytes after {count} triangles", expected)
    records = np.frombuffer(data, dtype=STL_RECORD, count=count, offset=HEADER_SIZE + COUNT_SIZE)
    return _merge_corners(records["vertices"])


def _import_ascii(data: bytes) -> TriMesh:
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as e:
        raise StlParseError("non-ASCII byte in ASCII STL", e.start) from None
    body_start = text.find("facet")
    body_end = text.rfind("endsolid")
    if body_end < 0:
        raise StlParseError("missing endsolid", len(data))
    corners = []
    position = body_start if body_start >= 0 else body_end
    while True:
        position = len(text) - len(text[position:].lstrip())
        if position >= body_end:
            break
        match = _FACET.match(text, position)
        if not match:
            raise StlParseError("malformed facet", position)
        values = [float(v) for v in match.groups()]
        corners.append(np.array(values).reshape(3, 3))
        position = match.end()
    return _merge_corners(np.array(corners).reshape(-1, 3, 3))


def import_stl(data: bytes) -> TriMesh:
    """
    Decode an STL byte stream.

    A stream whose size matches its declared binary triangle count is read
    as binary, otherwise a stream beginning with "solid" is read as ASCII.
    Vertices with identical coordinates are merged.

    Raises:
        StlParseError: with the byte offset of the first problem
    """
    if len(data) >= HEADER_SIZE + COUNT_SIZE:
        count = int(np.frombuffer(data, dtype="<u4", count=1, offset=HEADER_SIZE)[0])
        if len(data) == HEADER_SIZE + COUNT_SIZE + count * STL_RECORD.itemsize:
            return _import_binary(data)
    if data.lstrip().startswith(b"solid"):
        return _import_ascii(data)
    return _import_binary(data)
