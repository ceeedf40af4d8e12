"""
IMESH text format::

    IMESH nV nT nBL
    i j k            (nT oriented triangles)
    u v length       (one per edge, u < v, 17 significant digits)
    label m v1 ... vm
"""

from pathlib import Path
from typing import List, Union

from app.errors import MeshFormatError
from app.storage import atomic_write_text
from .mesh import BoundaryLoop, IntrinsicMesh

MAGIC = "IMESH"


def format_mesh(m: IntrinsicMesh) -> str:
    lines = [f"{MAGIC} {m.n_vertices} {m.n_triangles} {len(m.boundary_loops)}"]
    lines.extend(f"{a} {b} {c}" for a, b, c in m.triangles.tolist())
    lines.extend(f"{u} {v} {l:.17g}" for (u, v), l in zip(m.edges.tolist(), m.lengths.tolist()))
    for loop in m.boundary_loops:
        lines.append(" ".join([loop.label, str(len(loop))] + [str(v) for v in loop.vertices]))
    return "\n".join(lines) + "\n"


def parse_mesh(text: str) -> IntrinsicMesh:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows or rows[0][0] != MAGIC or len(rows[0]) != 4:
        raise MeshFormatError("missing `IMESH nV nT nBL` header")
    try:
        n_vertices, n_triangles, n_loops = (int(x) for x in rows[0][1:])
        tri_rows = rows[1 : 1 + n_triangles]
        edge_rows = rows[1 + n_triangles : len(rows) - n_loops]
        loop_rows = rows[len(rows) - n_loops :] if n_loops else []
        if len(tri_rows) != n_triangles or any(len(r) != 3 for r in tri_rows):
            raise MeshFormatError(f"expected {n_triangles} triangle lines of 3 ids")
        if any(len(r) != 3 for r in edge_rows):
            raise MeshFormatError("edge lines must read `u v length`")
        triangles = [[int(x) for x in r] for r in tri_rows]
        edges = [(int(r[0]), int(r[1])) for r in edge_rows]
        lengths = [float(r[2]) for r in edge_rows]
        loops: List[BoundaryLoop] = []
        for r in loop_rows:
            size = int(r[1])
            if len(r) != size + 2:
                raise MeshFormatError(f"loop {r[0]!r} declares {size} vertices, lists {len(r) - 2}")
            loops.append(BoundaryLoop(r[0], tuple(int(v) for v in r[2:])))
    except (ValueError, IndexError) as e:
        raise MeshFormatError(f"malformed mesh file: {e}")
    return IntrinsicMesh.from_arrays(n_vertices, triangles, edges, lengths, loops)


def write_mesh(m: IntrinsicMesh, path: Union[str, Path]) -> None:
    atomic_write_text(path, format_mesh(m))


def read_mesh(path: Union[str, Path]) -> IntrinsicMesh:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise MeshFormatError(f"cannot read mesh file {path}: {e}")
    return parse_mesh(text)
