"""
Disjoint unions and vertex identification of intrinsic meshes.

Welding two boundary loops reverses their orientation: vertex a[i] of the
first loop is merged with b[(offset - i) mod n] of the second, so the two
boundary half-edges of a seam edge run in opposite directions and the result
stays orientable.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from app.config import settings
from app.errors import MeshInvariantViolated, OrientationConflict
from .mesh import BoundaryLoop, IntrinsicMesh

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Seam:
    first: str
    second: str
    offset: int = 0


def disjoint_union(parts: Sequence[Tuple[str, IntrinsicMesh]]) -> Tuple[IntrinsicMesh, np.ndarray]:
    """
    Place meshes side by side. Loop `label` of part `name` becomes `name/label`.
    Returns the union and the vertex offset of each part.
    """
    offsets = np.zeros(len(parts), dtype=np.int64)
    triangles, edges, lengths, loops = [], [], [], []
    total = 0
    for idx, (name, mesh) in enumerate(parts):
        offsets[idx] = total
        triangles.append(mesh.triangles + total)
        edges.append(mesh.edges + total)
        lengths.append(mesh.lengths)
        for loop in mesh.boundary_loops:
            loops.append(BoundaryLoop(f"{name}/{loop.label}", tuple(v + total for v in loop.vertices)))
        total += mesh.n_vertices
    union = IntrinsicMesh.from_arrays(
        total,
        np.concatenate(triangles),
        np.concatenate(edges),
        np.concatenate(lengths),
        loops,
    )
    return union, offsets


def merge_vertices(
    mesh: IntrinsicMesh,
    pairs,
    boundary_loops: Sequence[BoundaryLoop],
    tol: Optional[float] = None,
) -> Tuple[IntrinsicMesh, np.ndarray]:
    """
    Identify the vertex pairs (P, 2) and return the merged mesh plus the old -> new id map.

    `boundary_loops` are given in old ids. Merged classes take the rank of
    their smallest member, so untouched vertices keep their relative order.
    """
    tol = settings.loop_length_tol if tol is None else tol
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    n = mesh.n_vertices
    link = sparse.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, component = connected_components(link, directed=False)

    smallest = np.full(component.max() + 1, n, dtype=np.int64)
    np.minimum.at(smallest, component, np.arange(n))
    representative = smallest[component]
    _, labels = np.unique(representative, return_inverse=True)
    labels = labels.astype(np.int64)
    n_merged = int(labels.max()) + 1 if n else 0

    triangles = labels[mesh.triangles]
    if np.any((triangles[:, 0] == triangles[:, 1]) | (triangles[:, 1] == triangles[:, 2]) | (triangles[:, 2] == triangles[:, 0])):
        raise MeshInvariantViolated("identification collapses a triangle")

    tails = triangles.reshape(-1)
    heads = triangles[:, [1, 2, 0]].reshape(-1)
    directed = tails * n_merged + heads
    uniq, counts = np.unique(directed, return_counts=True)
    if np.any(counts > 1):
        key = int(uniq[np.argmax(counts > 1)])
        raise OrientationConflict(f"half-edge ({key // n_merged} -> {key % n_merged}) appears twice after identification")

    edges = np.sort(labels[mesh.edges], axis=1)
    if np.any(edges[:, 0] == edges[:, 1]):
        raise MeshInvariantViolated("identification collapses an edge")
    keys = edges[:, 0] * n_merged + edges[:, 1]
    order = np.argsort(keys, kind="stable")
    keys, lengths = keys[order], mesh.lengths[order]
    first = np.ones(len(keys), dtype=bool)
    first[1:] = keys[1:] != keys[:-1]
    group = np.cumsum(first) - 1
    kept = lengths[first]
    mismatch = np.abs(lengths - kept[group])
    if np.any(mismatch > tol * np.maximum(1.0, lengths)):
        bad = int(np.argmax(mismatch))
        raise MeshInvariantViolated(
            f"seam edge ({keys[bad] // n_merged}, {keys[bad] % n_merged}) has lengths "
            f"{lengths[bad]!r} and {kept[group[bad]]!r}"
        )
    merged_keys = keys[first]

    loops = [BoundaryLoop(l.label, tuple(int(labels[v]) for v in l.vertices)) for l in boundary_loops]
    merged = IntrinsicMesh.from_arrays(
        n_merged,
        triangles,
        np.column_stack([merged_keys // n_merged, merged_keys % n_merged]),
        kept,
        loops,
    )
    logger.debug(f"Merged {n} vertices into {n_merged} ({len(pairs)} identifications)")
    return merged, labels


def seam_pairs(mesh: IntrinsicMesh, seam: Seam) -> np.ndarray:
    """Vertex pairs identified by one seam, after checking the two loops match."""
    a = np.asarray(mesh.loop(seam.first).vertices, dtype=np.int64)
    b = np.asarray(mesh.loop(seam.second).vertices, dtype=np.int64)
    if len(a) != len(b):
        raise MeshInvariantViolated(
            f"cannot weld {seam.first!r} ({len(a)} vertices) to {seam.second!r} ({len(b)} vertices)"
        )
    idx = np.arange(len(a))
    partner = b[(seam.offset - idx) % len(b)]
    return np.column_stack([a, partner])


def weld(mesh: IntrinsicMesh, seams: Sequence[Seam], rename: Optional[Dict[str, str]] = None) -> Tuple[IntrinsicMesh, np.ndarray]:
    """
    Weld boundary loops pairwise. Welded loops disappear; the remaining ones
    keep their order and are relabelled through `rename` when given.
    """
    rename = rename or {}
    used = set()
    pairs: List[np.ndarray] = []
    for seam in seams:
        for label in (seam.first, seam.second):
            if label in used:
                raise MeshInvariantViolated(f"loop {label!r} is welded twice")
            used.add(label)
        pairs.append(seam_pairs(mesh, seam))

    loops = [
        BoundaryLoop(rename.get(loop.label, loop.label), loop.vertices)
        for loop in mesh.boundary_loops
        if loop.label not in used
    ]
    all_pairs = np.concatenate(pairs) if pairs else np.zeros((0, 2), dtype=np.int64)
    return merge_vertices(mesh, all_pairs, loops)


def extract_submesh(
    mesh: IntrinsicMesh,
    vertices,
    boundary_loops: Sequence[BoundaryLoop] = (),
) -> Tuple[IntrinsicMesh, np.ndarray]:
    """
    Triangles spanned by `vertices`, renumbered in the given vertex order.
    Loops are given in old ids. Returns the submesh and its triangle mask in `mesh`.
    """
    vertices = np.asarray(vertices, dtype=np.int64).reshape(-1)
    new_id = np.full(mesh.n_vertices, -1, dtype=np.int64)
    new_id[vertices] = np.arange(vertices.size)
    mask = np.all(new_id[mesh.triangles] >= 0, axis=1)
    edge_mask = np.all(new_id[mesh.edges] >= 0, axis=1)
    loops = [BoundaryLoop(l.label, tuple(int(new_id[v]) for v in l.vertices)) for l in boundary_loops]
    sub = IntrinsicMesh.from_arrays(
        vertices.size,
        new_id[mesh.triangles[mask]],
        new_id[mesh.edges[edge_mask]],
        mesh.lengths[edge_mask],
        loops,
    )
    return sub, mask
