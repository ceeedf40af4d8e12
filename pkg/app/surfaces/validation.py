import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from app.config import settings
from app.errors import MeshInvariantViolated, OrientationConflict
from .mesh import IntrinsicMesh

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeshDiagnostic:
    kind: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.location}: {self.message}"


def _half_edges(m: IntrinsicMesh):
    t = m.triangles
    tails = t[:, [0, 1, 2]].reshape(-1)
    heads = t[:, [1, 2, 0]].reshape(-1)
    return tails, heads


def validate_mesh(m: IntrinsicMesh) -> List[MeshDiagnostic]:
    """Check every mesh invariant; an empty list means the mesh is valid."""
    report: List[MeshDiagnostic] = []
    n = m.n_vertices
    t = m.triangles

    if t.size and (t.min() < 0 or t.max() >= n):
        report.append(MeshDiagnostic("IndexOutOfRange", "triangles", f"vertex ids must lie in [0, {n})"))
        return report
    repeated = np.flatnonzero((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 2] == t[:, 0]))
    for tri in repeated:
        report.append(MeshDiagnostic("RepeatedVertex", f"triangle {tri}", f"{t[tri].tolist()}"))

    unused = np.setdiff1d(np.arange(n), t.reshape(-1))
    for vertex in unused:
        report.append(MeshDiagnostic("UnreferencedVertex", f"vertex {vertex}", "belongs to no triangle"))

    tails, heads = _half_edges(m)
    lo, hi = np.minimum(tails, heads), np.maximum(tails, heads)
    keys = lo * n + hi
    unique_keys, counts = np.unique(keys, return_counts=True)
    for key in unique_keys[counts > 2]:
        report.append(
            MeshDiagnostic("NonManifoldEdge", f"edge ({key // n}, {key % n})", "shared by more than 2 triangles")
        )

    directed = tails * n + heads
    d_keys, d_counts = np.unique(directed, return_counts=True)
    for key in d_keys[d_counts > 1]:
        report.append(
            MeshDiagnostic(
                "InconsistentOrientation",
                f"half-edge ({key // n} -> {key % n})",
                "traversed in the same direction by two triangles",
            )
        )

    # Lengths: one positive length for every triangle edge, none left over.
    edge_keys = m.edges[:, 0] * n + m.edges[:, 1]
    for key in np.setdiff1d(unique_keys, edge_keys):
        report.append(MeshDiagnostic("MissingEdgeLength", f"edge ({key // n}, {key % n})", "no length given"))
    for key in np.setdiff1d(edge_keys, unique_keys):
        report.append(MeshDiagnostic("OrphanEdgeLength", f"edge ({key // n}, {key % n})", "belongs to no triangle"))
    for idx in np.flatnonzero(~(m.lengths > 0)):
        u, v = m.edges[idx]
        report.append(MeshDiagnostic("NonPositiveLength", f"edge ({u}, {v})", f"length {m.lengths[idx]!r}"))
    if any(d.kind == "MissingEdgeLength" for d in report):
        return report

    lengths = m.triangle_lengths
    margins = np.column_stack(
        [
            lengths[:, 1] + lengths[:, 2] - lengths[:, 0],
            lengths[:, 2] + lengths[:, 0] - lengths[:, 1],
            lengths[:, 0] + lengths[:, 1] - lengths[:, 2],
        ]
    ).min(axis=1)
    for tri in np.flatnonzero(margins <= 0):
        report.append(
            MeshDiagnostic("TriangleInequality", f"triangle {tri}", f"lengths {lengths[tri].tolist()} are not a triangle")
        )

    report.extend(_check_boundary_loops(m, unique_keys, counts, directed))
    return report


def _check_boundary_loops(m, unique_keys, counts, directed) -> List[MeshDiagnostic]:
    report: List[MeshDiagnostic] = []
    n = m.n_vertices
    boundary_keys = set(unique_keys[counts == 1].tolist())
    directed_set = set(directed.tolist())

    labels = [loop.label for loop in m.boundary_loops]
    for label in {l for l in labels if labels.count(l) > 1}:
        report.append(MeshDiagnostic("DuplicateLoopLabel", f"loop {label!r}", "label used more than once"))

    covered = {}
    for loop in m.boundary_loops:
        if len(loop) < 3:
            report.append(MeshDiagnostic("ShortLoop", f"loop {loop.label!r}", f"only {len(loop)} vertices"))
            continue
        for a, b in loop.segments().tolist():
            key = min(a, b) * n + max(a, b)
            where = f"loop {loop.label!r} segment ({a}, {b})"
            if key not in boundary_keys:
                report.append(MeshDiagnostic("LoopNotOnBoundary", where, "segment is not a boundary edge"))
                continue
            if a * n + b not in directed_set:
                report.append(MeshDiagnostic("LoopOrientation", where, "runs against the boundary half-edge"))
            if key in covered:
                report.append(MeshDiagnostic("LoopOverlap", where, f"edge already in loop {covered[key]!r}"))
            covered[key] = loop.label

    for key in sorted(boundary_keys - set(covered)):
        report.append(MeshDiagnostic("UncoveredBoundaryEdge", f"edge ({key // n}, {key % n})", "in no boundary loop"))
    return report


def assert_valid_mesh(m: IntrinsicMesh) -> None:
    report = validate_mesh(m)
    if not report:
        return
    for diagnostic in report[:20]:
        logger.error(str(diagnostic))
    if any(d.kind == "InconsistentOrientation" for d in report):
        raise OrientationConflict(f"{len(report)} mesh diagnostics, first: {report[0]}")
    raise MeshInvariantViolated(f"{len(report)} mesh diagnostics, first: {report[0]}")


def check_loop_lengths(m: IntrinsicMesh, expected: float = 1.0, tol: float = None) -> None:
    tol = settings.loop_length_tol if tol is None else tol
    for label in m.loop_labels:
        length = m.loop_length(label)
        if abs(length - expected) > tol:
            raise MeshInvariantViolated(f"loop {label!r} has length {length!r}, expected {expected} +/- {tol}")
