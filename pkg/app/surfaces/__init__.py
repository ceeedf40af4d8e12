from .mesh import BoundaryLoop, IntrinsicMesh, Topology, euler_genus, genus_formula, mesh_from_planar_triangles
from .validation import MeshDiagnostic, assert_valid_mesh, check_loop_lengths, validate_mesh
from .primitives import build_flat_cylinder, build_flat_taper, build_polygon_disk, build_unit_square, cylinder_grid
from .weld import Seam, disjoint_union, extract_submesh, merge_vertices, weld
from .piece import FundamentalPiece, build_fundamental_piece, collar_mesh, piece_from_mesh
from .gluing import EdgeSlot, GluedSurface, double_piece, glue_surface
from .io import format_mesh, parse_mesh, read_mesh, write_mesh

__all__ = [
    "BoundaryLoop",
    "IntrinsicMesh",
    "Topology",
    "euler_genus",
    "genus_formula",
    "mesh_from_planar_triangles",
    "MeshDiagnostic",
    "assert_valid_mesh",
    "check_loop_lengths",
    "validate_mesh",
    "build_flat_cylinder",
    "build_flat_taper",
    "build_polygon_disk",
    "build_unit_square",
    "cylinder_grid",
    "Seam",
    "disjoint_union",
    "merge_vertices",
    "weld",
    "extract_submesh",
    "FundamentalPiece",
    "build_fundamental_piece",
    "collar_mesh",
    "piece_from_mesh",
    "EdgeSlot",
    "GluedSurface",
    "double_piece",
    "glue_surface",
    "format_mesh",
    "parse_mesh",
    "read_mesh",
    "write_mesh",
]
