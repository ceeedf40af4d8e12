import logging

from pydantic import Field

from app.config import settings
from app.graphs import read_graph
from app.surfaces import (
    IntrinsicMesh,
    build_fundamental_piece,
    euler_genus,
    genus_formula,
    glue_surface,
    piece_from_mesh,
    read_mesh,
    write_mesh,
)
from app.cli.router import CommandGroup
from app.cli.schemas import CommandRequest

logger = logging.getLogger(__name__)

group = CommandGroup()


class PieceBuildRequest(CommandRequest):
    k: int = Field(default_factory=lambda: settings.default_degree, ge=2, description="number of sewing loops")
    nb: int = Field(default_factory=lambda: settings.piece_n_b, ge=8, description="vertices per boundary loop")
    resolution: int = Field(default_factory=lambda: settings.piece_resolution, ge=1, description="rings per unit tube")
    out: str = Field(description="IMESH file")


class GlueRequest(CommandRequest):
    piece: str = Field(description="IMESH file written by piece-build")
    graph: str = Field(description="graph file")
    out: str = Field(description="IMESH file")
    offset: int = Field(default=0, description="rotational twist of every seam, in boundary vertices")


def describe(m: IntrinsicMesh) -> str:
    topology = euler_genus(m)
    return (
        f"vertices={m.n_vertices} triangles={m.n_triangles} chi={topology.chi} "
        f"loops={topology.b} genus={topology.genus} length={m.total_boundary_length:.12g}"
    )


@group.command("piece-build", PieceBuildRequest)
def piece_build(request: PieceBuildRequest) -> None:
    """Build the fundamental piece and write it as IMESH."""
    piece = build_fundamental_piece(request.k, request.nb, request.resolution)
    write_mesh(piece.mesh, request.out)
    print(f"{request.out} {describe(piece.mesh)}")


@group.command("glue", GlueRequest)
def glue(request: GlueRequest) -> None:
    """Sew one copy of the piece per graph vertex along the graph's edges."""
    piece = piece_from_mesh(read_mesh(request.piece))
    graph = read_graph(request.graph)
    surface = glue_surface(piece, graph, request.offset)
    write_mesh(surface.mesh, request.out)
    expected = genus_formula(piece.genus0, graph.degree, graph.n_vertices)
    print(f"{request.out} {describe(surface.mesh)} genus_formula={expected}")
