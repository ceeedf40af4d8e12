import logging
from pathlib import Path
from typing import Optional

from pydantic import Field, model_validator

from app.config import settings
from app.graphs import generate_expander_family, laplacian_spectrum, read_graph, write_graph
from app.cli.router import CommandGroup
from app.cli.schemas import CommandRequest, IntList, print_values

logger = logging.getLogger(__name__)

group = CommandGroup()


class GraphGenRequest(CommandRequest):
    n: Optional[int] = Field(default=None, gt=0, description="number of vertices")
    sizes: Optional[IntList] = Field(default=None, description="comma-separated sizes; OUT is then a directory")
    k: int = Field(default_factory=lambda: settings.default_degree, gt=0, description="degree")
    seed: int = Field(default_factory=lambda: settings.default_seed, description="sampling seed")
    gap: float = Field(default_factory=lambda: settings.gap_threshold, gt=0, description="spectral gap threshold")
    max_attempts: int = Field(default_factory=lambda: settings.max_sampling_attempts, gt=0, description="pairing attempts per size")
    jobs: int = Field(default=1, ge=1, description="sizes sampled in parallel")
    out: str = Field(description="graph file, or directory with --sizes")

    @model_validator(mode="after")
    def one_size_source(self) -> "GraphGenRequest":
        if (self.n is None) == (self.sizes is None):
            raise ValueError("give exactly one of n and sizes")
        return self


class GraphSpectrumRequest(CommandRequest):
    graph: str = Field(description="graph file")
    count: Optional[int] = Field(default=None, gt=0, description="eigenvalues to print")


def family_file(out_dir: Path, n: int) -> Path:
    return out_dir / f"g{n}.txt"


@group.command("graph-gen", GraphGenRequest)
def graph_gen(request: GraphGenRequest) -> None:
    """Sample simple connected k-regular graphs with a spectral gap."""
    sizes = [request.n] if request.n is not None else request.sizes
    graphs = generate_expander_family(sizes, request.k, request.gap, request.seed, request.max_attempts, request.jobs)
    for graph in graphs:
        path = Path(request.out) if request.n is not None else family_file(Path(request.out), graph.n_vertices)
        write_graph(graph, path)
        print(f"{path} n={graph.n_vertices} k={graph.degree} lambda1={laplacian_spectrum(graph).lambda1:.12g}")


@group.command("graph-spectrum", GraphSpectrumRequest)
def graph_spectrum(request: GraphSpectrumRequest) -> None:
    """Print the Laplacian eigenvalues of a graph file, lambda_0 = 0 first."""
    spectrum = laplacian_spectrum(read_graph(request.graph))
    values = spectrum.eigenvalues if request.count is None else spectrum.eigenvalues[: request.count]
    print_values("lambda", values)
