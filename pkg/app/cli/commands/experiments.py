import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import Field, field_validator

from app.config import settings
from app.errors import InvariantViolation
from app.fem import steklov_spectrum
from app.graphs import laplacian_spectrum, read_graph
from app.services import (
    EstimateService,
    GrowthRunConfig,
    dump_report,
    export_all,
    export_report,
    load_report,
    lower_bound,
    read_records_csv,
    read_records_header,
    run_growth,
)
from app.services.report_service import REPORT_FILE
from app.storage import atomic_write_text
from app.surfaces import build_fundamental_piece, glue_surface, piece_from_mesh, read_mesh
from app.cli.router import CommandGroup
from app.cli.schemas import CommandRequest, EigenRequest, IntList, print_json

logger = logging.getLogger(__name__)

group = CommandGroup()

REPORT_FORMATS = ("csv", "json", "svg")


class GrowthRequest(EigenRequest):
    k: int = Field(default_factory=lambda: settings.default_degree, ge=2, description="graph degree")
    sizes: IntList = Field(default_factory=lambda: [8, 12, 16, 24, 32], description="comma-separated graph sizes")
    seed: int = Field(default_factory=lambda: settings.default_seed, description="sampling seed")
    gap: float = Field(default_factory=lambda: settings.gap_threshold, gt=0, description="spectral gap threshold")
    nb: int = Field(default_factory=lambda: settings.piece_n_b, ge=8, description="vertices per boundary loop")
    resolution: int = Field(default_factory=lambda: settings.piece_resolution, ge=1, description="rings per unit tube")
    max_attempts: int = Field(default_factory=lambda: settings.max_sampling_attempts, gt=0, description="pairing attempts per size")
    jobs: int = Field(default=1, ge=1, description="sizes run in parallel")
    out: str = Field(default_factory=lambda: settings.runs_dir, description="run directory")

    def run_config(self) -> GrowthRunConfig:
        return GrowthRunConfig(
            k=self.k,
            sizes=self.sizes,
            gap_threshold=self.gap,
            n_b=self.nb,
            resolution=self.resolution,
            seed=self.seed,
            max_attempts=self.max_attempts,
            eigen=self.eigen_options(),
            jobs=self.jobs,
            out=self.out,
        )


class VerifyRequest(EigenRequest):
    graph: str = Field(description="graph file")
    piece: Optional[str] = Field(default=None, description="IMESH file written by piece-build; built from NB and RESOLUTION otherwise")
    nb: int = Field(default_factory=lambda: settings.piece_n_b, ge=8, description="vertices per boundary loop")
    resolution: int = Field(default_factory=lambda: settings.piece_resolution, ge=1, description="rings per unit tube")
    offset: int = Field(default=0, description="rotational twist of every seam")
    out: Optional[str] = Field(default=None, description="JSON file for the verification report")


class ReportRequest(CommandRequest):
    records: str = Field(description="records.csv of a growth run")
    out: Optional[str] = Field(default=None, description="output directory; the records' directory by default")
    formats: List[str] = Field(default_factory=lambda: ["json", "svg"], description="comma-separated subset of csv,json,svg")

    @field_validator("formats", mode="before")
    @classmethod
    def split_formats(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [part.strip() for part in value.split(",") if part.strip()]
        return value

    @field_validator("formats")
    @classmethod
    def known_formats(cls, value: List[str]) -> List[str]:
        unknown = [fmt for fmt in value if fmt not in REPORT_FORMATS]
        if unknown or not value:
            raise ValueError(f"formats must be a nonempty subset of {list(REPORT_FORMATS)}, got {value}")
        return value


@group.command("growth", GrowthRequest)
def growth(request: GrowthRequest) -> None:
    """Run sigma_1 growth over a family of expanders and write records.csv, report.json and growth.svg."""
    config = request.run_config()
    records = run_growth(config)
    for record in records:
        print(
            f"N={record.n} lambda1={record.lambda1_graph:.8g} sigma1={record.sigma1:.8g} "
            f"sigma1_L={record.sigma1_times_l:.8g} genus={record.genus} ratio={record.ratio:.6g}"
        )
    for path in export_all(records, request.out, config.model_dump(mode="json"), config.seed):
        print(path)


@group.command("verify", VerifyRequest)
def verify(request: VerifyRequest) -> None:
    """Check the collar and gluing estimates on the surface sewn along a graph."""
    graph = read_graph(request.graph)
    if request.piece:
        piece = piece_from_mesh(read_mesh(request.piece))
    else:
        piece = build_fundamental_piece(graph.degree, request.nb, request.resolution)
    surface = glue_surface(piece, graph, request.offset)
    opts = request.eigen_options()
    spectrum = steklov_spectrum(surface.mesh, opts)
    graph_spectrum = laplacian_spectrum(graph)

    estimates = EstimateService(surface, opts=opts)
    f = spectrum.eigenfunction(1)
    local = estimates.verify_local_estimate(f)
    global_report = estimates.verify_global_estimate(f, graph_spectrum.lambda1)
    report: Dict[str, Any] = {
        "sigma1": spectrum.sigma1,
        "lambda1_graph": graph_spectrum.lambda1,
        "mu_collar": estimates.mu,
        "trial_quotient": estimates.trial_report(graph_spectrum.fiedler_vector).quotient,
        "edge_trial_quotient": estimates.edge_trial_report(graph_spectrum.fiedler_vector).quotient,
        "lower_bound": lower_bound(graph_spectrum.lambda1, estimates.mu, global_report.c_emp, graph.degree),
        "local_estimate": local.model_dump(),
        "global_estimate": global_report.model_dump(exclude={"x", "edge_ratios"}),
    }
    print_json(report)
    if request.out:
        atomic_write_text(request.out, dump_report(report))

    if not local.passed:
        raise InvariantViolation("local-estimate", f"collar estimate fails with margin {local.margin:.3g}")
    if not global_report.passed:
        raise InvariantViolation("global-estimate", f"gluing inequality fails with margin {global_report.inequality_margin:.3g}")


@group.command("report", ReportRequest)
def report(request: ReportRequest) -> None:
    """Re-export a growth run's records; the config echo and seed come from the records header."""
    records = read_records_csv(request.records)
    source_dir = Path(request.records).parent
    out_dir = Path(request.out) if request.out else source_dir
    config: Dict[str, Any] = {}
    seed = None
    header = read_records_header(request.records)
    previous = source_dir / REPORT_FILE
    if header is not None:
        config, seed = header.config, header.seed
    elif previous.is_file():
        existing = load_report(previous)
        config = existing.get("config", {})
        seed = existing.get("seed")
    else:
        logger.warning(f"{request.records} has no header and no {REPORT_FILE} beside it; the re-export carries no config echo")
    for fmt in request.formats:
        print(export_report(records, fmt, out_dir, config, seed))
