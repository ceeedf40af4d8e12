"""
Growth runs: for each size N sample an expander, sew the fundamental piece
along it, solve the first Steklov eigenvalue and check the run invariants.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.config import settings
from app.errors import InvariantViolation, PartialRunPersisted, SteklovError
from app.fem import EigenOptions, neumann_lambda1, sloshing_mu1, steklov_spectrum
from app.graphs import RegularGraph, laplacian_spectrum, sample_expander
from app.surfaces import (
    FundamentalPiece,
    build_fundamental_piece,
    collar_mesh,
    double_piece,
    euler_genus,
    genus_formula,
    glue_surface,
)
from .estimate_service import EstimateService, lower_bound
from .records import RECORDS_FILE, GrowthRecord, write_records_csv

logger = logging.getLogger(__name__)


class GrowthRunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k: int = Field(default_factory=lambda: settings.default_degree, ge=2)
    sizes: List[int] = Field(default_factory=lambda: [8, 12, 16, 24, 32])
    gap_threshold: float = Field(default_factory=lambda: settings.gap_threshold, gt=0)
    n_b: int = Field(default_factory=lambda: settings.piece_n_b, ge=8)
    resolution: int = Field(default_factory=lambda: settings.piece_resolution, ge=1)
    seed: int = Field(default_factory=lambda: settings.default_seed)
    max_attempts: int = Field(default_factory=lambda: settings.max_sampling_attempts, gt=0)
    eigen: EigenOptions = Field(default_factory=EigenOptions)
    jobs: int = Field(default=1, ge=1, exclude=True)
    out: Optional[str] = Field(default=None, exclude=True)

    @field_validator("sizes")
    @classmethod
    def sizes_ascending(cls, sizes: List[int]) -> List[int]:
        if not sizes:
            raise ValueError("at least one size is required")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("sizes must be strictly ascending")
        return sizes

    @model_validator(mode="after")
    def even_total_degree(self) -> "GrowthRunConfig":
        for n in self.sizes:
            if (n * self.k) % 2 != 0:
                raise ValueError(f"N*k = {n}*{self.k} is odd")
            if n <= self.k:
                raise ValueError(f"N = {n} is too small for a simple {self.k}-regular graph")
        return self


def check_kokarev(record: GrowthRecord, slack: Optional[float] = None) -> bool:
    """sigma_1 L stays below 8 pi (genus + 1), up to the discretisation slack."""
    slack = settings.kokarev_slack if slack is None else slack
    return record.sigma1_times_l <= 8.0 * math.pi * (record.genus + 1) * (1.0 + slack)


class PieceConstants(BaseModel):
    mu: float
    neumann_double_piece: float


class GrowthService:
    def __init__(self, config: GrowthRunConfig):
        self.config = config
        self._piece: Optional[FundamentalPiece] = None
        self._constants: Optional[PieceConstants] = None

    @property
    def piece(self) -> FundamentalPiece:
        if self._piece is None:
            self._piece = build_fundamental_piece(self.config.k, self.config.n_b, self.config.resolution)
        return self._piece

    @property
    def constants(self) -> PieceConstants:
        if self._constants is None:
            mu = sloshing_mu1(collar_mesh(self.piece), opts=self.config.eigen)
            neumann = neumann_lambda1(double_piece(self.piece), self.config.eigen)
            self._constants = PieceConstants(mu=mu, neumann_double_piece=neumann)
            logger.info(f"Piece constants: mu={mu:.8g}, doubled-piece Neumann lambda1={neumann:.8g}")
        return self._constants

    def prepare(self) -> PieceConstants:
        """Build the piece and its constants before any size runs, so parallel jobs share them."""
        return self.constants

    def sample_graph(self, n: int) -> RegularGraph:
        c = self.config
        return sample_expander(n, c.k, c.gap_threshold, c.seed, c.max_attempts)

    def run_size(self, n: int) -> GrowthRecord:
        c = self.config
        timings: Dict[str, float] = {}
        started = time.perf_counter()
        graph = self.sample_graph(n)
        graph_spectrum = laplacian_spectrum(graph)
        timings["graph"] = time.perf_counter() - started

        started = time.perf_counter()
        surface = glue_surface(self.piece, graph)
        timings["glue"] = time.perf_counter() - started

        started = time.perf_counter()
        spectrum = steklov_spectrum(surface.mesh, c.eigen)
        timings["solve"] = time.perf_counter() - started

        started = time.perf_counter()
        constants = self.constants
        estimates = EstimateService(surface, mu=constants.mu, opts=c.eigen)
        f = spectrum.eigenfunction(1)
        x = graph_spectrum.fiedler_vector
        trial = estimates.trial_report(x).quotient
        edge_trial = estimates.edge_trial_report(x).quotient
        local = estimates.verify_local_estimate(f)
        global_report = estimates.verify_global_estimate(f, graph_spectrum.lambda1)
        timings["estimates"] = time.perf_counter() - started

        sigma1 = spectrum.sigma1
        length = surface.mesh.total_boundary_length
        genus = euler_genus(surface.mesh).genus
        record = GrowthRecord(
            n=n,
            lambda1_graph=graph_spectrum.lambda1,
            sigma1=sigma1,
            l_boundary=length,
            sigma1_times_l=sigma1 * length,
            genus=genus,
            ratio=sigma1 / graph_spectrum.lambda1,
            kokarev_bound=8.0 * math.pi * (genus + 1),
            trial_quotient=trial,
            edge_trial_quotient=edge_trial,
            mu_collar=constants.mu,
            c_emp=global_report.c_emp,
            lower_bound=lower_bound(graph_spectrum.lambda1, constants.mu, global_report.c_emp, c.k),
            local_margin=local.margin,
            inequality_margin=global_report.inequality_margin,
            neumann_double_piece=constants.neumann_double_piece,
            residual_max=float(spectrum.residuals.max()),
            timings=timings,
        )
        self.check_record(record)
        logger.info(f"N={n}: sigma1={sigma1:.8g}, sigma1*L={record.sigma1_times_l:.8g}, genus={genus}")
        return record

    def check_record(self, record: GrowthRecord) -> None:
        n, k = record.n, self.config.k
        expected_genus = genus_formula(self.piece.genus0, k, n)
        if record.genus != expected_genus:
            raise InvariantViolation("genus", f"N={n}: mesh genus {record.genus} != formula {expected_genus}")
        if abs(record.l_boundary - n) > 1e-6:
            raise InvariantViolation("boundary-length", f"N={n}: L={record.l_boundary!r}")
        if record.lambda1_graph < self.config.gap_threshold:
            raise InvariantViolation("spectral-gap", f"N={n}: lambda1={record.lambda1_graph} below threshold")
        if record.lambda1_graph > n * k / (n - 1) + 1e-9:
            raise InvariantViolation("graph-trace", f"N={n}: lambda1={record.lambda1_graph} exceeds nk/(n-1)")
        if record.sigma1 > record.trial_quotient + settings.rayleigh_tol:
            raise InvariantViolation("rayleigh", f"N={n}: sigma1={record.sigma1} above trial quotient {record.trial_quotient}")
        if record.sigma1 > record.edge_trial_quotient + settings.rayleigh_tol:
            raise InvariantViolation(
                "rayleigh", f"N={n}: sigma1={record.sigma1} above edge trial quotient {record.edge_trial_quotient}"
            )
        if record.sigma1 < record.lower_bound - settings.lower_bound_tol:
            raise InvariantViolation("lower-bound", f"N={n}: sigma1={record.sigma1} below {record.lower_bound}")
        if record.local_margin < -settings.lower_bound_tol:
            raise InvariantViolation("local-estimate", f"N={n}: margin {record.local_margin}")
        if record.inequality_margin < -settings.lower_bound_tol:
            raise InvariantViolation("global-estimate", f"N={n}: margin {record.inequality_margin}")
        if not check_kokarev(record):
            raise InvariantViolation("kokarev", f"N={n}: sigma1*L={record.sigma1_times_l} above {record.kokarev_bound}")

    def run(self) -> List[GrowthRecord]:
        c = self.config
        logger.info(f"Growth run k={c.k}, sizes={c.sizes}, seed={c.seed}, jobs={c.jobs}")
        self.prepare()

        records: List[GrowthRecord] = []
        try:
            if c.jobs > 1:
                with ThreadPoolExecutor(max_workers=c.jobs) as pool:
                    futures = [pool.submit(self.run_size, n) for n in c.sizes]
                    for future in futures:
                        records.append(future.result())
            else:
                for n in c.sizes:
                    records.append(self.run_size(n))
        except SteklovError as e:
            if c.out is None:
                raise
            self._persist_partial(records, e)
        return records

    def _persist_partial(self, records: List[GrowthRecord], cause: SteklovError) -> None:
        path = Path(self.config.out) / RECORDS_FILE
        if records:
            write_records_csv(records, path, self.config.model_dump(mode="json"), self.config.seed)
        logger.error(f"Growth run aborted after {len(records)} sizes: {cause}")
        raise PartialRunPersisted(
            f"run aborted after {len(records)} of {len(self.config.sizes)} sizes ({type(cause).__name__}: {cause})",
            path=str(path),
            cause=cause,
        )


def run_growth(config: GrowthRunConfig) -> List[GrowthRecord]:
    return GrowthService(config).run()
