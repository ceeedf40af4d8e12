import io
import json
import logging
import math
import platform
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import scipy
from pydantic import BaseModel

from app.config import settings
from app.errors import InsufficientRecords, InvalidParams, StorageError
from app.storage import atomic_write_bytes, atomic_write_text
from .records import RECORDS_FILE, GrowthRecord, run_provenance, write_records_csv

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
REPORT_FILE = "report.json"
PLOT_FILE = "growth.svg"
GENUS0_REFERENCE = 4.0 * math.pi


class RatioReport(BaseModel):
    sizes: List[int]
    ratios: List[float]
    alpha_hat: float
    beta_hat: float
    spread: float
    spread_ceiling: float
    within_ceiling: bool


def comparison_ratio_report(records: Sequence[GrowthRecord]) -> RatioReport:
    """Empirical pinch of sigma_1 / lambda_1 across the run."""
    if len(records) < 2:
        raise InsufficientRecords(f"need at least 2 records, got {len(records)}")
    ratios = [r.ratio for r in records]
    alpha = min(ratios)
    beta = max(ratios)
    if alpha <= 0:
        raise InvalidParams(f"non-positive ratio {alpha} in run")
    spread = beta / alpha
    return RatioReport(
        sizes=[r.n for r in records],
        ratios=ratios,
        alpha_hat=alpha,
        beta_hat=beta,
        spread=spread,
        spread_ceiling=settings.ratio_spread_ceiling,
        within_ceiling=spread <= settings.ratio_spread_ceiling,
    )


def growth_slope(records: Sequence[GrowthRecord]) -> float:
    """Least-squares slope of sigma_1 L against N."""
    if len(records) < 2:
        raise InsufficientRecords(f"need at least 2 records for a slope, got {len(records)}")
    n = np.array([r.n for r in records], dtype=float)
    y = np.array([r.sigma1_times_l for r in records])
    slope, _ = np.polyfit(n, y, 1)
    return float(slope)


def growth_dips(records: Sequence[GrowthRecord]) -> float:
    """Largest relative drop of sigma_1 L between consecutive sizes; 0 when nondecreasing."""
    ordered = sorted(records, key=lambda r: r.n)
    worst = 0.0
    for prev, cur in zip(ordered, ordered[1:]):
        if prev.sigma1_times_l > 0:
            worst = max(worst, (prev.sigma1_times_l - cur.sigma1_times_l) / prev.sigma1_times_l)
    return worst


class ReportService:
    """Writes the artifacts of one run directory."""

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)

    def build_report(
        self,
        records: Sequence[GrowthRecord],
        config: Optional[Dict[str, Any]] = None,
        seed: Optional[int] = None,
    ) -> Dict[str, Any]:
        if not records:
            raise InvalidParams("no records to report")
        report: Dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "tool": {"name": settings.app_name, "version": settings.app_version},
            "environment": {
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "config": config or {},
            "seed": seed,
            "records": [r.model_dump() for r in records],
            "mu_collar": records[0].mu_collar,
            "neumann_double_piece": records[0].neumann_double_piece,
            "genus0_reference": GENUS0_REFERENCE,
            "kokarev_pass": all(
                r.sigma1_times_l <= r.kokarev_bound * (1.0 + settings.kokarev_slack) for r in records
            ),
        }
        if len(records) >= 2:
            report["ratio_report"] = comparison_ratio_report(records).model_dump()
            report["growth_slope"] = growth_slope(records)
            report["growth_max_dip"] = growth_dips(records)
        return report

    def export_csv(
        self,
        records: Sequence[GrowthRecord],
        config: Optional[Dict[str, Any]] = None,
        seed: Optional[int] = None,
    ) -> Path:
        path = self.out_dir / RECORDS_FILE
        write_records_csv(records, path, config, seed)
        logger.info(f"Wrote {len(records)} records to {path}")
        return path

    def export_json(self, report: Dict[str, Any]) -> Path:
        path = self.out_dir / REPORT_FILE
        atomic_write_text(path, dump_report(report))
        logger.info(f"Wrote report to {path}")
        return path

    def export_svg(
        self,
        records: Sequence[GrowthRecord],
        config: Optional[Dict[str, Any]] = None,
        seed: Optional[int] = None,
    ) -> Path:
        if not records:
            raise InvalidParams("no records to plot")
        path = self.out_dir / PLOT_FILE
        atomic_write_bytes(path, render_growth_svg(records, config, seed))
        logger.info(f"Wrote plot to {path}")
        return path


def dump_report(report: Dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def load_report(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, ValueError) as e:
        raise StorageError(f"cannot read report {path}: {e}")


def render_growth_svg(
    records: Sequence[GrowthRecord],
    config: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
) -> bytes:
    """
    Plot sigma_1 L against N. The SVG metadata carries the tool version in
    `Creator` and a JSON object with the seed, version and config in
    `Description`.
    """
    meta = run_provenance(config, seed)
    metadata = {
        "Title": "sigma_1 L growth",
        "Creator": f"{meta.tool} {meta.version}",
        "Description": json.dumps(meta.model_dump(), sort_keys=True),
        "Date": None,
    }
    ordered = sorted(records, key=lambda r: r.n)
    n = np.array([r.n for r in ordered], dtype=float)
    y = np.array([r.sigma1_times_l for r in ordered])
    bound = np.array([r.kokarev_bound for r in ordered])

    with plt.rc_context({"svg.hashsalt": "steklov-growth", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        ax.plot(n, y, "o", color="tab:blue", label=r"$\sigma_1 L$")
        if len(ordered) >= 2:
            slope, intercept = np.polyfit(n, y, 1)
            ax.plot(n, slope * n + intercept, "-", color="tab:blue", alpha=0.6, label=f"fit, slope {slope:.4g}")
        ax.plot(n, bound, "--", color="tab:red", label=r"$8\pi(\gamma+1)$")
        ax.set_yscale("log")
        ax.set_xlabel("N")
        ax.set_ylabel(r"$\sigma_1 \cdot L$")
        ax.legend(loc="best", frameon=False)
        fig.tight_layout()
        buffer = io.BytesIO()
        fig.savefig(buffer, format="svg", metadata=metadata)
        plt.close(fig)
    return buffer.getvalue()


def export_report(
    records: Sequence[GrowthRecord],
    fmt: str,
    out_dir: Union[str, Path],
    config: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
) -> Path:
    if not records:
        raise InvalidParams("no records to export")
    service = ReportService(out_dir)
    if fmt == "csv":
        return service.export_csv(records, config, seed)
    if fmt == "json":
        return service.export_json(service.build_report(records, config, seed))
    if fmt == "svg":
        return service.export_svg(records, config, seed)
    raise InvalidParams(f"unknown report format {fmt!r}")


def export_all(
    records: Sequence[GrowthRecord],
    out_dir: Union[str, Path],
    config: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
) -> List[Path]:
    return [export_report(records, fmt, out_dir, config, seed) for fmt in ("csv", "json", "svg")]
