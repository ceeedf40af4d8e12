"""
Growth records and their CSV form. Column order is fixed by RECORD_COLUMNS;
timings never reach the file, so reruns reproduce it byte for byte.

The table is preceded by `# key: value` lines naming the tool, its version,
the seed and the run config, so a records file read on its own still says
which run produced it.
"""

import csv
import io
import json
from itertools import dropwhile, takewhile
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import BaseModel, Field

from app.config import settings
from app.errors import InvalidParams, StorageError
from app.storage import atomic_write_text

RECORDS_FILE = "records.csv"
COMMENT = "#"


class GrowthRecord(BaseModel):
    n: int
    lambda1_graph: float
    sigma1: float
    l_boundary: float
    sigma1_times_l: float
    genus: int
    ratio: float
    kokarev_bound: float
    trial_quotient: float
    edge_trial_quotient: float
    mu_collar: float
    c_emp: float
    lower_bound: float
    local_margin: float
    inequality_margin: float
    neumann_double_piece: float
    residual_max: float
    timings: Dict[str, float] = Field(default_factory=dict, exclude=True)


RECORD_COLUMNS = [name for name in GrowthRecord.model_fields if name != "timings"]


class RunProvenance(BaseModel):
    """Where a set of records came from."""

    tool: str
    version: str
    seed: Optional[int] = None
    config: Dict[str, Any] = Field(default_factory=dict)

    def config_json(self) -> str:
        return json.dumps(self.config, sort_keys=True, separators=(",", ":"))


def run_provenance(config: Optional[Dict[str, Any]] = None, seed: Optional[int] = None) -> RunProvenance:
    return RunProvenance(tool=settings.app_name, version=settings.app_version, seed=seed, config=config or {})


def format_records_csv(
    records: Sequence[GrowthRecord],
    config: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
) -> str:
    if not records:
        raise InvalidParams("no records to export")
    meta = run_provenance(config, seed)
    buffer = io.StringIO()
    buffer.write(f"{COMMENT} tool: {meta.tool}\n")
    buffer.write(f"{COMMENT} version: {meta.version}\n")
    buffer.write(f"{COMMENT} seed: {json.dumps(meta.seed)}\n")
    buffer.write(f"{COMMENT} config: {meta.config_json()}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(RECORD_COLUMNS)
    for record in records:
        row = record.model_dump()
        writer.writerow([repr(row[name]) for name in RECORD_COLUMNS])
    return buffer.getvalue()


def parse_records_header(text: str) -> Optional[RunProvenance]:
    """The `# key: value` lines ahead of the table, or None for a file without them."""
    entries: Dict[str, str] = {}
    for line in takewhile(lambda row: row.startswith(COMMENT), text.splitlines()):
        key, sep, value = line.lstrip(COMMENT).strip().partition(":")
        if not sep:
            raise StorageError(f"malformed records header line {line!r}")
        entries[key.strip()] = value.strip()
    if not entries:
        return None
    try:
        return RunProvenance(
            tool=entries.get("tool", ""),
            version=entries.get("version", ""),
            seed=json.loads(entries.get("seed", "null")),
            config=json.loads(entries.get("config", "{}")),
        )
    except ValueError as e:
        raise StorageError(f"malformed records header: {e}")


def parse_records_csv(text: str) -> List[GrowthRecord]:
    body = dropwhile(lambda row: row.startswith(COMMENT), text.splitlines(keepends=True))
    reader = csv.DictReader(body)
    if reader.fieldnames != RECORD_COLUMNS:
        raise StorageError(f"unexpected records columns {reader.fieldnames}")
    return [GrowthRecord(**row) for row in reader]


def write_records_csv(
    records: Sequence[GrowthRecord],
    path: Union[str, Path],
    config: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
) -> None:
    atomic_write_text(path, format_records_csv(records, config, seed))


def _read_text(path: Union[str, Path]) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise StorageError(f"cannot read records file {path}: {e}")


def read_records_csv(path: Union[str, Path]) -> List[GrowthRecord]:
    return parse_records_csv(_read_text(path))


def read_records_header(path: Union[str, Path]) -> Optional[RunProvenance]:
    return parse_records_header(_read_text(path))
