import json
import math
from typing import Optional
from xml.etree import ElementTree

import pytest

from app.config import settings
from app.errors import InsufficientRecords, InvalidParams, PartialRunPersisted, SamplingExhausted, StorageError
from app.services import (
    RECORD_COLUMNS,
    GrowthRecord,
    GrowthRunConfig,
    GrowthService,
    ReportService,
    check_kokarev,
    comparison_ratio_report,
    dump_report,
    export_all,
    export_report,
    growth_dips,
    growth_slope,
    load_report,
    read_records_csv,
    read_records_header,
    run_growth,
    write_records_csv,
)
from app.services.records import format_records_csv, parse_records_csv, parse_records_header
from app.services.report_service import GENUS0_REFERENCE, SCHEMA_VERSION, render_growth_svg


def make_record(n: int, sigma1: float = 0.3, lambda1: float = 1.0, genus: Optional[int] = None) -> GrowthRecord:
    genus = n + 1 if genus is None else genus
    return GrowthRecord(
        n=n,
        lambda1_graph=lambda1,
        sigma1=sigma1,
        l_boundary=float(n),
        sigma1_times_l=sigma1 * n,
        genus=genus,
        ratio=sigma1 / lambda1,
        kokarev_bound=8.0 * math.pi * (genus + 1),
        trial_quotient=1.0,
        edge_trial_quotient=lambda1 / 2.0,
        mu_collar=6.0,
        c_emp=0.4,
        lower_bound=0.1,
        local_margin=0.5,
        inequality_margin=0.2,
        neumann_double_piece=3.0,
        residual_max=1e-13,
        timings={"solve": 0.25},
    )


SYNTHETIC = [make_record(8, 0.30, 1.2), make_record(12, 0.28, 1.0), make_record(16, 0.29, 1.1)]

SMALL_RUN = dict(k=3, sizes=[6, 8], n_b=8, resolution=2, seed=7)

DC = "{http://purl.org/dc/elements/1.1/}"


@pytest.fixture(scope="module")
def small_run():
    config = GrowthRunConfig(**SMALL_RUN)
    return config, run_growth(config)


class TestGrowthRunConfig:
    def test_defaults(self):
        config = GrowthRunConfig()
        assert config.k == 4
        assert config.sizes == [8, 12, 16, 24, 32]
        assert config.gap_threshold == 0.2

    def test_unknown_key(self):
        with pytest.raises(ValueError):
            GrowthRunConfig(degree=4)

    def test_sizes_must_ascend(self):
        with pytest.raises(ValueError):
            GrowthRunConfig(sizes=[12, 8])

    def test_odd_total_degree(self):
        with pytest.raises(ValueError):
            GrowthRunConfig(k=3, sizes=[7])

    def test_loop_vertices(self):
        assert GrowthRunConfig(n_b=9).n_b == 9
        with pytest.raises(ValueError):
            GrowthRunConfig(n_b=7)

    def test_echo_leaves_out_paths(self):
        dumped = GrowthRunConfig(jobs=3, out="runs/x").model_dump()
        assert "jobs" not in dumped and "out" not in dumped
        assert GrowthRunConfig(**dumped) == GrowthRunConfig()


class TestKokarev:
    def test_below_bound(self):
        assert check_kokarev(make_record(8))

    def test_above_bound(self):
        record = make_record(8, sigma1=100.0, genus=0)
        assert not check_kokarev(record)


class TestGrowthRun:
    def test_records(self, small_run):
        config, records = small_run
        assert [r.n for r in records] == [6, 8]
        for r in records:
            assert r.genus == 1 + r.n * 3 // 2 - r.n
            assert r.l_boundary == pytest.approx(r.n)
            assert r.lambda1_graph >= config.gap_threshold
            assert r.sigma1 <= min(r.trial_quotient, r.edge_trial_quotient) + 1e-8
            assert r.sigma1 >= r.lower_bound - 1e-6
            assert r.trial_quotient == pytest.approx(1.0, rel=1e-10)
            assert r.edge_trial_quotient == pytest.approx(r.lambda1_graph / 2.0, rel=1e-10)
            assert r.residual_max < 1e-8
            assert set(r.timings) == {"graph", "glue", "solve", "estimates"}

    def test_piece_constants_shared(self, small_run):
        _, records = small_run
        assert records[0].mu_collar == records[1].mu_collar
        assert records[0].neumann_double_piece > 0

    def test_partial_run_persisted(self, tmp_path, monkeypatch):
        original = GrowthService.sample_graph

        def fail_at_eight(self, n):
            if n == 8:
                raise SamplingExhausted("no graph")
            return original(self, n)

        monkeypatch.setattr(GrowthService, "sample_graph", fail_at_eight)
        config = GrowthRunConfig(**SMALL_RUN, out=str(tmp_path))
        with pytest.raises(PartialRunPersisted) as info:
            GrowthService(config).run()
        assert isinstance(info.value.cause, SamplingExhausted)
        assert info.value.path == str(tmp_path / "records.csv")
        assert [r.n for r in read_records_csv(tmp_path / "records.csv")] == [6]

    def test_failure_without_out_propagates(self, monkeypatch):
        def always_fail(self, n):
            raise SamplingExhausted("no graph")

        monkeypatch.setattr(GrowthService, "sample_graph", always_fail)
        with pytest.raises(SamplingExhausted):
            run_growth(GrowthRunConfig(**SMALL_RUN))

    @pytest.mark.slow
    def test_rerun_and_parallel_run_reproduce_bytes(self, small_run):
        config, records = small_run
        again = run_growth(config)
        parallel = run_growth(config.model_copy(update={"jobs": 2}))
        assert format_records_csv(again) == format_records_csv(records)
        assert format_records_csv(parallel) == format_records_csv(records)

    @pytest.mark.slow
    def test_default_growth_run(self, tmp_path):
        records = run_growth(GrowthRunConfig(out=str(tmp_path)))
        assert [r.n for r in records] == [8, 12, 16, 24, 32]
        assert growth_slope(records) > 0
        assert growth_dips(records) <= 0.1
        report = comparison_ratio_report(records)
        assert report.within_ceiling
        assert report.alpha_hat > 0
        assert all(check_kokarev(r) for r in records)


class TestRecordsFile:
    def test_columns(self):
        text = format_records_csv(SYNTHETIC)
        lines = [line for line in text.splitlines() if not line.startswith("#")]
        assert lines[0].split(",") == RECORD_COLUMNS
        assert len(lines) == 4
        assert "timings" not in lines[0]

    def test_header_describes_run(self, tmp_path):
        path = tmp_path / "records.csv"
        config = {"k": 4, "sizes": [8, 12, 16], "gap_threshold": 0.2}
        write_records_csv(SYNTHETIC, path, config, 7)
        lines = path.read_text().splitlines()
        assert lines[:4] == [
            f"# tool: {settings.app_name}",
            f"# version: {settings.app_version}",
            "# seed: 7",
            '# config: {"gap_threshold":0.2,"k":4,"sizes":[8,12,16]}',
        ]
        header = read_records_header(path)
        assert header.config == config
        assert header.seed == 7
        assert header.version == settings.app_version
        assert len(read_records_csv(path)) == 3

    def test_file_without_header(self):
        text = format_records_csv(SYNTHETIC)
        table = "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))
        assert parse_records_header(table) is None
        assert len(parse_records_csv(table)) == 3

    def test_malformed_header(self):
        with pytest.raises(StorageError):
            parse_records_header("# seed: {oops\n")

    def test_round_trip(self, tmp_path):
        path = tmp_path / "records.csv"
        write_records_csv(SYNTHETIC, path)
        again = read_records_csv(path)
        assert [r.model_dump() for r in again] == [r.model_dump() for r in SYNTHETIC]
        assert format_records_csv(again) == path.read_text()

    def test_empty(self):
        with pytest.raises(InvalidParams):
            format_records_csv([])

    def test_wrong_columns(self):
        with pytest.raises(StorageError):
            parse_records_csv("n,sigma1\n8,0.3\n")


class TestRatioReport:
    def test_values(self):
        report = comparison_ratio_report(SYNTHETIC)
        assert report.sizes == [8, 12, 16]
        assert report.alpha_hat == pytest.approx(0.25)
        assert report.beta_hat == pytest.approx(0.28)
        assert report.spread == pytest.approx(0.28 / 0.25)
        assert report.within_ceiling

    def test_needs_two_records(self):
        with pytest.raises(InsufficientRecords):
            comparison_ratio_report(SYNTHETIC[:1])

    def test_slope(self):
        records = [make_record(n, sigma1=0.25) for n in (8, 12, 16)]
        assert growth_slope(records) == pytest.approx(0.25)

    def test_dips(self):
        assert growth_dips([make_record(8, 0.3), make_record(12, 0.3)]) == 0.0
        assert growth_dips([make_record(8, 0.3), make_record(12, 0.15)]) == pytest.approx(0.25)


class TestReportExport:
    def test_report_fields(self):
        report = ReportService("unused").build_report(SYNTHETIC, {"k": 4}, 7)
        assert report["schema_version"] == SCHEMA_VERSION == 1
        assert report["config"] == {"k": 4}
        assert report["seed"] == 7
        assert report["genus0_reference"] == pytest.approx(GENUS0_REFERENCE)
        assert report["kokarev_pass"] is True
        assert len(report["records"]) == 3
        assert "timings" not in report["records"][0]
        assert "ratio_report" in report and "growth_slope" in report

    def test_export_all(self, tmp_path):
        paths = export_all(SYNTHETIC, tmp_path, {"k": 4}, 7)
        assert sorted(p.name for p in paths) == ["growth.svg", "records.csv", "report.json"]
        assert len((tmp_path / "records.csv").read_text().splitlines()) == 4 + 4
        header = read_records_header(tmp_path / "records.csv")
        assert (header.config, header.seed) == ({"k": 4}, 7)

    def test_json_reexport_is_identical(self, tmp_path):
        path = export_report(SYNTHETIC, "json", tmp_path, {"k": 4, "sizes": [8, 12, 16]}, 7)
        text = path.read_text()
        assert dump_report(load_report(path)) == text

        csv_path = export_report(SYNTHETIC, "csv", tmp_path)
        report = load_report(path)
        again = export_report(read_records_csv(csv_path), "json", tmp_path / "again", report["config"], report["seed"])
        assert again.read_text() == text

    def test_svg(self):
        first = render_growth_svg(SYNTHETIC)
        assert b"<svg" in first
        assert b"<dc:date>" not in first
        assert render_growth_svg(SYNTHETIC) == first

    def test_svg_describes_run(self):
        config = {"k": 4, "sizes": [8, 12, 16]}
        svg = ElementTree.fromstring(render_growth_svg(SYNTHETIC, config, 7))
        description = json.loads(svg.find(f".//{DC}description").text)
        assert description["config"] == config
        assert description["seed"] == 7
        assert description["version"] == settings.app_version
        creators = [el.text for el in svg.find(f".//{DC}creator").iter(f"{DC}title")]
        assert creators == [f"{settings.app_name} {settings.app_version}"]
        assert render_growth_svg(SYNTHETIC, config, 8) != render_growth_svg(SYNTHETIC, config, 7)

    def test_empty_records(self, tmp_path):
        for fmt in ("csv", "json", "svg"):
            with pytest.raises(InvalidParams):
                export_report([], fmt, tmp_path)

    def test_unknown_format(self, tmp_path):
        with pytest.raises(InvalidParams):
            export_report(SYNTHETIC, "xml", tmp_path)

    def test_unreadable_report(self, tmp_path):
        with pytest.raises(StorageError):
            load_report(tmp_path / "missing.json")
