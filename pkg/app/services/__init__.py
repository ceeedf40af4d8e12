from .records import RECORD_COLUMNS, GrowthRecord, RunProvenance, read_records_csv, read_records_header, write_records_csv
from .estimate_service import (
    EstimateService,
    GlobalEstimateReport,
    LocalEstimateReport,
    TrialReport,
    edge_trial_quotient,
    lower_bound,
    trial_function_quotient,
    verify_global_estimate,
    verify_local_estimate,
)
from .growth_service import GrowthRunConfig, GrowthService, check_kokarev, run_growth
from .report_service import (
    RatioReport,
    ReportService,
    comparison_ratio_report,
    dump_report,
    export_all,
    export_report,
    growth_dips,
    growth_slope,
    load_report,
)

__all__ = [
    "GrowthRecord",
    "RECORD_COLUMNS",
    "RunProvenance",
    "read_records_csv",
    "read_records_header",
    "write_records_csv",
    "EstimateService",
    "GlobalEstimateReport",
    "LocalEstimateReport",
    "TrialReport",
    "edge_trial_quotient",
    "lower_bound",
    "trial_function_quotient",
    "verify_global_estimate",
    "verify_local_estimate",
    "GrowthRunConfig",
    "GrowthService",
    "check_kokarev",
    "run_growth",
    "RatioReport",
    "ReportService",
    "comparison_ratio_report",
    "dump_report",
    "export_all",
    "export_report",
    "growth_dips",
    "growth_slope",
    "load_report",
]
