from refill.evaluation.evaluate import (
    EvalConfig,
    best_policy_ordering,
    evaluate_instance,
    evaluate_instances,
    instance_seeds,
    policy_rollout,
)
from refill.evaluation.generalization import (
    GeneralizationConfig,
    run_generalization,
    sample_graph_sets,
)
from refill.evaluation.report import (
    REPORT_COLUMNS,
    ComparisonReport,
    ReportRow,
    improvement,
    read_report,
    rows_from_csv,
)

__all__ = [
    "REPORT_COLUMNS",
    "ComparisonReport",
    "EvalConfig",
    "GeneralizationConfig",
    "ReportRow",
    "best_policy_ordering",
    "evaluate_instance",
    "evaluate_instances",
    "improvement",
    "instance_seeds",
    "policy_rollout",
    "read_report",
    "rows_from_csv",
    "run_generalization",
    "sample_graph_sets",
]
