from core.membership import MembershipRecord, collect_records, balance, save_records, load_records, records_frame
from core.experiment_config import (
    ExperimentConfig,
    ScenarioSpec,
    EvalDatasetSpec,
    load_experiment,
)
from core.shadow_pipeline import (
    ExperimentData,
    PreparationResult,
    build_experiment_data,
    run_preparation,
    build_eval_datasets,
    build_eval_records,
)
from core.result_handler import ResultHandler
from core.experiment_runner import (
    ExperimentRunner,
    RunManifest,
    StageRecord,
    cmd_generate_data,
    cmd_run,
    cmd_scaling_sweep,
)
from core.report_builder import ReportBuilder, ComparisonResult, cmd_report

__all__ = [
    'MembershipRecord',
    'collect_records',
    'balance',
    'save_records',
    'load_records',
    'records_frame',
    'ExperimentConfig',
    'ScenarioSpec',
    'EvalDatasetSpec',
    'load_experiment',
    'ExperimentData',
    'PreparationResult',
    'build_experiment_data',
    'run_preparation',
    'build_eval_datasets',
    'build_eval_records',
    'ResultHandler',
    'ExperimentRunner',
    'RunManifest',
    'StageRecord',
    'cmd_generate_data',
    'cmd_run',
    'cmd_scaling_sweep',
    'ReportBuilder',
    'ComparisonResult',
    'cmd_report',
]
