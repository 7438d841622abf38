"""Run orchestration: configs, instances, end-to-end runs, reports, validation."""

from .config import DEFAULTS, load_config, make_config
from .instance import Instance, generate_instance, instance_from_config
from .report import emit_report, validate_report
from .runner import RunContext, build_context, run, run_pathway, run_ratio_test, run_state_determination, sample_training_set
from .validation import run_validation

__all__ = [
    "DEFAULTS",
    "Instance",
    "RunContext",
    "build_context",
    "emit_report",
    "generate_instance",
    "instance_from_config",
    "load_config",
    "make_config",
    "run",
    "run_pathway",
    "run_ratio_test",
    "run_state_determination",
    "run_validation",
    "sample_training_set",
    "validate_report",
]
