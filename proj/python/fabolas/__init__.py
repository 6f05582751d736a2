"""Python access to the fabolas C++ core."""

from ._core import (
    SYNTHETIC_OPTIMUM,
    ConfigError,
    EvaluationFailure,
    branin,
    expected_improvement,
    hyperband_brackets,
    make_surrogate,
    normalize_config,
    percentile,
    read_record,
    report_csv,
    run_experiment,
    strategy_names,
    synthetic_eval,
)

__all__ = [
    "SYNTHETIC_OPTIMUM",
    "ConfigError",
    "EvaluationFailure",
    "branin",
    "expected_improvement",
    "hyperband_brackets",
    "make_surrogate",
    "normalize_config",
    "percentile",
    "read_record",
    "report_csv",
    "run_experiment",
    "strategy_names",
    "synthetic_eval",
]
