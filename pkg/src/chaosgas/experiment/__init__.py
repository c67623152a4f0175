from .config import (
    TABLE1_CASES,
    ConfigError,
    ExperimentConfig,
    SweepSpec,
    load_config,
    load_sweep,
    preset,
)
from .runner import RunArtifacts, SweepResult, emit_diagnostics, run_case, run_sweep

__all__ = [
    "TABLE1_CASES",
    "ConfigError",
    "ExperimentConfig",
    "RunArtifacts",
    "SweepResult",
    "SweepSpec",
    "emit_diagnostics",
    "load_config",
    "load_sweep",
    "preset",
    "run_case",
    "run_sweep",
]
