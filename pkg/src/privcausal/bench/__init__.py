from .config import ConfigError, ExperimentConfig, config_from_dict, default_config, load_config
from .pairs import CausePair, ingest_pairs_dir
from .reports import emit_reports, summarize
from .runner import RunRecord, replay_privatized, run_experiment

__all__ = [
    "CausePair",
    "ConfigError",
    "ExperimentConfig",
    "RunRecord",
    "config_from_dict",
    "default_config",
    "emit_reports",
    "ingest_pairs_dir",
    "load_config",
    "replay_privatized",
    "run_experiment",
    "summarize",
]
