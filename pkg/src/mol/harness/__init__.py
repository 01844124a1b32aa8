from .config import PRESETS, ConfigError, ExperimentConfig, dump_config, load_config, preset
from .recompute import check_trial, recompute_trial
from .suite import SUITES, aggregate, expand_matrix, run_suite, suite_matrix
from .trial import GenerationReport, TrialAborted, TrialResult, run_generation, run_trial
