"""Experiment configuration, trial execution and regret bookkeeping."""
from .config import ConfigError, ExperimentConfig, default_checkpoints, load_config
from .ledger import RegretLedger, benchmark_agent_regrets, epochwise_agent2_regret, pinball_sums
from .runner import run_trial, run_trials, write_summaries
from .stats import Welford, fit_growth

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RegretLedger",
    "Welford",
    "benchmark_agent_regrets",
    "default_checkpoints",
    "epochwise_agent2_regret",
    "fit_growth",
    "load_config",
    "pinball_sums",
    "run_trial",
    "run_trials",
    "write_summaries",
]
