"""Experiment driver: configuration, height ledger, acceptance battery and CLI."""

from .acceptance import CRITERIA, run_criterion, run_suite
from .config import ExperimentConfig, load_config, parse_config
from .ledger import HeightLedgerRow, LedgerResult, run_ledger

__all__ = ["CRITERIA", "ExperimentConfig", "HeightLedgerRow", "LedgerResult", "load_config",
           "parse_config", "run_criterion", "run_ledger", "run_suite"]
