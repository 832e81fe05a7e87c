"""
Monte Carlo studies of size and power, the penalty probe, and their writers.
"""

from .studies import (
    StudyConfig,
    CellResult,
    StudyResult,
    run_power_study,
    run_penalty_probe,
    run_replication
)
from .writers import write_csv, write_json, dumps

__all__ = [
    "StudyConfig", "CellResult", "StudyResult", "run_power_study", "run_penalty_probe",
    "run_replication", "write_csv", "write_json", "dumps"
]
