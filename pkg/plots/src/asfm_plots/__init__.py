"""Figures and summary tables from simulated market run directories."""

from .figures import COMPARE_FILES, RUN_FILES, compare_runs, plot_run, summary_table
from .frames import MissingArtifact, RunFrame, SchemaMismatch, load_run

__version__ = "0.1.0"

__all__ = [
    "COMPARE_FILES",
    "MissingArtifact",
    "RUN_FILES",
    "RunFrame",
    "SchemaMismatch",
    "compare_runs",
    "load_run",
    "plot_run",
    "summary_table",
]
