"""Figure generation for simulator result CSVs."""

from .case_a import plot_case_a
from .io import ResultsError, load_results, seed_mean
from .sweep import plot_sweep

__all__ = ["ResultsError", "load_results", "plot_case_a", "plot_sweep", "seed_mean"]

__version__ = "0.1.0"
