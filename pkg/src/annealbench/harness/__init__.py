from .config import FitSpec, SweepSpec, geometric_grid, parse_config
from .figures import make_figure_scripts
from .fit import FitResult, fit_slope, grover_tau_for_delta
from .sweep import SweepRow, SweepTable, read_table, run_sweep, write_table

__all__ = [
    "FitResult",
    "FitSpec",
    "SweepRow",
    "SweepSpec",
    "SweepTable",
    "fit_slope",
    "geometric_grid",
    "grover_tau_for_delta",
    "make_figure_scripts",
    "parse_config",
    "read_table",
    "run_sweep",
    "write_table",
]
