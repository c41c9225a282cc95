"""Render stableheat harness CSVs as figures.

The harness is the single source of truth: figures draw the numbers the
harness wrote (verdict statistics where present, otherwise the identical
least-squares fit on the same rows), never new statistics.
"""

__version__ = "0.1.0"

from .bundle import ReportBundle
from .figures import plot_diagnostic_ladder, plot_field, plot_holder, plot_moment_decay

__all__ = [
    "ReportBundle",
    "plot_holder",
    "plot_moment_decay",
    "plot_field",
    "plot_diagnostic_ladder",
    "__version__",
]
