"""Figures from grid-report CSVs: nothing is recomputed, every plotted
number traces to a CSV cell."""

from .render import ColumnError, FigureSpec, read_report, render

__all__ = ["ColumnError", "FigureSpec", "read_report", "render"]
__version__ = "1.0.0"
