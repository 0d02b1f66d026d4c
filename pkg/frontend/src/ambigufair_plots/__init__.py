"""Rendering for ambigufair experiment exports.

Consumes results.csv (the experiment runner's documented export format) and
produces per-(dataset, model) curve images plus fairness/accuracy trade-off
panels. Never touches the primary package's internals.
"""

__version__ = "0.1.0"

from .data import CSV_COLUMNS, SchemaMismatch, baseline_stats, curve_stats, load_results_csv
from .render import PlotSpec, render_curves, render_tradeoff
