"""Storage package for pyresgen: JSON configuration and design files, CSV and SVG results."""

from pyresgen.storage.csv_export import export_csv, load_csv_tables, result_from_csv
from pyresgen.storage.json_storage import (
    load_config,
    load_filters,
    load_gains,
    load_summary,
    load_sweep_index,
    load_thresholds,
    save_config,
    save_filters,
    save_gains,
    save_summary,
    save_sweep_index,
    save_thresholds,
)
from pyresgen.storage.svg_export import render_svg

__all__ = [
    "export_csv",
    "load_csv_tables",
    "result_from_csv",
    "render_svg",
    "load_config",
    "save_config",
    "load_gains",
    "save_gains",
    "load_filters",
    "save_filters",
    "load_thresholds",
    "save_thresholds",
    "load_summary",
    "save_summary",
    "load_sweep_index",
    "save_sweep_index",
]
