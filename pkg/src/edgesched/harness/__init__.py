"""Benchmark pipeline, report emission and the command-line interface."""

from edgesched.harness.bench import BenchReport, CellResult, SettingSummary, run_bench, solve_setting
from edgesched.harness.config import BenchSetting, ExperimentConfig, load_config, parse_setting
from edgesched.harness.output import read_csv, render_svg, strip_wall_time, write_csv

__all__ = [
    "BenchReport",
    "BenchSetting",
    "CellResult",
    "ExperimentConfig",
    "SettingSummary",
    "load_config",
    "parse_setting",
    "read_csv",
    "render_svg",
    "run_bench",
    "solve_setting",
    "strip_wall_time",
    "write_csv",
]
