"""Report serialization: CSV with a summary block, and three SVG bar charts.

CSV layout::

    # edgesched-report/1 objective=total
    scenario,scenario_seed,setting,...        <- one row per (scenario, setting)
    ...
    <blank line>
    # summary
    setting,mean_delay,std_delay,mean_wall_time,wins,failures
    ...

Floats are written with 12 significant digits; the report already holds
values quantized to that precision, so parsing recovers them exactly.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, fields
from html import escape
from pathlib import Path

from edgesched.errors import ConfigurationError
from edgesched.harness.bench import SIG_DIGITS, BenchReport, CellResult, SettingSummary

REPORT_FORMAT = "edgesched-report/1"
WALL_TIME_COLUMNS = ("wall_time", "mean_wall_time")
CHARTS = ("delay", "time", "wins")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.{SIG_DIGITS}g}"
    return str(value)


def _parse(kind, text: str):
    if kind == "bool":
        return text == "1"
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return text


def format_csv(report: BenchReport) -> str:
    if not report.settings:
        raise ConfigurationError("report has no settings")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    buf.write(f"# {REPORT_FORMAT} objective={report.objective_kind}\n")
    w.writerow([f.name for f in fields(CellResult)])
    for cell in report.cells:
        w.writerow([_fmt(v) for v in astuple(cell)])
    buf.write("\n# summary\n")
    w.writerow([f.name for f in fields(SettingSummary)])
    for s in report.summary:
        w.writerow([_fmt(v) for v in astuple(s)])
    return buf.getvalue()


def write_csv(report: BenchReport, path: str | Path) -> None:
    text = format_csv(report)
    Path(path).write_text(text)


def read_csv(path: str | Path) -> BenchReport:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith(f"# {REPORT_FORMAT} objective="):
        raise ConfigurationError(f"{path}: not a benchmark report")
    kind = lines[0].split("objective=", 1)[1]
    try:
        split = lines.index("# summary")
    except ValueError:
        raise ConfigurationError(f"{path}: missing summary block") from None
    cell_rows = list(csv.reader([ln for ln in lines[1:split] if ln]))
    summary_rows = list(csv.reader(lines[split + 1:]))
    cells = [_typed_row(CellResult, r) for r in cell_rows[1:]]
    summary = [_typed_row(SettingSummary, r) for r in summary_rows[1:]]
    return BenchReport(kind, [s.setting for s in summary], cells, summary)


def _typed_row(cls, row):
    return cls(*(_parse(f.type, v) for f, v in zip(fields(cls), row)))


def strip_wall_time(text: str) -> str:
    """CSV text with wall-time columns blanked, for determinism comparisons."""
    out = []
    header = None
    for line in text.splitlines():
        if not line or line.startswith("#"):
            out.append(line)
            header = None
            continue
        row = next(csv.reader([line]))
        if header is None:
            header = row
        else:
            row = ["" if h in WALL_TIME_COLUMNS else v for h, v in zip(header, row)]
        out.append(",".join(row))
    return "\n".join(out) + "\n"


def _bar_chart(title: str, unit: str, labels: list[str], values: list[float]) -> str:
    width, height = 120 + 90 * len(labels), 320
    left, top, bottom = 70, 40, 260
    finite = [v for v in values if math.isfinite(v)]
    vmax = max(finite) if finite and max(finite) > 0 else 1.0
    scale = (bottom - top) / vmax
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
        f'<line x1="{left}" y1="{bottom}" x2="{width - 20}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>',
        f'<text x="14" y="{(top + bottom) / 2:.1f}" transform="rotate(-90 14 {(top + bottom) / 2:.1f})" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12">{escape(unit)}</text>',
    ]
    for i in range(5):
        y = bottom - i * (bottom - top) / 4
        parts.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end" font-family="sans-serif" '
                     f'font-size="10">{vmax * i / 4:.4g}</text>')
    for i, (label, value) in enumerate(zip(labels, values)):
        x = left + 30 + 90 * i
        h = value * scale if math.isfinite(value) else 0.0
        parts.append(f'<rect class="bar" x="{x}" y="{bottom - h:.3f}" width="50" height="{h:.3f}" fill="#4a7ab5"/>')
        parts.append(f'<text x="{x + 25}" y="{bottom - h - 5:.3f}" text-anchor="middle" font-family="sans-serif" '
                     f'font-size="10">{value:.4g}</text>')
        parts.append(f'<text x="{x + 25}" y="{bottom + 16}" text-anchor="middle" font-family="sans-serif" '
                     f'font-size="11">{escape(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_svg(report: BenchReport, out_dir: str | Path) -> list[Path]:
    """Write delay.svg, time.svg and wins.svg (one bar per setting) into ``out_dir``."""
    if not report.settings:
        raise ConfigurationError("report has no settings")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = [s.setting for s in report.summary]
    charts = {
        "delay": ("Mean total delay", "seconds", [s.mean_delay for s in report.summary]),
        "time": ("Mean response time", "seconds", [s.mean_wall_time for s in report.summary]),
        "wins": ("Scenarios won (ties credited to all)", "count", [float(s.wins) for s in report.summary]),
    }
    paths = []
    for key in CHARTS:
        title, unit, values = charts[key]
        path = out_dir / f"{key}.svg"
        path.write_text(_bar_chart(title, unit, names, values))
        paths.append(path)
    return paths
