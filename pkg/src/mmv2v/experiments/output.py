"""CSV tables and self-contained SVG charts for sweep results."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

from mmv2v.experiments.sweep import ROW_FIELDS, UNITS, SweepResult, SweepRow
from mmv2v.traffic import VehicleField


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(result: SweepResult, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow((result.variable,) + ROW_FIELDS[1:])
        for row in result.rows:
            w.writerow([fmt(getattr(row, name)) for name in ROW_FIELDS])


def read_csv(path: str | Path) -> SweepResult:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header[1:]) != ROW_FIELDS[1:]:
            raise ValueError(f"unexpected CSV header {header}")
        rows = [SweepRow(*(float(x) for x in rec)) for rec in reader]
    return SweepResult(header[0], rows)


def write_field_csv(field: VehicleField, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("road_id", "x", "y"))
        for r, x, y in zip(field.road.tolist(), field.x.tolist(), field.y.tolist()):
            w.writerow((r, fmt(x), fmt(y)))


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


SERIES_STYLE = {"analytic": "#1f77b4", "simulated": "#d62728"}
PANEL_W, PANEL_H = 440, 300
MARGIN_L, MARGIN_T, MARGIN_B = 70, 40, 50


def _panel(result: SweepResult, index: int, title: str, ylabel: str, columns: dict, scale: float) -> list[str]:
    """``columns`` maps series name -> (value column, ci column or None)."""
    xs = result.column("value")
    ys_all = []
    for col, ci in columns.values():
        for y, c in zip(result.column(col), result.column(ci) if ci else [0.0] * len(xs)):
            if math.isfinite(y):
                ys_all += [y - (c if math.isfinite(c) else 0.0), y + (c if math.isfinite(c) else 0.0)]
    xlo, xhi = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if xhi == xlo:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    ylo, yhi = (min(ys_all), max(ys_all)) if ys_all else (0.0, 1.0)
    pad = 0.05 * (yhi - ylo) if yhi > ylo else max(abs(yhi) * 0.05, 1e-12)
    ylo, yhi = ylo - pad, yhi + pad

    ox = index * (PANEL_W + MARGIN_L) + MARGIN_L
    oy = MARGIN_T

    def px(x):
        return ox + (x - xlo) / (xhi - xlo) * PANEL_W

    def py(y):
        return oy + PANEL_H - (y - ylo) / (yhi - ylo) * PANEL_H

    out = [
        f'<g class="panel" data-title="{escape(title)}" data-xmin="{fmt(xlo)}" data-xmax="{fmt(xhi)}" '
        f'data-ymin="{fmt(ylo)}" data-ymax="{fmt(yhi)}" data-left="{ox}" data-top="{oy}" '
        f'data-width="{PANEL_W}" data-height="{PANEL_H}">',
        f'<rect x="{ox}" y="{oy}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#333"/>',
        f'<text x="{ox + PANEL_W / 2}" y="{oy - 12}" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    for t in _nice_ticks(xlo, xhi):
        out.append(f'<line x1="{px(t):.2f}" y1="{oy + PANEL_H}" x2="{px(t):.2f}" y2="{oy + PANEL_H + 5}" stroke="#333"/>')
        out.append(f'<text x="{px(t):.2f}" y="{oy + PANEL_H + 18}" text-anchor="middle" font-size="11">{t:g}</text>')
    for t in _nice_ticks(ylo, yhi):
        out.append(f'<line x1="{ox - 5}" y1="{py(t):.2f}" x2="{ox}" y2="{py(t):.2f}" stroke="#333"/>')
        out.append(
            f'<text x="{ox - 8}" y="{py(t) + 4:.2f}" text-anchor="end" font-size="11">{t * scale:.4g}</text>'
        )
    xlabel = f"{result.variable} [{UNITS.get(result.variable, '-')}]"
    out.append(f'<text x="{ox + PANEL_W / 2}" y="{oy + PANEL_H + 40}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
    out.append(
        f'<text transform="translate({ox - 52},{oy + PANEL_H / 2}) rotate(-90)" text-anchor="middle" '
        f'font-size="12">{escape(ylabel)}</text>'
    )
    for k, (series, (col, ci)) in enumerate(columns.items()):
        color = SERIES_STYLE[series]
        pts = [(x, y, c) for x, y, c in zip(xs, result.column(col), result.column(ci) if ci else [math.nan] * len(xs))
               if math.isfinite(y)]
        if not pts:
            continue
        line = " ".join(f"{px(x):.3f},{py(y):.3f}" for x, y, _ in pts)
        out.append(f'<g class="series" data-series="{series}" data-column="{col}">')
        out.append(f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y, c in pts:
            if math.isfinite(c) and c > 0:
                out.append(
                    f'<line class="ci" x1="{px(x):.3f}" y1="{py(y - c):.3f}" x2="{px(x):.3f}" y2="{py(y + c):.3f}" '
                    f'stroke="{color}"/>'
                )
            out.append(
                f'<circle cx="{px(x):.3f}" cy="{py(y):.3f}" r="2.5" fill="{color}" '
                f'data-x="{fmt(x)}" data-y="{fmt(y)}"/>'
            )
        out.append("</g>")
        ly = oy + 14 + 16 * k
        out.append(f'<line x1="{ox + 10}" y1="{ly}" x2="{ox + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ox + 35}" y="{ly + 4}" font-size="11">{series}</text>')
    out.append("</g>")
    return out


def render_svg(result: SweepResult) -> str:
    width = 2 * (PANEL_W + MARGIN_L) + 20
    height = MARGIN_T + PANEL_H + MARGIN_B + 10
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    parts += _panel(
        result, 0, "Average total delay", "delay [ms]",
        {"analytic": ("analytic_delay", None), "simulated": ("sim_delay", "sim_delay_ci")}, 1e3,
    )
    parts += _panel(
        result, 1, "Average total reliability", "reliability [-]",
        {"analytic": ("analytic_reliability", None), "simulated": ("sim_reliability", "sim_reliability_ci")}, 1.0,
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit(result: SweepResult, format: str, path: str | Path) -> None:
    if format == "csv":
        write_csv(result, path)
    elif format == "svg":
        Path(path).write_text(render_svg(result), encoding="utf-8", newline="\n")
    else:
        raise ValueError(f"unknown output format {format!r}")
