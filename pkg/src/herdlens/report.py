"""Schema-versioned analysis reports and deterministic SVG plot artifacts."""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

SCHEMA_VERSION = "1.0"

CANVAS_W = 800
CANVAS_H = 600
MARGIN_LEFT = 60
MARGIN_RIGHT = 160  # room for the legend
MARGIN_TOP = 40
MARGIN_BOTTOM = 50

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def _bounds(values: np.ndarray) -> tuple[float, float]:
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


class _Svg:
    def __init__(self, title: str):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS_W}" '
            f'height="{CANVAS_H}" viewBox="0 0 {CANVAS_W} {CANVAS_H}">',
            f'<rect width="{CANVAS_W}" height="{CANVAS_H}" fill="white"/>',
            f'<text x="{CANVAS_W // 2}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{title}</text>',
        ]

    def add(self, fragment: str) -> None:
        self.parts.append(fragment)

    def write(self, path: str | Path) -> None:
        self.parts.append("</svg>")
        Path(path).write_text("\n".join(self.parts) + "\n",
                              encoding="utf-8", newline="\n")


def _axes(svg: _Svg, xlo, xhi, ylo, yhi) -> tuple:
    x0, x1 = MARGIN_LEFT, CANVAS_W - MARGIN_RIGHT
    y0, y1 = CANVAS_H - MARGIN_BOTTOM, MARGIN_TOP
    svg.add(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    svg.add(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    svg.add(f'<text x="{x0}" y="{y0 + 18}" font-family="sans-serif" '
            f'font-size="10">{_fmt(xlo)}</text>')
    svg.add(f'<text x="{x1}" y="{y0 + 18}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{_fmt(xhi)}</text>')
    svg.add(f'<text x="{x0 - 6}" y="{y0}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{_fmt(ylo)}</text>')
    svg.add(f'<text x="{x0 - 6}" y="{y1 + 10}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{_fmt(yhi)}</text>')

    def sx(v):
        return x0 + (v - xlo) / (xhi - xlo) * (x1 - x0)

    def sy(v):
        return y0 - (v - ylo) / (yhi - ylo) * (y0 - y1)

    return sx, sy


def _legend(svg: _Svg, entries: Sequence[tuple[str, str]]) -> None:
    lx = CANVAS_W - MARGIN_RIGHT + 20
    for i, (label, color) in enumerate(entries):
        ly = MARGIN_TOP + 16 * i
        svg.add(f'<circle cx="{lx}" cy="{ly}" r="4" fill="{color}"/>')
        svg.add(f'<text x="{lx + 10}" y="{ly + 4}" font-family="sans-serif" '
                f'font-size="11">{label}</text>')


def render_scatter(embedding: np.ndarray, labels: Sequence, path: str | Path,
                   title: str = "embedding") -> None:
    """Deterministic scatter plot; point color indexed by label."""
    svg = _Svg(title)
    coords = np.asarray(embedding, dtype=float).reshape(-1, 2)
    if coords.shape[0] == 0:
        _axes(svg, 0.0, 1.0, 0.0, 1.0)
        svg.write(path)
        return
    labels = list(labels)
    uniq = list(dict.fromkeys(labels))
    color_of = {lab: PALETTE[i % len(PALETTE)] for i, lab in enumerate(uniq)}
    xlo, xhi = _bounds(coords[:, 0])
    ylo, yhi = _bounds(coords[:, 1])
    sx, sy = _axes(svg, xlo, xhi, ylo, yhi)
    for (x, y), lab in zip(coords, labels):
        svg.add(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="3" '
                f'fill="{color_of[lab]}" fill-opacity="0.7"/>')
    _legend(svg, [(str(lab), color_of[lab]) for lab in uniq])
    svg.write(path)


def render_series(series: dict[str, Sequence[float]], path: str | Path,
                  title: str = "series",
                  tercile_boundaries: Optional[Sequence[int]] = None) -> None:
    """Deterministic line chart, one polyline per named series."""
    svg = _Svg(title)
    arrays = {name: np.asarray(vals, dtype=float) for name, vals in series.items()}
    arrays = {name: a for name, a in arrays.items() if a.size}
    if not arrays:
        _axes(svg, 0.0, 1.0, 0.0, 1.0)
        svg.write(path)
        return
    max_len = max(a.size for a in arrays.values())
    allv = np.concatenate(list(arrays.values()))
    xlo, xhi = 0.0, float(max(max_len - 1, 1))
    ylo, yhi = _bounds(allv)
    sx, sy = _axes(svg, xlo, xhi, ylo, yhi)
    if tercile_boundaries:
        for b in tercile_boundaries:
            svg.add(f'<line x1="{_fmt(sx(b))}" y1="{MARGIN_TOP}" '
                    f'x2="{_fmt(sx(b))}" y2="{CANVAS_H - MARGIN_BOTTOM}" '
                    f'stroke="#aaaaaa" stroke-dasharray="4 3"/>')
    entries = []
    for i, (name, a) in enumerate(arrays.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(sx(j))},{_fmt(sy(v))}" for j, v in enumerate(a))
        svg.add(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"/>')
        entries.append((name, color))
    _legend(svg, entries)
    svg.write(path)


def new_report(config_echo: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config_echo,
        "warnings": [],
    }


def write_report(report: dict, path: str | Path) -> None:
    """Atomic write (temp + rename) with stable key ordering."""
    path = Path(path)
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def read_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def load_schema() -> dict:
    schema_path = Path(__file__).parent / "schemas" / "report_schema.json"
    return json.loads(schema_path.read_text(encoding="utf-8"))


def validate_report(report: dict) -> None:
    import jsonschema

    jsonschema.validate(report, load_schema())


def write_csv(path: str | Path, header: Sequence[str],
              rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            repr(v) if isinstance(v, float) else str(v) for v in row))
    Path(path).write_text("".join(l + "\n" for l in lines),
                          encoding="utf-8", newline="\n")
