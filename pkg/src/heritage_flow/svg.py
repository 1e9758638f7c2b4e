"""Dependency-free SVG heatmap rendering for matrices."""

from __future__ import annotations

from typing import Sequence

import numpy as np


class EmptyMatrixError(ValueError):
    """Cannot render a heatmap with zero cells."""


def _hex_to_rgb(color: str) -> tuple[int, int, int]:
    color = color.lstrip("#")
    return int(color[0:2], 16), int(color[2:4], 16), int(color[4:6], 16)


def _lerp_color(low: str, high: str, t: float) -> str:
    lo, hi = _hex_to_rgb(low), _hex_to_rgb(high)
    rgb = tuple(round(l + (h - l) * t) for l, h in zip(lo, hi))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_heatmap_svg(
    values,
    row_labels: Sequence[str],
    col_labels: Sequence[str],
    vmin: float | None = None,
    vmax: float | None = None,
    cell_size: int = 26,
    low_color: str = "#f7fbff",
    high_color: str = "#08306b",
) -> str:
    """Render a labelled heatmap as an SVG 1.1 document string.

    One rect per cell, filled along a linear ramp between vmin and vmax
    (defaulting to the data range); a constant matrix renders mid-ramp.
    """
    matrix = np.asarray(values, dtype=np.float64)
    if matrix.ndim != 2 or matrix.size == 0:
        raise EmptyMatrixError(f"matrix shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix entries must be finite")
    n_rows, n_cols = matrix.shape
    if len(row_labels) != n_rows or len(col_labels) != n_cols:
        raise ValueError("label counts must match matrix shape")

    lo = float(matrix.min()) if vmin is None else float(vmin)
    hi = float(matrix.max()) if vmax is None else float(vmax)

    left = 10 + 7 * max((len(str(l)) for l in row_labels), default=0)
    top = 10 + 7 * max((len(str(l)) for l in col_labels), default=0)
    width = left + n_cols * cell_size + 10
    height = top + n_rows * cell_size + 10

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<g font-family="monospace" font-size="11" fill="#000000">',
    ]
    for j, label in enumerate(col_labels):
        x = left + j * cell_size + cell_size / 2
        parts.append(
            f'<text x="{x:.1f}" y="{top - 6}" text-anchor="start" '
            f'transform="rotate(-60 {x:.1f} {top - 6})">{_escape(str(label))}</text>'
        )
    for i, label in enumerate(row_labels):
        y = top + i * cell_size + cell_size / 2 + 4
        parts.append(f'<text x="{left - 6}" y="{y:.1f}" text-anchor="end">{_escape(str(label))}</text>')
    parts.append("</g>")

    span = hi - lo
    for i in range(n_rows):
        for j in range(n_cols):
            v = float(matrix[i, j])
            t = 0.5 if span == 0 else min(1.0, max(0.0, (v - lo) / span))
            x = left + j * cell_size
            y = top + i * cell_size
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell_size}" height="{cell_size}" '
                f'fill="{_lerp_color(low_color, high_color, t)}">'
                f"<title>{_escape(str(row_labels[i]))} / {_escape(str(col_labels[j]))}: {v:.6f}</title>"
                f"</rect>"
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
