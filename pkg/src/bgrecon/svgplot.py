"""Deterministic SVG line plots from two-column CSV files.

Fixed 800x500 viewport, no timestamps or generated ids, so identical
inputs produce byte-identical output.
"""

from __future__ import annotations

import os

WIDTH = 800
HEIGHT = 500
MARGIN = 60

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _read_xy(path):
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    xs, ys = [], []
    with open(path) as fh:
        next(fh)  # header
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) < 2:
                continue
            xs.append(float(parts[0]))
            ys.append(float(parts[1]))
    return xs, ys


def emit_plot(series: list[tuple[str, str]], out: str) -> None:
    """Overlay the first two CSV columns of each (label, csv_path) series."""
    if not series:
        raise ValueError("series list must be nonempty")
    data = [(label, *_read_xy(path)) for label, path in series]
    all_x = [x for _, xs, _ in data for x in xs]
    all_y = [y for _, _, ys in data for y in ys]
    x_lo, x_hi = min(all_x), max(all_x)
    y_lo, y_hi = min(all_y), max(all_y)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def px(x):
        return MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2 * MARGIN)

    def py(y):
        return HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2 * MARGIN)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 20}" font-size="12">'
        f"{x_lo:.4g}</text>",
        f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 20}" font-size="12" '
        f'text-anchor="end">{x_hi:.4g}</text>',
        f'<text x="{MARGIN - 5}" y="{HEIGHT - MARGIN}" font-size="12" '
        f'text-anchor="end">{y_lo:.4g}</text>',
        f'<text x="{MARGIN - 5}" y="{MARGIN + 10}" font-size="12" '
        f'text-anchor="end">{y_hi:.4g}</text>',
    ]
    for idx, (label, xs, ys) in enumerate(data):
        color = _COLORS[idx % len(_COLORS)]
        points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        lines.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{points}"/>'
        )
        ly = MARGIN + 18 * idx
        lines.append(
            f'<line x1="{WIDTH - MARGIN - 130}" y1="{ly}" '
            f'x2="{WIDTH - MARGIN - 110}" y2="{ly}" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
        lines.append(
            f'<text x="{WIDTH - MARGIN - 105}" y="{ly + 4}" font-size="12">'
            f"{label}</text>"
        )
    lines.append("</svg>")
    with open(out, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
