"""Minimal static SVG line plots, so the CLI needs no plotting library."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
WIDTH, PANEL_H, PAD = 720, 300, 50


def _panel(t, series, top, title):
    vals = np.concatenate([np.asarray(v, float)[np.isfinite(v)] for v in series.values()] or [[0.0]])
    lo, hi = (float(vals.min()), float(vals.max())) if vals.size else (0.0, 1.0)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    t0, t1 = float(t[0]), float(t[-1]) if t[-1] != t[0] else float(t[0]) + 1.0
    sx = lambda v: PAD + (v - t0) / (t1 - t0) * (WIDTH - 2 * PAD)
    sy = lambda v: top + PANEL_H - PAD + (lo - v) / (hi - lo) * (PANEL_H - 2 * PAD)
    out = [
        f'<rect x="{PAD}" y="{top + PAD}" width="{WIDTH - 2 * PAD}" height="{PANEL_H - 2 * PAD}" '
        'fill="none" stroke="#999"/>',
        f'<text x="{WIDTH / 2}" y="{top + PAD - 10}" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<text x="{PAD - 5}" y="{sy(hi):.1f}" text-anchor="end" font-size="10">{hi:.3g}</text>',
        f'<text x="{PAD - 5}" y="{sy(lo):.1f}" text-anchor="end" font-size="10">{lo:.3g}</text>',
        f'<text x="{PAD}" y="{top + PANEL_H - PAD + 15}" font-size="10">{t0:.3g} s</text>',
        f'<text x="{WIDTH - PAD}" y="{top + PANEL_H - PAD + 15}" text-anchor="end" font-size="10">{t1:.3g} s</text>',
    ]
    for i, (label, v) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        v = np.asarray(v, float)
        pts = " ".join(f"{sx(a):.1f},{sy(b):.1f}" for a, b in zip(t, v) if np.isfinite(b))
        if pts:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        out.append(f'<text x="{WIDTH - PAD - 5}" y="{top + PAD + 15 + 14 * i}" text-anchor="end" '
                   f'font-size="11" fill="{color}">{escape(label)}</text>')
    return out


def write_svg(path, t, series: dict, title: str = "", diff: dict | None = None) -> None:
    """Overlay ``series`` against ``t``; ``diff`` adds a second panel below."""
    panels = [_panel(np.asarray(t, float), series, 0, title)]
    if diff:
        panels.append(_panel(np.asarray(t, float), diff, PANEL_H, "difference"))
    height = PANEL_H * len(panels)
    body = "\n".join(line for p in panels for line in p)
    with open(path, "w") as fh:
        fh.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
                 f'font-family="sans-serif">\n{body}\n</svg>\n')
