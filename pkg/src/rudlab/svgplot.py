"""Tiny dependency-free SVG polyline plots for report curves.

Plots are advisory; they never enter a verdict.
"""

from __future__ import annotations


def render_curves(curves: dict[str, list[tuple[float, float]]],
                  width: int = 640, height: int = 400) -> str:
    pts = [p for series in curves.values() for p in series]
    if not pts:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"/>'
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    pad = 40

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="monospace" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height-pad}" x2="{width-pad}" y2="{height-pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height-pad}" stroke="black"/>',
        f'<text x="{pad}" y="{height-pad+24}">{x0:g}</text>',
        f'<text x="{width-pad-20}" y="{height-pad+24}">{x1:g}</text>',
        f'<text x="4" y="{height-pad}">{y0:g}</text>',
        f'<text x="4" y="{pad}">{y1:g}</text>',
    ]
    for k, (name, series) in enumerate(sorted(curves.items())):
        color = colors[k % len(colors)]
        path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in series)
        parts.append(
            f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        for x, y in series:
            parts.append(
                f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>'
            )
        parts.append(
            f'<text x="{pad+6}" y="{pad+16*(k+1)}" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
