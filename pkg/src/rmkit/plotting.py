"""Log-log convergence plots as self-contained SVG text.

Rendering is deliberately hand-rolled: the output depends only on the
input records (labels sorted, fixed palette, fixed float formatting), so
identical data produces identical bytes and plots can be diffed or
hashed in tests. Mean lines are <polyline> elements, one per label;
confidence bands are filled <path> elements behind them.
"""

from __future__ import annotations

import warnings

from .bench import aggregate

CLAMP_EPS = 1e-16
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
           "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f")

_W, _H = 720.0, 480.0
_ML, _MR, _MT, _MB = 70.0, 18.0, 20.0, 48.0


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _log10(v: float) -> float:
    from math import log10

    return log10(v)


def _clamped(values, counter) -> list[float]:
    out = []
    for v in values:
        if not v > CLAMP_EPS:
            counter[0] += 1
            v = CLAMP_EPS
        out.append(float(v))
    return out


def emit_plot(records, x_axis: str = "iteration",
              metric: str | None = None, title: str | None = None) -> str:
    """Render aggregated records as a log-log SVG string.

    x_axis is "iteration" or "time" (mean wall seconds). Values at or
    below 1e-16 are clamped to 1e-16 for the log scale, with a warning.
    """
    if x_axis not in ("iteration", "time"):
        raise ValueError(f"x_axis must be iteration or time, got {x_axis!r}")
    records = list(records)
    if not records:
        raise ValueError("empty series")
    if metric is None:
        present = sorted({r.metric for r in records})
        if len(present) != 1:
            raise ValueError(f"metric must be named; found {present}")
        metric = present[0]

    cells = [c for c in aggregate(records) if c.metric == metric]
    labels = sorted({c.label for c in cells})
    if not cells or not labels:
        raise ValueError("empty series")

    clamps = [0]
    series = {}
    for label in labels:
        rows = sorted((c for c in cells if c.label == label),
                      key=lambda c: c.iteration)
        if x_axis == "iteration":
            xs = [float(c.iteration) for c in rows]
        else:
            xs = _clamped((c.mean_wall_ns / 1e9 for c in rows), clamps)
        ys = _clamped((c.mean for c in rows), clamps)
        lo = _clamped((c.mean - c.half_width for c in rows), clamps)
        hi = _clamped((c.mean + c.half_width for c in rows), clamps)
        series[label] = (xs, ys, lo, hi)
    if clamps[0]:
        warnings.warn(f"{clamps[0]} nonpositive values clamped to "
                      f"{CLAMP_EPS} for the log scale", RuntimeWarning,
                      stacklevel=2)

    import math

    all_x = [x for xs, _, _, _ in series.values() for x in xs]
    all_y = [v for _, ys, lo, hi in series.values()
             for v in (*ys, *lo, *hi)]
    x0 = math.floor(_log10(min(all_x)))
    x1 = math.ceil(_log10(max(all_x)))
    y0 = math.floor(_log10(min(all_y)))
    y1 = math.ceil(_log10(max(all_y)))
    if x1 == x0:
        x1 += 1
    if y1 == y0:
        y1 += 1

    def px(v: float) -> float:
        return _ML + (_log10(v) - x0) / (x1 - x0) * (_W - _ML - _MR)

    def py(v: float) -> float:
        return _H - _MB - (_log10(v) - y0) / (y1 - y0) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W:.0f}" '
        f'height="{_H:.0f}" viewBox="0 0 {_W:.0f} {_H:.0f}">',
        f'<rect x="0" y="0" width="{_W:.0f}" height="{_H:.0f}" fill="#ffffff"/>',
    ]

    # decade grid and tick labels
    for k in range(x0, x1 + 1):
        x = px(10.0**k)
        parts.append(f'<line x1="{_fmt(x)}" y1="{_fmt(_MT)}" x2="{_fmt(x)}" '
                     f'y2="{_fmt(_H - _MB)}" stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(x)}" y="{_fmt(_H - _MB + 16)}" '
                     f'font-family="sans-serif" font-size="11" '
                     f'text-anchor="middle">1e{k}</text>')
    for k in range(y0, y1 + 1):
        y = py(10.0**k)
        parts.append(f'<line x1="{_fmt(_ML)}" y1="{_fmt(y)}" '
                     f'x2="{_fmt(_W - _MR)}" y2="{_fmt(y)}" '
                     f'stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(_ML - 6)}" y="{_fmt(y + 4)}" '
                     f'font-family="sans-serif" font-size="11" '
                     f'text-anchor="end">1e{k}</text>')
    parts.append(f'<rect x="{_fmt(_ML)}" y="{_fmt(_MT)}" '
                 f'width="{_fmt(_W - _ML - _MR)}" '
                 f'height="{_fmt(_H - _MT - _MB)}" fill="none" '
                 f'stroke="#000000" stroke-width="1"/>')

    # confidence bands first so every mean line draws on top
    for i, label in enumerate(labels):
        xs, _, lo, hi = series[label]
        color = PALETTE[i % len(PALETTE)]
        if len(xs) < 1:
            continue
        pts = [f"{_fmt(px(x))},{_fmt(py(v))}" for x, v in zip(xs, hi)]
        pts += [f"{_fmt(px(x))},{_fmt(py(v))}"
                for x, v in zip(reversed(xs), reversed(lo))]
        parts.append(f'<path d="M {" L ".join(pts)} Z" fill="{color}" '
                     f'fill-opacity="0.15" stroke="none"/>')
    for i, label in enumerate(labels):
        xs, ys, _, _ = series[label]
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(v))}"
                       for x, v in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')

    # legend, top right inside the frame
    for i, label in enumerate(labels):
        color = PALETTE[i % len(PALETTE)]
        ly = _MT + 14 + 16 * i
        lx = _W - _MR - 150
        parts.append(f'<line x1="{_fmt(lx)}" y1="{_fmt(ly - 4)}" '
                     f'x2="{_fmt(lx + 22)}" y2="{_fmt(ly - 4)}" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{_fmt(lx + 28)}" y="{_fmt(ly)}" '
                     f'font-family="sans-serif" font-size="12">'
                     f'{_escape(label)}</text>')

    x_label = "iteration" if x_axis == "iteration" else "wall time (s)"
    parts.append(f'<text x="{_fmt(_ML + (_W - _ML - _MR) / 2)}" '
                 f'y="{_fmt(_H - 10)}" font-family="sans-serif" '
                 f'font-size="13" text-anchor="middle">{x_label}</text>')
    parts.append(f'<text x="14" y="{_fmt(_MT + (_H - _MT - _MB) / 2)}" '
                 f'font-family="sans-serif" font-size="13" '
                 f'text-anchor="middle" transform="rotate(-90 14 '
                 f'{_fmt(_MT + (_H - _MT - _MB) / 2)})">'
                 f'{_escape(metric)}</text>')
    if title:
        parts.append(f'<text x="{_fmt(_ML + (_W - _ML - _MR) / 2)}" '
                     f'y="14" font-family="sans-serif" font-size="13" '
                     f'text-anchor="middle">{_escape(title)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))
