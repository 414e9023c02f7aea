"""Minimal SVG line plots: axes, optional log scales, legend.

Just enough to eyeball a metric against t or n without pulling in a
plotting stack.  Output is a standalone SVG string; nothing here is
part of the numeric contract.
"""

from __future__ import annotations

import math

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 36, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, log: bool):
    if log:
        lo_e = math.floor(math.log10(lo))
        hi_e = math.ceil(math.log10(hi))
        return [10.0 ** e for e in range(int(lo_e), int(hi_e) + 1)]
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / 4))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= 6:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-12 * span:
        out.append(round(v, 12))
        v += step
    return out


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1000 or abs(v) < 0.01:
        return "%.0e" % v
    return ("%g" % v)


def render_plot(series, title="", xlabel="", ylabel="", logx=False,
                logy=False) -> str:
    """series: list of (label, xs, ys); returns the SVG document."""
    pts = [(x, y) for _, xs, ys in series for x, y in zip(xs, ys)
           if math.isfinite(x) and math.isfinite(y)
           and (not logx or x > 0) and (not logy or y > 0)]
    if not pts:
        raise ValueError("nothing finite to plot")
    xs_all = [p[0] for p in pts]
    ys_all = [p[1] for p in pts]
    xlo, xhi = min(xs_all), max(xs_all)
    ylo, yhi = min(ys_all), max(ys_all)
    if xlo == xhi:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    if ylo == yhi:
        ylo, yhi = ylo - 0.5 * abs(ylo or 1.0), yhi + 0.5 * abs(yhi or 1.0)
    if logx:
        xlo, xhi = xlo * 0.9, xhi * 1.1
    else:
        pad = 0.05 * (xhi - xlo)
        xlo, xhi = xlo - pad, xhi + pad
    if logy:
        ylo, yhi = ylo * 0.9, yhi * 1.1
    else:
        pad = 0.05 * (yhi - ylo)
        ylo, yhi = ylo - pad, yhi + pad

    def px(x):
        f = ((math.log10(x) - math.log10(xlo)) / (math.log10(xhi) - math.log10(xlo))
             if logx else (x - xlo) / (xhi - xlo))
        return _ML + f * (_W - _ML - _MR)

    def py(y):
        f = ((math.log10(y) - math.log10(ylo)) / (math.log10(yhi) - math.log10(ylo))
             if logy else (y - ylo) / (yhi - ylo))
        return _H - _MB - f * (_H - _MT - _MB)

    out = ['<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
           'viewBox="0 0 %d %d">' % (_W, _H, _W, _H),
           '<rect width="%d" height="%d" fill="white"/>' % (_W, _H)]
    if title:
        out.append('<text x="%d" y="22" font-size="15" text-anchor="middle" '
                   'font-family="sans-serif">%s</text>' % (_W // 2, title))
    # axes
    out.append('<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="black"/>'
               % (_ML, _H - _MB, _W - _MR, _H - _MB))
    out.append('<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="black"/>'
               % (_ML, _MT, _ML, _H - _MB))
    for tv in _ticks(xlo, xhi, logx):
        if not xlo <= tv <= xhi:
            continue
        x = px(tv)
        out.append('<line x1="%.1f" y1="%d" x2="%.1f" y2="%d" stroke="black"/>'
                   % (x, _H - _MB, x, _H - _MB + 5))
        out.append('<text x="%.1f" y="%d" font-size="11" text-anchor="middle" '
                   'font-family="sans-serif">%s</text>'
                   % (x, _H - _MB + 18, _fmt(tv)))
    for tv in _ticks(ylo, yhi, logy):
        if not ylo <= tv <= yhi:
            continue
        y = py(tv)
        out.append('<line x1="%d" y1="%.1f" x2="%d" y2="%.1f" stroke="black"/>'
                   % (_ML - 5, y, _ML, y))
        out.append('<text x="%d" y="%.1f" font-size="11" text-anchor="end" '
                   'font-family="sans-serif">%s</text>' % (_ML - 8, y + 4, _fmt(tv)))
    if xlabel:
        out.append('<text x="%d" y="%d" font-size="13" text-anchor="middle" '
                   'font-family="sans-serif">%s</text>'
                   % ((_ML + _W - _MR) // 2, _H - 12, xlabel))
    if ylabel:
        out.append('<text x="16" y="%d" font-size="13" text-anchor="middle" '
                   'font-family="sans-serif" transform="rotate(-90 16 %d)">%s</text>'
                   % ((_MT + _H - _MB) // 2, (_MT + _H - _MB) // 2, ylabel))
    for i, (label, xs, ys) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        coords = ["%.1f,%.1f" % (px(x), py(y)) for x, y in zip(xs, ys)
                  if math.isfinite(x) and math.isfinite(y)
                  and (not logx or x > 0) and (not logy or y > 0)]
        if not coords:
            continue
        out.append('<polyline points="%s" fill="none" stroke="%s" stroke-width="1.5"/>'
                   % (" ".join(coords), color))
        for c in coords:
            cx, cy = c.split(",")
            out.append('<circle cx="%s" cy="%s" r="2.5" fill="%s"/>' % (cx, cy, color))
        if label:
            ly = _MT + 16 * (i + 1)
            out.append('<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="%s" '
                       'stroke-width="1.5"/>' % (_W - _MR - 130, ly - 4,
                                                 _W - _MR - 105, ly - 4, color))
            out.append('<text x="%d" y="%d" font-size="11" font-family="sans-serif">'
                       '%s</text>' % (_W - _MR - 100, ly, label))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_plot(path, series, **kw):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_plot(series, **kw))
