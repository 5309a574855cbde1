"""Static SVG forceplots of DIP decompositions.

Each report entry becomes one column of stacked, signed bars starting at
zero:

======================  =========  =====================================
part                    colour     drawn as
======================  =========  =====================================
standalone              #9e9e9e    ``+standalone``
interaction surplus     #2e7d32    ``+interaction``
dependencies            #6a1b9a    ``-dependencies`` (upward when dep < 0)
cross-predictability    #6a1b9a    slim bar, ``-cross_pred``, 60% opacity
covariance              #6a1b9a    slim bar, ``-covariance``, 35% opacity
score                   #000000    horizontal line
======================  =========  =====================================

The stack ends at ``standalone + interaction - dependencies``, which is the
score itself, marked by the black line. The slim bars next to each column
split the dependencies term and are drawn from zero. Coordinates are
rounded to two decimals so output is byte-stable.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from .report import Report, ReportError, atomic_write_text, bar_specs

WIDTH, HEIGHT = 1000, 600
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 30, 60
COLORS = {
    "standalone": "#9e9e9e",
    "interaction": "#2e7d32",
    "dependencies": "#6a1b9a",
    "score": "#000000",
}
SUB_OPACITY = {"cross_pred": 0.6, "covariance": 0.35}


def _f(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def render_svg(report: Report) -> str:
    specs = bar_specs(report) if report.entries else []
    if not specs:
        raise ReportError("cannot plot an empty report")

    levels = [0.0]
    for s in specs:
        a = s.standalone
        b = a + s.interaction
        levels += [a, b, b - s.dependencies, s.score]
        for sub in (s.cross_pred, s.covariance):
            if sub is not None:
                levels.append(-sub)
    lo, hi = min(levels), max(levels)
    pad = 0.05 * (hi - lo) if hi > lo else 1.0
    lo, hi = lo - pad, hi + pad
    plot_h = HEIGHT - MARGIN_T - MARGIN_B
    plot_w = WIDTH - MARGIN_L - MARGIN_R

    def y(v):
        return MARGIN_T + (hi - v) / (hi - lo) * plot_h

    col_w = plot_w / len(specs)
    bar_w = 0.45 * col_w
    sub_w = 0.12 * col_w

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<line class="axis" x1="{MARGIN_L}" y1="{_f(y(0.0))}" x2="{WIDTH - MARGIN_R}" '
        f'y2="{_f(y(0.0))}" stroke="#bdbdbd" stroke-width="1"/>',
        f'<text x="{MARGIN_L - 8}" y="{_f(y(0.0) + 4)}" font-size="12" text-anchor="end">0</text>',
    ]
    for i, s in enumerate(specs):
        x0 = MARGIN_L + i * col_w + 0.1 * col_w
        start = 0.0
        for part, delta in (("standalone", s.standalone), ("interaction", s.interaction),
                            ("dependencies", -s.dependencies)):
            end = start + delta
            top, bot = y(max(start, end)), y(min(start, end))
            out.append(
                f'<rect class="seg {part}" x="{_f(x0)}" y="{_f(top)}" width="{_f(bar_w)}" '
                f'height="{_f(bot - top)}" fill="{COLORS[part]}"><title>{part} {delta:.4g}</title></rect>'
            )
            start = end
        xs = x0 + bar_w + 0.04 * col_w
        for part in ("cross_pred", "covariance"):
            val = getattr(s, part)
            if val is None:
                continue
            top, bot = y(max(0.0, -val)), y(min(0.0, -val))
            out.append(
                f'<rect class="sub {part}" x="{_f(xs)}" y="{_f(top)}" width="{_f(sub_w)}" '
                f'height="{_f(bot - top)}" fill="{COLORS["dependencies"]}" '
                f'fill-opacity="{SUB_OPACITY[part]}"><title>{part} {-val:.4g}</title></rect>'
            )
            xs += sub_w + 0.02 * col_w
        ys = _f(y(s.score))
        out.append(
            f'<line class="score" x1="{_f(x0 - 0.05 * col_w)}" y1="{ys}" '
            f'x2="{_f(x0 + bar_w + 0.05 * col_w)}" y2="{ys}" stroke="{COLORS["score"]}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{_f(x0 + bar_w / 2)}" y="{HEIGHT - MARGIN_B + 20}" font-size="12" '
            f'text-anchor="middle">{escape(str(s.label))}</text>'
        )
        out.append(
            f'<text x="{_f(x0 + bar_w / 2)}" y="{_f(y(s.score) - 6)}" font-size="11" '
            f'text-anchor="middle">{s.score:.3f}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_forceplot(report: Report, out) -> str:
    """Write the forceplot for ``report`` to ``out``; returns the path."""
    atomic_write_text(out, render_svg(report))
    return str(out)
