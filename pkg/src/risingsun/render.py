"""Static SVG 1.1 figures of 1-D and 2-D decompositions.

Selected rectangles are filled, residual leaves are hatched. Output depends
only on the inputs, so identical decompositions give byte-identical files.
"""
from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

from .decompose import RESOLUTION_LIMIT, Decomposition
from .geometry import Rectangle, format_scalar

MARGIN = 20
KIND_FILL = "#f2a541"
DEPTH_PALETTE = ("#fde725", "#a0da39", "#4ac16d", "#1fa187", "#277f8e",
                 "#365c8d", "#46327e", "#440154")
COLOR_MODES = ("kind", "depth")


class UnsupportedDimensionError(ValueError):
    """Only 1-D and 2-D decompositions can be drawn."""


def _num(v: float) -> str:
    s = "%.3f" % v
    return "0.000" if s == "-0.000" else s


class _Affine:
    """Maps domain coordinates onto the viewport, y axis pointing up."""

    def __init__(self, domain: Rectangle, width: int, height: int):
        self.x0 = float(domain.sides[0].lo)
        self.xspan = float(domain.sides[0].length)
        self.sx = (width - 2 * MARGIN) / self.xspan
        self.height = height
        if domain.dim == 2:
            self.y0 = float(domain.sides[1].lo)
            self.sy = (height - 2 * MARGIN) / float(domain.sides[1].length)

    def x(self, v) -> float:
        return MARGIN + (float(v) - self.x0) * self.sx

    def y(self, v) -> float:
        return self.height - MARGIN - (float(v) - self.y0) * self.sy


def _fill(depth: int, color_by: str) -> str:
    if color_by == "depth":
        return DEPTH_PALETTE[depth % len(DEPTH_PALETTE)]
    return KIND_FILL


def _header(width: int, height: int, title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f"<title>{escape(title)}</title>",
        "<defs>",
        '<pattern id="hatch" patternUnits="userSpaceOnUse" width="6" height="6" '
        'patternTransform="rotate(45)">',
        '<line x1="0" y1="0" x2="0" y2="6" stroke="#555555" stroke-width="1.5"/>',
        "</pattern>",
        '<pattern id="hatch-limit" patternUnits="userSpaceOnUse" width="6" height="6" '
        'patternTransform="rotate(-45)">',
        '<line x1="0" y1="0" x2="0" y2="6" stroke="#c0392b" stroke-width="1.5"/>',
        "</pattern>",
        "</defs>",
        f'<rect class="background" x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]


def _box(cls: str, x0: float, y0: float, x1: float, y1: float, fill: str, label: str) -> str:
    return (f'<rect class="{cls}" x="{_num(x0)}" y="{_num(y0)}" width="{_num(x1 - x0)}" '
            f'height="{_num(y1 - y0)}" fill="{fill}" stroke="#222222" stroke-width="0.5">'
            f"<title>{escape(label)}</title></rect>")


def _hatch(reason: str) -> str:
    return "url(#hatch-limit)" if reason == RESOLUTION_LIMIT else "url(#hatch)"


def render_svg(dec: Decomposition, width: int = 640, height: int = 640,
               color_by: str = "kind") -> str:
    """SVG text for a decomposition over a 1-D or 2-D domain."""
    if color_by not in COLOR_MODES:
        raise ValueError(f"color_by must be one of {COLOR_MODES}, got {color_by!r}")
    if width <= 2 * MARGIN or height <= 2 * MARGIN:
        raise ValueError(f"viewport {width}x{height} is too small")
    domain = dec.domain
    if domain.dim not in (1, 2):
        raise UnsupportedDimensionError(f"cannot render a {domain.dim}-D decomposition")
    selected = [(n.rect, n.depth, n.mean) for n in dec.selected_nodes]
    residual = [(r, reason) for r, reason in dec.residual_leaves]
    if not selected and not residual:
        residual = [(domain, "below-level")]
    title = f"level {format_scalar(dec.level)}"
    if domain.dim == 1:
        body = _render_1d(domain, selected, residual, width, height, color_by)
    else:
        body = _render_2d(domain, selected, residual, width, height, color_by)
    return "\n".join(_header(width, height, title) + body + ["</svg>"]) + "\n"


def _mean_label(rect: Rectangle, mean) -> str:
    return f"{rect} mean={'undefined' if mean is None else format_scalar(mean)}"


def _render_2d(domain, selected, residual, width, height, color_by) -> list[str]:
    m = _Affine(domain, width, height)
    out = []
    for r, reason in residual:
        (a, b), (c, d) = r.sides
        out.append(_box("residual", m.x(a), m.y(d), m.x(b), m.y(c), _hatch(reason),
                        f"{r} reason={reason}"))
    for r, depth, mean in selected:
        (a, b), (c, d) = r.sides
        out.append(_box("selected", m.x(a), m.y(d), m.x(b), m.y(c), _fill(depth, color_by),
                        _mean_label(r, mean)))
    (a, b), (c, d) = domain.sides
    out.append(f'<rect class="domain" x="{_num(m.x(a))}" y="{_num(m.y(d))}" '
               f'width="{_num(m.x(b) - m.x(a))}" height="{_num(m.y(c) - m.y(d))}" '
               'fill="none" stroke="#000000" stroke-width="1"/>')
    return out


def _render_1d(domain, selected, residual, width, height, color_by) -> list[str]:
    # one horizontal bar per interval, all on a shared track
    m = _Affine(domain, width, height)
    top = MARGIN
    bottom = height - 2 * MARGIN
    out = []
    for r, reason in residual:
        (a, b), = r.sides
        out.append(_box("residual", m.x(a), top, m.x(b), bottom, _hatch(reason),
                        f"{r} reason={reason}"))
    for r, depth, mean in selected:
        (a, b), = r.sides
        out.append(_box("selected", m.x(a), top, m.x(b), bottom, _fill(depth, color_by),
                        _mean_label(r, mean)))
    (a, b), = domain.sides
    out.append(f'<line class="axis" x1="{_num(m.x(a))}" y1="{_num(bottom)}" '
               f'x2="{_num(m.x(b))}" y2="{_num(bottom)}" stroke="#000000" stroke-width="1"/>')
    ticks = sorted({float(v): v for r, *_ in selected + residual for v in r.sides[0]}.items())
    for fx, v in ticks:
        out.append(f'<text class="tick" x="{_num(m.x(v))}" y="{_num(bottom + 14)}" '
                   f'font-size="10" text-anchor="middle">{escape(format_scalar(v))}</text>')
    return out


def rect_viewport(domain: Rectangle, rect: Rectangle, width: int, height: int) -> tuple:
    """Viewport box ``(x, y, w, h)`` a 2-D rectangle is drawn at, for tests and callers."""
    m = _Affine(domain, width, height)
    (a, b), (c, d) = rect.sides
    return (m.x(a), m.y(d), m.x(b) - m.x(a), m.y(c) - m.y(d))


def render_rects(domain: Rectangle, rects: Sequence[Rectangle], width: int = 640,
                 height: int = 640) -> str:
    """Plain figure of a rectangle family (for example Calderon-Zygmund cubes)."""
    from .decompose import Decomposition, DivisionNode, SelectedWhole

    nodes = [DivisionNode(r, None, 0, SelectedWhole()) for r in rects]
    dec = Decomposition(0, None, nodes, [], True, True, domain)
    return render_svg(dec, width, height)
