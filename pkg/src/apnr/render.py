"""Deterministic SVG rendering of placements and routed layouts.

Devices are labeled rectangles with dashed routing-halo outlines; layer-0
wires, layer-1 wires and vias each get their own fill.  The viewBox equals
the layout bounding box.
"""

from __future__ import annotations

from .floorplan import Placement
from .routegrid import WireSeg, seg_rect, via_rect
from .tech import TechRules

_DEVICE_FILL = "#d9d9d9"
_LAYER_FILLS = ("#1f77b4", "#d62728")
_VIA_FILL = "#2ca02c"


def _fmt(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


def render_svg(placements: dict[str, Placement], routes, tech: TechRules,
               cell_pitch: float, margin: float = 4.0) -> str:
    """Build an SVG document; ``routes`` maps net id to a Route (may be empty)."""
    elems: list[str] = []
    xs, ys = [0.0], [0.0]
    for dev_id in sorted(placements):
        p = placements[dev_id]
        hx0, hy0, hx1, hy1 = (c * cell_pitch for c in p.padded_bounds)
        xs += [hx0, hx1]
        ys += [hy0, hy1]

    for dev_id in sorted(placements):
        p = placements[dev_id]
        x0, y0, x1, y1 = (c * cell_pitch for c in p.bounds)
        hx0, hy0, hx1, hy1 = (c * cell_pitch for c in p.padded_bounds)
        elems.append(
            f'<rect class="halo" x="{_fmt(hx0)}" y="{_fmt(hy0)}" '
            f'width="{_fmt(hx1 - hx0)}" height="{_fmt(hy1 - hy0)}" '
            f'fill="none" stroke="#999999" stroke-dasharray="2,2" stroke-width="0.2"/>')
        elems.append(
            f'<rect class="device" x="{_fmt(x0)}" y="{_fmt(y0)}" '
            f'width="{_fmt(x1 - x0)}" height="{_fmt(y1 - y0)}" '
            f'fill="{_DEVICE_FILL}" stroke="#333333" stroke-width="0.3"/>')
        elems.append(
            f'<text class="label" x="{_fmt((x0 + x1) / 2)}" y="{_fmt((y0 + y1) / 2)}" '
            f'font-size="{_fmt(max(1.0, (y1 - y0) / 4))}" text-anchor="middle" '
            f'dominant-baseline="middle">{dev_id}</text>')

    for net_id in sorted(routes):
        route = routes[net_id]
        for chain in route.chains:
            for seg in chain.segments:
                r = seg_rect(seg, tech.grid_step)
                xs += [r.x0, r.x1]
                ys += [r.y0, r.y1]
                elems.append(
                    f'<rect class="wire l{seg.layer}" x="{_fmt(r.x0)}" y="{_fmt(r.y0)}" '
                    f'width="{_fmt(r.width)}" height="{_fmt(r.height)}" '
                    f'fill="{_LAYER_FILLS[seg.layer]}" fill-opacity="0.75"/>')
            for vx, vy in chain.vias:
                r = via_rect(vx, vy, tech)
                elems.append(
                    f'<rect class="via" x="{_fmt(r.x0)}" y="{_fmt(r.y0)}" '
                    f'width="{_fmt(r.width)}" height="{_fmt(r.height)}" '
                    f'fill="{_VIA_FILL}"/>')

    x0, y0 = min(xs) - margin, min(ys) - margin
    w = max(xs) - min(xs) + 2 * margin
    h = max(ys) - min(ys) + 2 * margin
    body = "\n".join(elems)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{_fmt(x0)} {_fmt(y0)} {_fmt(w)} {_fmt(h)}">\n'
        f'<g transform="translate(0,{_fmt(2 * y0 + h)}) scale(1,-1)">\n'
        f"{body}\n</g>\n</svg>\n")
