"""Design-rule checks over candidate and committed geometry.

Rules: minimum wire length and area, end-of-line spacing (active only when a
parallel neighbor edge exists), fixed-value parallel wire spacing, obstacle
and foreign-pin overlap, and a low-bending backstop per two-pin connection.

Geometric conventions, shared with the independent test oracle:

* parallel spacing: two shapes sharing a layer violate when their
  projections overlap on one axis and the separation on the other axis is
  below ``parallel_spacing`` (overlapping shapes violate trivially);
* end-of-line: beyond each segment end there is a cap band of longitudinal
  depth ``eol_within`` and lateral reach ``eol_space`` past the wire edges;
  foreign geometry inside the band violates, but only when a parallel wire
  no wider than ``par_width`` runs alongside the segment separated by a
  non-negative gap smaller than ``par_space`` (a laterally overlapping wire
  is a parallel-spacing violation instead and does not arm the caps).

Violations are data, not errors.  All checks exempt same-net geometry.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import Geom, Rect
from .routegrid import RoutingGraph, Vertex, WireSeg, seg_rect, via_rect
from .tech import TechRules

EPS = 1e-9

RULES = ("min_length", "min_area", "eol_spacing", "parallel_spacing",
         "obstacle_overlap", "bend_excess")


@dataclass(frozen=True)
class Violation:
    rule: str
    offender: Rect
    counterpart: Rect | None
    location: tuple[float, float]

    def sort_key(self):
        return (self.rule, self.location, self.offender.x0, self.offender.y0)


def _parallel_conflict(a: Rect, b: Rect, spacing: float) -> bool:
    """Projection overlap on one axis with sub-spacing separation on the other."""
    ox = a.overlap_x(b)
    oy = a.overlap_y(b)
    if ox > EPS and a.gap_y(b) < spacing - EPS:
        return True
    if oy > EPS and a.gap_x(b) < spacing - EPS:
        return True
    return False


def _has_parallel_edge(rect: Rect, axis: int, foreign: list[Geom], layer: int,
                       tech: TechRules) -> bool:
    for g in foreign:
        if g.kind != "wire" or not g.on_layer(layer):
            continue
        if axis == 0:
            run = rect.overlap_x(g.rect)
            gap = rect.gap_y(g.rect)
            width = g.rect.height
        else:
            run = rect.overlap_y(g.rect)
            gap = rect.gap_x(g.rect)
            width = g.rect.width
        if run > EPS and 0 <= gap < tech.par_space - EPS and width <= tech.par_width + EPS:
            return True
    return False


def end_cap_bands(rect: Rect, axis: int, tech: TechRules) -> list[Rect]:
    """The two end-of-line cap regions of a wire rectangle."""
    if axis == 0:
        lat = Rect(rect.x0, rect.y0 - tech.eol_space,
                   rect.x1, rect.y1 + tech.eol_space)
        return [Rect(lat.x0 - tech.eol_within, lat.y0, lat.x0, lat.y1),
                Rect(lat.x1, lat.y0, lat.x1 + tech.eol_within, lat.y1)]
    lat = Rect(rect.x0 - tech.eol_space, rect.y0,
               rect.x1 + tech.eol_space, rect.y1)
    return [Rect(lat.x0, lat.y0 - tech.eol_within, lat.x1, lat.y0),
            Rect(lat.x0, lat.y1, lat.x1, lat.y1 + tech.eol_within)]


def _query_neighborhood(graph: RoutingGraph, rect: Rect, tech: TechRules) -> list[Geom]:
    reach = max(tech.parallel_spacing, tech.eol_space, tech.eol_within,
                tech.par_space) + tech.max_wire_width
    return graph.index.query(rect.inflate(reach, reach))


def check_segment(seg: WireSeg, graph: RoutingGraph, tech: TechRules,
                  net: str) -> list[Violation]:
    """All rule violations a candidate wire run has against committed geometry."""
    rect = seg_rect(seg, tech.grid_step)
    length = seg.length_steps * tech.grid_step
    out: list[Violation] = []
    if length < tech.min_wire_length - EPS:
        out.append(Violation("min_length", rect, None, rect.center))
    if length * seg.width < tech.min_wire_area - EPS:
        out.append(Violation("min_area", rect, None, rect.center))

    nearby = _query_neighborhood(graph, rect, tech)
    foreign = [g for g in nearby if g.net != net and g.kind != "body"]
    bodies = [g for g in nearby if g.kind == "body"]

    for g in bodies:
        if rect.intersects(g.rect):
            out.append(Violation("obstacle_overlap", rect, g.rect, rect.center))
    for g in foreign:
        if g.kind == "pin" and rect.intersects(g.rect):
            out.append(Violation("obstacle_overlap", rect, g.rect, rect.center))

    for g in foreign:
        if g.on_layer(seg.layer) and _parallel_conflict(rect, g.rect,
                                                        tech.parallel_spacing):
            out.append(Violation("parallel_spacing", rect, g.rect, rect.center))

    if _has_parallel_edge(rect, seg.axis, foreign, seg.layer, tech):
        for band in end_cap_bands(rect, seg.axis, tech):
            for g in foreign:
                if g.on_layer(seg.layer) and band.intersects(g.rect):
                    out.append(Violation("eol_spacing", rect, g.rect, band.center))
    out.sort(key=Violation.sort_key)
    return out


def check_via(x: int, y: int, graph: RoutingGraph, tech: TechRules,
              net: str) -> list[Violation]:
    """Spacing/obstacle checks for a via landing pad (width-expanded square)."""
    rect = via_rect(x, y, tech)
    out: list[Violation] = []
    nearby = _query_neighborhood(graph, rect, tech)
    for g in nearby:
        if g.kind == "body":
            if rect.intersects(g.rect):
                out.append(Violation("obstacle_overlap", rect, g.rect, rect.center))
            continue
        if g.net == net:
            continue
        if g.kind == "pin" and rect.intersects(g.rect):
            out.append(Violation("obstacle_overlap", rect, g.rect, rect.center))
        if _parallel_conflict(rect, g.rect, tech.parallel_spacing):
            out.append(Violation("parallel_spacing", rect, g.rect, rect.center))
    out.sort(key=Violation.sort_key)
    return out


def check_route(connections, graph: RoutingGraph, tech: TechRules,
                net: str) -> list[Violation]:
    """Union of per-segment and per-via checks plus the bend-count backstop.

    ``connections`` is a list of (segments, vias) chains, one per two-pin
    connection; a chain must be connected.
    """
    out: list[Violation] = []
    for segments, vias in connections:
        _assert_connected(segments, vias)
        for seg in segments:
            out.extend(check_segment(seg, graph, tech, net))
        for x, y in vias:
            out.extend(check_via(x, y, graph, tech, net))
        bends = sum(1 for a, b in zip(segments, segments[1:]) if a.axis != b.axis)
        if bends > tech.bend_cap:
            rect = seg_rect(segments[0], tech.grid_step)
            out.append(Violation("bend_excess", rect, None, rect.center))
    out.sort(key=Violation.sort_key)
    return out


def _assert_connected(segments: list[WireSeg], vias: list[tuple[int, int]]) -> None:
    if len(segments) <= 1:
        return
    for a, b in zip(segments, segments[1:]):
        ends_a = {(a.x0, a.y0), (a.x1, a.y1)}
        ends_b = {(b.x0, b.y0), (b.x1, b.y1)}
        shared = ends_a & ends_b
        if not shared:
            raise ValueError("disconnected route chain")
        if a.layer != b.layer and not any((x, y) in vias for x, y in shared):
            raise ValueError("layer change without a via in route chain")


def violation_indicator(frm: Vertex, to: Vertex, graph: RoutingGraph,
                        tech: TechRules, net: str) -> int:
    """1 iff materializing this one-step move would break a spacing or
    obstacle rule against committed geometry.

    End-of-line caps are applied unconditionally on both ends of a planar
    step, which is conservative but keeps the shallow indicator sound with
    respect to the full per-segment check.  Pure: no graph state changes.
    """
    if frm[2] != to[2]:
        rect = via_rect(to[0], to[1], tech)
        nearby = _query_neighborhood(graph, rect, tech)
        for g in nearby:
            if g.kind == "body":
                if rect.intersects(g.rect):
                    return 1
                continue
            if g.net == net:
                continue
            if g.kind == "pin" and rect.intersects(g.rect):
                return 1
            if _parallel_conflict(rect, g.rect, tech.parallel_spacing):
                return 1
        return 0

    layer = frm[2]
    width = tech.wire_width(layer)
    seg = WireSeg(layer, frm[0], frm[1], to[0], to[1], width)
    rect = seg_rect(seg, tech.grid_step)
    nearby = _query_neighborhood(graph, rect, tech)
    bands = end_cap_bands(rect, seg.axis, tech)
    for g in nearby:
        if g.kind == "body":
            if rect.intersects(g.rect):
                return 1
            continue
        if g.net == net:
            continue
        if g.kind == "pin" and rect.intersects(g.rect):
            return 1
        if g.on_layer(layer):
            if _parallel_conflict(rect, g.rect, tech.parallel_spacing):
                return 1
            for band in bands:
                if band.intersects(g.rect):
                    return 1
    return 0
