"""Independent re-implementations used as test oracles.

Everything here is deliberately written from the rule definitions using
plain interval arithmetic and textbook algorithms, sharing no geometry or
search helpers with the package under test.
"""

import heapq
import itertools
import math

EPS = 1e-9


# --- geometric DRC oracle ------------------------------------------------------

def _box(rect):
    return (rect.x0, rect.y0, rect.x1, rect.y1)


def _overlap(a0, a1, b0, b1):
    return min(a1, b1) - max(a0, b0)


def _boxes_intersect(a, b):
    return (_overlap(a[0], a[2], b[0], b[2]) > EPS
            and _overlap(a[1], a[3], b[1], b[3]) > EPS)


def _parallel_close(a, b, spacing):
    ox = _overlap(a[0], a[2], b[0], b[2])
    oy = _overlap(a[1], a[3], b[1], b[3])
    if ox > EPS and max(-oy, 0.0) < spacing - EPS:
        return True
    if oy > EPS and max(-ox, 0.0) < spacing - EPS:
        return True
    return False


def segment_oracle(seg, geoms, tech, net):
    """Expected (rule, counterpart box or None) multiset for one candidate run.

    ``geoms`` is the full committed-geometry list (kind, layers, net, rect).
    """
    gs = tech.grid_step
    half = seg.width / 2
    if seg.axis == 0:
        lo, hi = sorted((seg.x0, seg.x1))
        box = (lo * gs - half, seg.y0 * gs - half,
               hi * gs + half, seg.y0 * gs + half)
    else:
        lo, hi = sorted((seg.y0, seg.y1))
        box = (seg.x0 * gs - half, lo * gs - half,
               seg.x0 * gs + half, hi * gs + half)
    length = seg.length_steps * gs

    out = []
    if length < tech.min_wire_length - EPS:
        out.append(("min_length", None))
    if length * seg.width < tech.min_wire_area - EPS:
        out.append(("min_area", None))

    foreign = [g for g in geoms if g.kind != "body" and g.net != net]
    for g in geoms:
        if g.kind == "body" and _boxes_intersect(box, _box(g.rect)):
            out.append(("obstacle_overlap", _box(g.rect)))
    for g in foreign:
        if g.kind == "pin" and _boxes_intersect(box, _box(g.rect)):
            out.append(("obstacle_overlap", _box(g.rect)))
    for g in foreign:
        if seg.layer in g.layers and _parallel_close(box, _box(g.rect),
                                                     tech.parallel_spacing):
            out.append(("parallel_spacing", _box(g.rect)))

    armed = False
    for g in foreign:
        if g.kind != "wire" or seg.layer not in g.layers:
            continue
        b = _box(g.rect)
        if seg.axis == 0:
            run = _overlap(box[0], box[2], b[0], b[2])
            gap = -_overlap(box[1], box[3], b[1], b[3])
            width = b[3] - b[1]
        else:
            run = _overlap(box[1], box[3], b[1], b[3])
            gap = -_overlap(box[0], box[2], b[0], b[2])
            width = b[2] - b[0]
        # a laterally overlapping wire (negative gap) does not arm the caps
        if (run > EPS and 0 <= gap < tech.par_space - EPS
                and width <= tech.par_width + EPS):
            armed = True
            break
    if armed:
        if seg.axis == 0:
            lo_b, hi_b = box[1] - tech.eol_space, box[3] + tech.eol_space
            bands = [(box[0] - tech.eol_within, lo_b, box[0], hi_b),
                     (box[2], lo_b, box[2] + tech.eol_within, hi_b)]
        else:
            lo_b, hi_b = box[0] - tech.eol_space, box[2] + tech.eol_space
            bands = [(lo_b, box[1] - tech.eol_within, hi_b, box[1]),
                     (lo_b, box[3], hi_b, box[3] + tech.eol_within)]
        for band in bands:
            for g in foreign:
                if seg.layer in g.layers and _boxes_intersect(band, _box(g.rect)):
                    out.append(("eol_spacing", _box(g.rect)))
    return sorted(out, key=lambda e: (e[0], e[1] or ()))


def violations_as_oracle_tuples(violations):
    return sorted(((v.rule, _box(v.counterpart) if v.counterpart else None)
                   for v in violations), key=lambda e: (e[0], e[1] or ()))


# --- shortest-path oracle --------------------------------------------------------

NO_DIR = -1
_DIRS = {(1, 0): 0, (-1, 0): 1, (0, 1): 2, (0, -1): 3}


def dijkstra_oracle(graph, tech, net, source, target, via_cost, drc_cost,
                    indicator=None, rmin=None, bend_cap=None):
    """Exact cheapest legal path cost over (vertex, direction, run, bends)
    states with the router's edge-cost function; None when unreachable.

    Legality mirrors the documented wire rules: straight runs sealed by a
    bend, via, or endpoint must reach ``rmin`` steps, runs never reverse,
    and bends per connection stay within ``bend_cap``.
    """
    if rmin is None:
        narrowest = min(l.width for l in tech.layers)
        rmin = max(1, math.ceil(max(tech.min_wire_length,
                                    tech.min_wire_area / narrowest)
                                / tech.grid_step - 1e-9))
    if bend_cap is None:
        bend_cap = tech.bend_cap
    if source == target:
        return 0.0
    hist = graph.history
    bend_pen = tech.bend_penalty
    start = (source, NO_DIR, 0, 0)
    dist = {start: 0.0}
    pq = [(0.0, 0, start)]
    tick = itertools.count(1)
    best = None
    while pq:
        g, _, state = heapq.heappop(pq)
        if g > dist.get(state, float("inf")) + EPS:
            continue
        v, d, run, bends = state
        if v == target and (run == 0 or run >= rmin):
            if best is None or g < best:
                best = g
            continue
        for n in graph.neighbors(v):
            if n[2] != v[2]:
                if 0 < run < rmin:
                    continue
                nstate = (n, d, 0, bends)
                cost = via_cost
            else:
                nd = _DIRS[(n[0] - v[0], n[1] - v[1])]
                if run > 0 and nd == d ^ 1:
                    continue
                if d == NO_DIR or nd >> 1 == d >> 1:
                    nstate = (n, nd, min(run + 1, rmin), bends)
                    cost = 1.0
                else:
                    if 0 < run < rmin or bends + 1 > bend_cap:
                        continue
                    nstate = (n, nd, 1, bends + 1)
                    cost = 1.0 + bend_pen
            drc = drc_cost * indicator(v, n) if indicator and drc_cost else 0.0
            ng = g + cost + drc + hist.get(n, 0.0)
            if ng < dist.get(nstate, float("inf")) - EPS:
                dist[nstate] = ng
                heapq.heappush(pq, (ng, next(tick), nstate))
    return best
