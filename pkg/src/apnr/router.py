"""Negotiated rip-up-and-reroute engine.

Pin-side projection, MST net decomposition, failure-driven net ordering, and
a bidirectional dynamically weighted A* over the routing lattice.  Per-step
cost is Manhattan distance plus a via cost, a DRC-violation penalty, the
vertex history cost, and a bend penalty on direction changes.  Node priority
uses the dynamic weighting with the near-goal tie-break factor.

Search states are (vertex, last planar axis, straight-run length) so bend
costs compose exactly and minimum wire length/area are enforced as hard
constraints during expansion: a bend or via that would seal a straight run
shorter than the minimum is simply not generated.  The test oracle runs
Dijkstra over the same state space.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

from .drc import check_route, violation_indicator
from .floorplan import GridConfig, Placement
from .netlist import Net, Netlist
from .routegrid import RoutingGraph, Vertex, WireSeg
from .tech import TechRules

INF = float("inf")
NO_AXIS = -1


class RoutingError(ValueError):
    pass


class UnroutableNetError(RoutingError):
    """A pin cannot be projected to any reachable block-side vertex."""


@dataclass(frozen=True)
class SearchParams:
    kappa: float = 3.0
    q: float = 0.0001
    via_cost: float | None = None    # None: take from tech
    drc_cost: float | None = None
    max_iterations: int = 35
    history_increment: float = 5.0
    enumeration_cap: int = 6
    rip_after: int = 2               # failures before committed blockers are ripped

    def __post_init__(self):
        if self.kappa < 1:
            raise RoutingError("kappa must be >= 1")
        if self.q < 0:
            raise RoutingError("q must be non-negative")


@dataclass
class NetTask:
    net_id: str
    terminals: list[tuple[str, Vertex, str]]  # (pin id, vertex, side)
    hpwl: float
    pin_count: int
    failure_count: int = 0


@dataclass
class Chain:
    """One routed two-pin connection."""

    segments: list[WireSeg]
    vias: list[tuple[int, int]]
    vertices: list[Vertex]
    cost: float


@dataclass
class Route:
    net_id: str
    chains: list[Chain]

    @property
    def vertices(self) -> list[Vertex]:
        seen = set()
        out = []
        for chain in self.chains:
            for v in chain.vertices:
                if v not in seen:
                    seen.add(v)
                    out.append(v)
        return out

    def wirelength_steps(self) -> int:
        return sum(seg.length_steps for ch in self.chains for seg in ch.segments)

    def via_count(self) -> int:
        return sum(len(ch.vias) for ch in self.chains)


@dataclass
class RoutedLayout:
    placements: dict[str, Placement]
    routes: dict[str, Route]
    net_status: dict[str, str]     # "routed" | "failed" | "unroutable"
    iterations: int
    wirelength_um: float
    via_count: int
    failed: bool


# --- pin-side projection ------------------------------------------------------

def _terminal_options(pin_id: str, netlist: Netlist,
                      placements: dict[str, Placement], graph: RoutingGraph,
                      scale: int, h_layer: int, v_layer: int):
    """Candidate (side, vertex) pairs for one pin, sides in tie-break order."""
    dev = netlist.pin_owner(pin_id)
    pin = netlist.pin(pin_id)
    p = placements[dev.id]
    dx, dy = dev.pin_offset(pin, p.variant)
    px, py = (p.x + dx) * scale, (p.y + dy) * scale
    off = scale
    if pin.direction == "horizontal":
        options = [("left", (p.x * scale - off, py, h_layer)),
                   ("right", ((p.x + p.width) * scale + off, py, h_layer))]
    else:
        options = [("bottom", (px, p.y * scale - off, v_layer)),
                   ("top", (px, (p.y + p.height) * scale + off, v_layer))]
    return [(side, v) for side, v in options if graph.contains(v)]


def _hpwl_of(vertices: list[Vertex]) -> float:
    xs = [v[0] for v in vertices]
    ys = [v[1] for v in vertices]
    return (max(xs) - min(xs)) + (max(ys) - min(ys))


def project_pins(net: Net, netlist: Netlist, placements: dict[str, Placement],
                 graph: RoutingGraph, grid: GridConfig, tech: TechRules,
                 enumeration_cap: int = 6) -> list[tuple[str, Vertex, str]]:
    """Assign each pin a block side and boundary vertex minimizing net HPWL.

    Exhaustive over all side combinations up to the enumeration cap, greedy
    per-pin (id order) beyond it.  Ties resolve toward the left/bottom side.
    """
    scale = round(grid.cell_pitch / tech.grid_step)
    h_layer = next(i for i, l in enumerate(tech.layers) if l.direction == "h")
    v_layer = 1 - h_layer
    per_pin = []
    for pin_id in net.pins:
        options = _terminal_options(pin_id, netlist, placements, graph,
                                    scale, h_layer, v_layer)
        if not options:
            raise UnroutableNetError(
                f"net {net.id}: pin {pin_id} has no reachable boundary vertex")
        per_pin.append((pin_id, options))

    if len(per_pin) == 1:
        pin_id, options = per_pin[0]
        side, vertex = options[0]
        return [(pin_id, vertex, side)]

    if len(per_pin) <= enumeration_cap:
        best = None
        best_hpwl = INF
        for combo in itertools.product(*[opts for _, opts in per_pin]):
            hpwl = _hpwl_of([v for _, v in combo])
            if hpwl < best_hpwl:
                best_hpwl = hpwl
                best = combo
        return [(pin_id, v, side)
                for (pin_id, _), (side, v) in zip(per_pin, best)]

    chosen: list[tuple[str, Vertex, str]] = []
    picked: list[Vertex] = []
    for pin_id, options in sorted(per_pin, key=lambda e: e[0]):
        best = None
        best_hpwl = INF
        for side, v in options:
            hpwl = _hpwl_of(picked + [v])
            if hpwl < best_hpwl:
                best_hpwl = hpwl
                best = (side, v)
        picked.append(best[1])
        chosen.append((pin_id, best[1], best[0]))
    order = {pid: i for i, pid in enumerate(net.pins)}
    chosen.sort(key=lambda e: order[e[0]])
    return chosen


# --- net decomposition and ordering -------------------------------------------

def decompose_net(terminals: list[Vertex]) -> list[tuple[int, int]]:
    """Minimum-spanning-tree edges (index pairs) under Manhattan distance.

    Deterministic: Prim from terminal 0, ties by terminal index.
    """
    n = len(terminals)
    if n < 2:
        return []

    def dist(a: Vertex, b: Vertex) -> int:
        return abs(a[0] - b[0]) + abs(a[1] - b[1])

    in_tree = [False] * n
    in_tree[0] = True
    best_d = [dist(terminals[0], t) for t in terminals]
    best_p = [0] * n
    edges = []
    for _ in range(n - 1):
        j = min((i for i in range(n) if not in_tree[i]),
                key=lambda i: (best_d[i], i))
        edges.append((best_p[j], j))
        in_tree[j] = True
        for i in range(n):
            if not in_tree[i]:
                d = dist(terminals[j], terminals[i])
                if d < best_d[i]:
                    best_d[i] = d
                    best_p[i] = j
    return edges


def order_nets(tasks: list[NetTask]) -> list[NetTask]:
    """Descending (failure count, HPWL, pin count); net id ascending last."""
    return sorted(tasks, key=lambda t: (-t.failure_count, -t.hpwl,
                                        -t.pin_count, t.net_id))


# --- bidirectional weighted A* -------------------------------------------------

class SearchFailure(Exception):
    def __init__(self, expanded: int):
        super().__init__(f"frontiers exhausted after {expanded} expansions")
        self.expanded = expanded


def min_run_steps(tech: TechRules) -> int:
    """Shortest legal straight run in grid steps (length and area rules)."""
    narrowest = min(l.width for l in tech.layers)
    need = max(tech.min_wire_length, tech.min_wire_area / narrowest)
    return max(1, math.ceil(need / tech.grid_step - 1e-9))


NO_DIR = -1
# planar step directions: +x, -x, +y, -y; d ^ 1 is the reverse direction
_DIR_OF_STEP = {(1, 0): 0, (-1, 0): 1, (0, 1): 2, (0, -1): 3}


def _axis_of(direction: int) -> int:
    return NO_AXIS if direction == NO_DIR else direction >> 1


class _Side:
    __slots__ = ("start", "goal", "open", "g", "settled", "parent",
                 "settled_by_vertex", "counter")

    def __init__(self, start: Vertex, goal: Vertex, g0: float):
        self.start = start
        self.goal = goal
        self.open: list = []
        self.g: dict = {(start, NO_DIR, 0, 0): g0}
        self.settled: set = set()
        self.parent: dict = {(start, NO_DIR, 0, 0): None}
        # vertex -> {(direction, run, bends): g} for settled labels
        self.settled_by_vertex: dict[Vertex, dict[tuple[int, int, int], float]] = {}
        self.counter = itertools.count()


def astar_two_pin(graph: RoutingGraph, tech: TechRules, net: str,
                  source: Vertex, target: Vertex, params: SearchParams,
                  indicator_cache: dict | None = None):
    """Bidirectional dynamically weighted A* between two lattice vertices.

    Search states are (vertex, last planar direction, straight-run length,
    bend count): runs shorter than the tech minimum cannot be sealed by a
    bend or via, 180-degree reversals inside a run are never generated (the
    emitted wire is always the union of its steps), and paths never exceed
    the per-connection bend cap.  Returns (Chain, expanded_count).  Raises
    SearchFailure when no legal path exists.  With kappa=1 and tiny q the
    returned cost is exact; in general it is within kappa times the optimum.

    ``indicator_cache`` memoizes the per-edge DRC indicator; pass the same
    dict across searches only while committed geometry is unchanged.
    """
    if not graph.contains(source) or not graph.contains(target):
        raise RoutingError("source/target must be non-obstacle lattice vertices")
    if source == target:
        return Chain([], [], [source], 0.0), 0

    via_cost = params.via_cost if params.via_cost is not None else tech.via_cost
    drc_cost = params.drc_cost if params.drc_cost is not None else tech.drc_penalty
    bend_pen = tech.bend_penalty
    kappa, q = params.kappa, params.q
    hist = graph.history
    rmin = min_run_steps(tech)
    bend_cap = tech.bend_cap
    cache = indicator_cache if indicator_cache is not None else {}

    def indicator(a: Vertex, b: Vertex) -> int:
        # symmetric: the candidate rect is the same for both directions
        key = (a, b) if a <= b else (b, a)
        val = cache.get(key)
        if val is None:
            val = violation_indicator(a, b, graph, tech, net)
            cache[key] = val
        return val

    def h_adm(v: Vertex, goal: Vertex) -> float:
        return (abs(v[0] - goal[0]) + abs(v[1] - goal[1])
                + via_cost * abs(v[2] - goal[2]))

    def priority(g: float, hw: float) -> float:
        if g < hw:
            return g + hw
        return (g + (2 * kappa - 1) * hw) / kappa

    fwd = _Side(source, target, 0.0)
    bwd = _Side(target, source, hist.get(target, 0.0))
    for side in (fwd, bwd):
        hw = h_adm(side.start, side.goal) * (1 + q)
        heapq.heappush(side.open,
                       (priority(side.g[(side.start, NO_DIR, 0, 0)], hw),
                        next(side.counter), side.start, NO_DIR, 0, 0))

    mu = INF
    meet = None  # (vertex, fwd (dir, run, bends), bwd (dir, run, bends))
    expanded = 0

    def bound(side: _Side) -> float:
        while side.open:
            f, _, v, d, run, bends = side.open[0]
            state = (v, d, run, bends)
            if state in side.settled or state not in side.g:
                heapq.heappop(side.open)
                continue
            return f
        return INF

    def expand(side: _Side, other: _Side, forward: bool) -> bool:
        nonlocal mu, meet, expanded
        while side.open:
            f, _, v, d, run, bends = heapq.heappop(side.open)
            state = (v, d, run, bends)
            if state in side.settled:
                continue
            if state not in side.g:
                continue
            g = side.g[state]
            break
        else:
            return False
        side.settled.add(state)
        side.settled_by_vertex.setdefault(v, {})[(d, run, bends)] = g
        expanded += 1
        axis = _axis_of(d)

        # stitch with the other frontier's settled labels at this vertex.
        # Head-on colinear runs merge into one straight segment (lengths
        # add); any other combination seals both runs at the meeting
        # vertex, so each must individually satisfy the minimum.
        if v in other.settled_by_vertex:
            for (od, orun, obends), og in other.settled_by_vertex[v].items():
                oaxis = _axis_of(od)
                stitch_bend = False
                if run > 0 and orun > 0 and axis == oaxis:
                    if od != d ^ 1:
                        continue  # same direction: the path would reverse
                    if run + orun < rmin:
                        continue
                else:
                    if (0 < run < rmin) or (0 < orun < rmin):
                        continue
                    stitch_bend = (axis != NO_AXIS and oaxis != NO_AXIS
                                   and axis != oaxis)
                if bends + obends + (1 if stitch_bend else 0) > bend_cap:
                    continue
                cand = g + og - hist.get(v, 0.0)
                if stitch_bend:
                    cand += bend_pen
                if cand < mu:
                    mu = cand
                    meet = ((v, (d, run, bends), (od, orun, obends))
                            if forward
                            else (v, (od, orun, obends), (d, run, bends)))

        for n in graph.neighbors(v):
            dl = n[2] - v[2]
            if dl == 0:
                n_dir = _DIR_OF_STEP[(n[0] - v[0], n[1] - v[1])]
                if run > 0 and n_dir == d ^ 1:
                    continue  # 180-degree reversal inside a run
                n_axis = n_dir >> 1
                if n_axis == axis or axis == NO_AXIS:
                    n_run = min(run + 1, rmin)
                    n_bends = bends
                    bend = 0.0
                else:
                    if 0 < run < rmin:
                        continue  # bend would seal a sub-minimum run
                    if bends + 1 > bend_cap:
                        continue
                    n_run = 1
                    n_bends = bends + 1
                    bend = bend_pen
                step = 1.0
            else:
                if 0 < run < rmin:
                    continue  # via would seal a sub-minimum run
                n_dir = d
                n_run = 0
                n_bends = bends
                step = via_cost
                bend = 0.0
            drc = drc_cost * indicator(v, n) if drc_cost > 0 else 0.0
            ng = g + step + bend + drc + hist.get(n, 0.0)
            nstate = (n, n_dir, n_run, n_bends)
            if ng < side.g.get(nstate, INF) - 1e-12:
                side.g[nstate] = ng
                side.parent[nstate] = state
                side.settled.discard(nstate)  # reopen on improvement
                hw = h_adm(n, side.goal) * (1 + q)
                heapq.heappush(side.open, (priority(ng, hw),
                                           next(side.counter),
                                           n, n_dir, n_run, n_bends))
        return True

    turn = 0
    while True:
        bf, bb = bound(fwd), bound(bwd)
        if bf == INF and bb == INF:
            if mu < INF:
                break
            raise SearchFailure(expanded)
        if mu < INF and mu <= (kappa / (1 + q)) * max(bf, bb):
            break
        side = fwd if turn == 0 else bwd
        other = bwd if turn == 0 else fwd
        if not side.open:
            side, other = other, side
        expand(side, other, side is fwd)
        turn ^= 1

    v, lf, lb = meet
    path = _trace(fwd, (v, *lf))[::-1] + _trace(bwd, (v, *lb))[1:]
    chain = _path_to_chain(path, tech, mu)
    return chain, expanded


def _trace(side: _Side, state) -> list[Vertex]:
    out = []
    while state is not None:
        out.append(state[0])
        state = side.parent[state]
    return out


def _path_to_chain(path: list[Vertex], tech: TechRules, cost: float) -> Chain:
    segments: list[WireSeg] = []
    vias: list[tuple[int, int]] = []
    run_start = path[0]
    run_axis = None
    prev = path[0]
    for v in path[1:]:
        if v[2] != prev[2]:
            if run_axis is not None and (prev[0], prev[1]) != (run_start[0], run_start[1]):
                segments.append(WireSeg(prev[2], run_start[0], run_start[1],
                                        prev[0], prev[1], tech.wire_width(prev[2])))
            vias.append((v[0], v[1]))
            run_start = v
            run_axis = None
        else:
            axis = 0 if v[0] != prev[0] else 1
            if run_axis is None:
                run_axis = axis
                if (run_start[0], run_start[1]) != (prev[0], prev[1]):
                    run_start = prev
            elif axis != run_axis:
                segments.append(WireSeg(prev[2], run_start[0], run_start[1],
                                        prev[0], prev[1], tech.wire_width(prev[2])))
                run_start = prev
                run_axis = axis
        prev = v
    if run_axis is not None and (prev[0], prev[1]) != (run_start[0], run_start[1]):
        segments.append(WireSeg(prev[2], run_start[0], run_start[1],
                                prev[0], prev[1], tech.wire_width(prev[2])))
    return Chain(segments=segments, vias=vias, vertices=list(path), cost=cost)


# --- top-level negotiated loop --------------------------------------------------

def route_all(placements: dict[str, Placement], netlist: Netlist,
              graph: RoutingGraph, tech: TechRules, grid: GridConfig,
              params: SearchParams | None = None) -> RoutedLayout:
    """Negotiated rip-up and reroute over all nets.

    Nets are retried in failure/HPWL/pin-count priority order for up to the
    iteration cap; failing routes charge history onto their own vertices
    before removal.  A net that keeps failing against committed wires rips
    the blocking nets: their geometry is uncommitted, their vertices are
    charged history, and they rejoin the pending pool so negotiation can
    move the blockage instead of stalling.  Deterministic for fixed inputs.
    """
    params = params or SearchParams()
    tasks: dict[str, NetTask] = {}
    status: dict[str, str] = {}
    for net in netlist.nets:
        try:
            terminals = project_pins(net, netlist, placements, graph, grid,
                                     tech, params.enumeration_cap)
        except UnroutableNetError:
            status[net.id] = "unroutable"
            continue
        for _, vertex, _ in terminals:
            graph.register_pad(vertex, net.id)
        tasks[net.id] = NetTask(net_id=net.id, terminals=terminals,
                                hpwl=_hpwl_of([v for _, v, _ in terminals]),
                                pin_count=len(net.pins))
        status[net.id] = "pending"

    routes: dict[str, Route] = {}
    iterations = 0
    # the per-edge DRC indicator only depends on committed geometry, so the
    # cache survives until the next successful commit (keyed per net)
    caches: dict[str, dict] = {}
    for iteration in range(1, params.max_iterations + 1):
        pending = [t for t in tasks.values() if status[t.net_id] == "pending"]
        if not pending:
            break
        iterations = iteration
        for task in order_nets(pending):
            verts = [v for _, v, _ in task.terminals]
            pairs = decompose_net(verts)
            chains: list[Chain] = []
            used: set[Vertex] = set()
            failed = False
            violations: list = []
            cache = caches.setdefault(task.net_id, {})
            for a, b in pairs:
                try:
                    chain, _ = astar_two_pin(graph, tech, task.net_id,
                                             verts[a], verts[b], params,
                                             indicator_cache=cache)
                except SearchFailure:
                    failed = True
                    break
                chains.append(chain)
                used.update(chain.vertices)
            if not failed:
                route = Route(net_id=task.net_id, chains=chains)
                violations = check_route(
                    [(c.segments, c.vias) for c in chains], graph, tech,
                    task.net_id)
                if violations:
                    failed = True
                    used = set(route.vertices)
            if failed:
                task.failure_count += 1
                # terminals are fixed endpoints every candidate route must
                # use, so charging them history would penalize nothing; the
                # same holds for their layer companions, which are forced
                # via landings whenever a route leaves a terminal sideways
                exempt = set(verts)
                exempt |= {(x, y, 1 - l) for x, y, l in exempt}
                used -= exempt
                if used:
                    graph.add_history(sorted(used), params.history_increment)
                if violations and task.failure_count >= params.rip_after:
                    culprits: set[str] = set()
                    for vio in violations:
                        if vio.counterpart is None:
                            continue
                        for g in graph.index.query(vio.counterpart):
                            if (g.kind in ("wire", "via") and g.net
                                    and g.net != task.net_id):
                                culprits.add(g.net)
                    # history stays on the failing route only; ripped nets
                    # just rejoin the pending pool and reroute around the
                    # blocked net, which now outranks them
                    ripped = sorted(culprits & routes.keys())
                    for net_id in ripped:
                        del routes[net_id]
                        graph.uncommit_net(net_id)
                        status[net_id] = "pending"
                    if ripped:
                        caches.clear()  # committed geometry changed
                continue
            for ci, chain in enumerate(chains):
                graph.commit_geometry(task.net_id, ci, chain.segments, chain.vias)
            caches.clear()  # committed geometry changed
            routes[task.net_id] = route
            status[task.net_id] = "routed"
        if all(s != "pending" for s in status.values()):
            break

    for net_id, s in status.items():
        if s == "pending":
            status[net_id] = "failed"
    failed_any = any(s in ("failed", "unroutable") for s in status.values())
    wl = sum(r.wirelength_steps() for r in routes.values()) * tech.grid_step
    vias = sum(r.via_count() for r in routes.values())
    return RoutedLayout(placements=dict(placements), routes=routes,
                        net_status=status, iterations=iterations,
                        wirelength_um=wl, via_count=vias, failed=failed_any)
