"""The 3-D routing grid graph: a vertex lattice over two metal layers with
hashmap adjacency, per-vertex history costs, obstacle carving and a spatial
index of committed geometry.

Layer 0 carries horizontal tracks and layer 1 vertical tracks by default
(the assignment follows the tech file's layer directions).  Vertices are
(x, y, layer) triples in routing-grid steps; one step is ``tech.grid_step``
microns.  Device bodies are carved out of the lattice; routing-resource
halos remain routable on purpose.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .floorplan import GridConfig, Placement
from .netlist import Netlist
from .geometry import Rect, SpatialIndex
from .tech import TechRules

Vertex = tuple[int, int, int]


class RoutingGridError(ValueError):
    pass


@dataclass(frozen=True)
class WireSeg:
    """A maximal straight wire run in step coordinates, axis-aligned."""

    layer: int
    x0: int
    y0: int
    x1: int
    y1: int
    width: float

    def __post_init__(self):
        if self.x0 != self.x1 and self.y0 != self.y1:
            raise RoutingGridError("wire segment must be axis-aligned")

    @property
    def axis(self) -> int:
        return 0 if self.y0 == self.y1 else 1

    @property
    def length_steps(self) -> int:
        return abs(self.x1 - self.x0) + abs(self.y1 - self.y0)

    def vertices(self) -> list[Vertex]:
        if self.axis == 0:
            lo, hi = sorted((self.x0, self.x1))
            return [(x, self.y0, self.layer) for x in range(lo, hi + 1)]
        lo, hi = sorted((self.y0, self.y1))
        return [(self.x0, y, self.layer) for y in range(lo, hi + 1)]


def seg_rect(seg: WireSeg, grid_step: float) -> Rect:
    """Physical rectangle of a wire run, with half-width end extensions."""
    half = seg.width / 2
    if seg.axis == 0:
        lo, hi = sorted((seg.x0, seg.x1))
        return Rect(lo * grid_step - half, seg.y0 * grid_step - half,
                    hi * grid_step + half, seg.y0 * grid_step + half)
    lo, hi = sorted((seg.y0, seg.y1))
    return Rect(seg.x0 * grid_step - half, lo * grid_step - half,
                seg.x0 * grid_step + half, hi * grid_step + half)


def via_rect(x: int, y: int, tech: TechRules) -> Rect:
    half = tech.max_wire_width / 2
    gs = tech.grid_step
    return Rect(x * gs - half, y * gs - half, x * gs + half, y * gs + half)


def pad_rect(vertex: Vertex, tech: TechRules) -> Rect:
    half = tech.wire_width(vertex[2]) / 2
    gs = tech.grid_step
    return Rect(vertex[0] * gs - half, vertex[1] * gs - half,
                vertex[0] * gs + half, vertex[1] * gs + half)


class RoutingGraph:
    """Lattice graph with history costs and the committed-geometry index."""

    def __init__(self, bounds: tuple[int, int, int, int], tech: TechRules,
                 obstacles: set[Vertex] | None = None):
        self.bounds = bounds  # (x0, y0, x1, y1) inclusive, in steps
        self.tech = tech
        self.obstacles: set[Vertex] = set(obstacles or ())
        self.history: dict[Vertex, float] = {}
        self.index = SpatialIndex(bucket_size=max(8.0, 8 * tech.grid_step))
        self.ignored_history_updates = 0
        self._route_gids: dict[tuple[str, int], list[int]] = {}
        self._layer_axis = tuple(0 if l.direction == "h" else 1
                                 for l in tech.layers)
        self.adjacency: dict[Vertex, tuple[Vertex, ...]] = {}
        self._build_adjacency()

    # -- construction -----------------------------------------------------

    def _in_bounds(self, v: Vertex) -> bool:
        x0, y0, x1, y1 = self.bounds
        return x0 <= v[0] <= x1 and y0 <= v[1] <= y1 and v[2] in (0, 1)

    def contains(self, v: Vertex) -> bool:
        return self._in_bounds(v) and v not in self.obstacles

    def _build_adjacency(self) -> None:
        x0, y0, x1, y1 = self.bounds
        adj = {}
        for layer in (0, 1):
            axis = self._layer_axis[layer]
            step = (1, 0) if axis == 0 else (0, 1)
            for x in range(x0, x1 + 1):
                for y in range(y0, y1 + 1):
                    v = (x, y, layer)
                    if v in self.obstacles:
                        continue
                    neigh = []
                    for sgn in (-1, 1):
                        n = (x + sgn * step[0], y + sgn * step[1], layer)
                        if self._in_bounds(n) and n not in self.obstacles:
                            neigh.append(n)
                    other = (x, y, 1 - layer)
                    if other not in self.obstacles:
                        neigh.append(other)
                    adj[v] = tuple(neigh)
        self.adjacency = adj

    def neighbors(self, v: Vertex) -> tuple[Vertex, ...]:
        return self.adjacency.get(v, ())

    @property
    def vertex_count(self) -> int:
        return len(self.adjacency)

    @property
    def edge_count(self) -> int:
        return sum(len(n) for n in self.adjacency.values()) // 2

    # -- history ------------------------------------------------------------

    def add_history(self, vertices, increment: float) -> None:
        """Accumulate history cost on the given vertices.

        Unknown or obstacle vertices are skipped and counted, since ripped
        wires may cross regions carved out later.
        """
        if increment <= 0:
            raise RoutingGridError("history increment must be positive")
        for v in vertices:
            if v in self.adjacency:
                self.history[v] = self.history.get(v, 0.0) + increment
            else:
                self.ignored_history_updates += 1

    def history_of(self, v: Vertex) -> float:
        return self.history.get(v, 0.0)

    # -- committed geometry ---------------------------------------------------

    def register_pad(self, vertex: Vertex, net: str) -> int:
        return self.index.insert(pad_rect(vertex, self.tech),
                                 layers=(vertex[2],), net=net, kind="pin")

    def commit_geometry(self, net: str, connection_id: int,
                        segments: list[WireSeg], vias: list[tuple[int, int]]) -> None:
        gids = []
        gs = self.tech.grid_step
        for seg in segments:
            gids.append(self.index.insert(seg_rect(seg, gs), layers=(seg.layer,),
                                          net=net, kind="wire"))
        for x, y in vias:
            gids.append(self.index.insert(via_rect(x, y, self.tech),
                                          layers=(0, 1), net=net, kind="via"))
        self._route_gids[(net, connection_id)] = gids

    def uncommit_geometry(self, net: str, connection_id: int) -> None:
        for gid in self._route_gids.pop((net, connection_id), []):
            self.index.remove(gid)

    def uncommit_net(self, net: str) -> None:
        for key in [k for k in self._route_gids if k[0] == net]:
            for gid in self._route_gids.pop(key):
                self.index.remove(gid)


def build_routing_graph(placements: dict[str, Placement], netlist: Netlist,
                        tech: TechRules, grid: GridConfig,
                        margin: int = 10) -> RoutingGraph:
    """Routing lattice spanning the padded placement extent plus a margin.

    Vertices on or inside device bodies are carved out; body rectangles are
    also registered in the spatial index for DRC obstacle queries.  DRR halos
    stay routable.
    """
    if not placements:
        raise RoutingGridError("cannot build a routing graph without placements")
    scale = grid.cell_pitch / tech.grid_step
    s = round(scale)
    if abs(scale - s) > 1e-9 or s < 1:
        raise RoutingGridError(
            "cell pitch must be an integer multiple of the routing grid step")

    px0 = min(p.padded_bounds[0] for p in placements.values())
    py0 = min(p.padded_bounds[1] for p in placements.values())
    px1 = max(p.padded_bounds[2] for p in placements.values())
    py1 = max(p.padded_bounds[3] for p in placements.values())
    bounds = (px0 * s - margin, py0 * s - margin,
              px1 * s + margin, py1 * s + margin)

    obstacles: set[Vertex] = set()
    for dev_id in sorted(placements):
        p = placements[dev_id]
        bx0, by0, bx1, by1 = p.bounds
        # half-open in steps: a w x h cell body at scale 1 removes w*h vertices
        for x in range(bx0 * s, bx1 * s):
            for y in range(by0 * s, by1 * s):
                obstacles.add((x, y, 0))
                obstacles.add((x, y, 1))

    graph = RoutingGraph(bounds, tech, obstacles)
    pitch = grid.cell_pitch
    for dev_id in sorted(placements):
        p = placements[dev_id]
        bx0, by0, bx1, by1 = p.bounds
        graph.index.insert(Rect(bx0 * pitch, by0 * pitch, bx1 * pitch, by1 * pitch),
                           layers=(0, 1), net=None, kind="body")
    return graph
