"""Axis-aligned rectangles and a uniform-bucket spatial index.

Coordinates are in microns.  The index stores committed wire, via, pin-pad
and device-body rectangles; queries return every rectangle intersecting a
window, in insertion-id order for determinism.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Rect:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValueError(f"degenerate rect {self}")

    def intersects(self, other: "Rect", eps: float = 1e-9) -> bool:
        """True when the overlap has positive area (touching edges don't count)."""
        return (self.x0 < other.x1 - eps and other.x0 < self.x1 - eps and
                self.y0 < other.y1 - eps and other.y0 < self.y1 - eps)

    def overlap_x(self, other: "Rect") -> float:
        return min(self.x1, other.x1) - max(self.x0, other.x0)

    def overlap_y(self, other: "Rect") -> float:
        return min(self.y1, other.y1) - max(self.y0, other.y0)

    def gap_x(self, other: "Rect") -> float:
        """Horizontal separation; negative when the x-projections overlap."""
        return max(self.x0, other.x0) - min(self.x1, other.x1)

    def gap_y(self, other: "Rect") -> float:
        return max(self.y0, other.y0) - min(self.y1, other.y1)

    def inflate(self, dx: float, dy: float) -> "Rect":
        return Rect(self.x0 - dx, self.y0 - dy, self.x1 + dx, self.y1 + dy)

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def center(self) -> tuple[float, float]:
        return (self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2


@dataclass(frozen=True)
class Geom:
    """A committed rectangle: wire segment, via pad, pin pad, or device body."""

    gid: int
    rect: Rect
    layers: tuple[int, ...]   # metal layers the shape occupies; vias span both
    net: str | None
    kind: str                 # "wire" | "via" | "pin" | "body"

    def on_layer(self, layer: int) -> bool:
        return layer in self.layers


class SpatialIndex:
    """Uniform grid-bucket index over Geoms."""

    def __init__(self, bucket_size: float = 8.0):
        self.bucket_size = bucket_size
        self._buckets: dict[tuple[int, int], set[int]] = {}
        self._geoms: dict[int, Geom] = {}
        self._next_gid = 0

    def __len__(self) -> int:
        return len(self._geoms)

    def _bucket_range(self, rect: Rect):
        b = self.bucket_size
        return (int(rect.x0 // b), int(rect.x1 // b),
                int(rect.y0 // b), int(rect.y1 // b))

    def insert(self, rect: Rect, layers: tuple[int, ...], net: str | None,
               kind: str) -> int:
        gid = self._next_gid
        self._next_gid += 1
        geom = Geom(gid=gid, rect=rect, layers=layers, net=net, kind=kind)
        self._geoms[gid] = geom
        i0, i1, j0, j1 = self._bucket_range(rect)
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                self._buckets.setdefault((i, j), set()).add(gid)
        return gid

    def remove(self, gid: int) -> None:
        geom = self._geoms.pop(gid)
        i0, i1, j0, j1 = self._bucket_range(geom.rect)
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                bucket = self._buckets.get((i, j))
                if bucket:
                    bucket.discard(gid)
                    if not bucket:
                        del self._buckets[(i, j)]

    def query(self, window: Rect) -> list[Geom]:
        """All geoms whose rectangle intersects the window (positive area)."""
        i0, i1, j0, j1 = self._bucket_range(window)
        hits: set[int] = set()
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                hits |= self._buckets.get((i, j), set())
        out = [self._geoms[g] for g in sorted(hits)
               if self._geoms[g].rect.intersects(window)]
        return out

    def all_geoms(self) -> list[Geom]:
        return [self._geoms[g] for g in sorted(self._geoms)]

    def snapshot(self) -> frozenset:
        return frozenset((g.gid, g.rect, g.layers, g.net, g.kind)
                         for g in self._geoms.values())
