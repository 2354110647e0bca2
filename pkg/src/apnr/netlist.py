"""Circuit data model: devices, pins, nets, constraints and the circuit graph.

The netlist JSON schema is::

    {
      "devices": [
        {"id", "name", "variants": [[w, h], ...], "class", "subblock",
         "pins": [{"id", "dx", "dy", "dir", "kind", "layers": [lo, hi]}]}
      ],
      "nets": [{"id", "kind", "pins": [...]}],
      "constraints": [{"kind", "axis", "members": [...]}]
    }

Device shape variants are given in the input; the engine never synthesizes
them.  Pin offsets for variants beyond the first are rescaled proportionally
and rounded half-up to the grid.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field

log = logging.getLogger(__name__)

FUNCTIONAL_CLASSES = 28
_RESERVED_CLASS = FUNCTIONAL_CLASSES - 1

PIN_DIRECTIONS = ("horizontal", "vertical")
NET_KINDS = ("signal", "ground", "power")
CONSTRAINT_KINDS = ("symmetry", "alignment")
AXES = ("vertical", "horizontal")


class NetlistError(ValueError):
    """Raised when a netlist file fails validation; names the offending entity."""


@dataclass(frozen=True)
class Pin:
    id: str
    owner: str
    dx: int
    dy: int
    direction: str  # "horizontal" | "vertical"
    kind: str       # "signal" | "ground" | "power"
    layers: tuple[int, int]

    def __post_init__(self):
        if self.direction not in PIN_DIRECTIONS:
            raise NetlistError(f"pin {self.id}: bad direction {self.direction!r}")
        if self.kind not in NET_KINDS:
            raise NetlistError(f"pin {self.id}: bad net kind {self.kind!r}")
        if self.layers[0] > self.layers[1]:
            raise NetlistError(f"pin {self.id}: bottom layer above top layer")


@dataclass(frozen=True)
class Device:
    id: str
    name: str
    variants: tuple[tuple[int, int], ...]
    pins: tuple[Pin, ...]
    functional_class: int
    subblock: str

    def __post_init__(self):
        if not 1 <= len(self.variants) <= 3:
            raise NetlistError(f"device {self.id}: needs 1-3 shape variants, "
                               f"got {len(self.variants)}")
        for w, h in self.variants:
            if w <= 0 or h <= 0 or w != int(w) or h != int(h):
                raise NetlistError(f"device {self.id}: zero or non-integer sized variant")
        w0, h0 = self.variants[0]
        for pin in self.pins:
            if pin.owner != self.id:
                raise NetlistError(f"pin {pin.id}: owner mismatch on device {self.id}")
            if not (0 <= pin.dx < w0 and 0 <= pin.dy < h0):
                raise NetlistError(f"pin {pin.id}: offset outside device {self.id} "
                                   f"variant-0 box")

    def area(self, variant: int = 0) -> int:
        w, h = self.variants[variant]
        return w * h

    def pin_offset(self, pin: Pin, variant: int) -> tuple[int, int]:
        """Pin offset under a shape variant, rescaled proportionally.

        Rounded half-up; clamped so the offset stays inside the variant box.
        """
        if variant == 0:
            return pin.dx, pin.dy
        w0, h0 = self.variants[0]
        wv, hv = self.variants[variant]
        dx = min(wv - 1, math.floor(pin.dx * wv / w0 + 0.5))
        dy = min(hv - 1, math.floor(pin.dy * hv / h0 + 0.5))
        return dx, dy


@dataclass(frozen=True)
class Net:
    id: str
    kind: str
    pins: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in NET_KINDS:
            raise NetlistError(f"net {self.id}: bad kind {self.kind!r}")
        if len(self.pins) < 1:
            raise NetlistError(f"net {self.id}: needs at least one pin")
        if len(set(self.pins)) != len(self.pins):
            raise NetlistError(f"net {self.id}: duplicate pin ids")


@dataclass(frozen=True)
class Constraint:
    kind: str
    axis: str
    members: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in CONSTRAINT_KINDS:
            raise NetlistError(f"constraint: bad kind {self.kind!r}")
        if self.axis not in AXES:
            raise NetlistError(f"constraint: bad axis {self.axis!r}")
        if len(self.members) < 2 or len(set(self.members)) != len(self.members):
            raise NetlistError("constraint: members must be >=2 and distinct")


@dataclass(frozen=True)
class Netlist:
    devices: tuple[Device, ...]
    nets: tuple[Net, ...]
    constraints: tuple[Constraint, ...] = ()

    def __post_init__(self):
        seen_dev = set()
        pin_owner: dict[str, str] = {}
        for dev in self.devices:
            if dev.id in seen_dev:
                raise NetlistError(f"duplicate device id {dev.id}")
            seen_dev.add(dev.id)
            for pin in dev.pins:
                if pin.id in pin_owner:
                    raise NetlistError(f"duplicate pin id {pin.id}")
                pin_owner[pin.id] = dev.id
        for net in self.nets:
            for pid in net.pins:
                if pid not in pin_owner:
                    raise NetlistError(f"net {net.id}: unknown pin {pid!r}")
        net_ids = [n.id for n in self.nets]
        if len(set(net_ids)) != len(net_ids):
            raise NetlistError("duplicate net ids")
        for con in self.constraints:
            for member in con.members:
                if member not in seen_dev:
                    raise NetlistError(f"constraint references unknown device {member!r}")

    def device(self, dev_id: str) -> Device:
        for dev in self.devices:
            if dev.id == dev_id:
                return dev
        raise KeyError(dev_id)

    def pin(self, pin_id: str) -> Pin:
        return self.pins_by_id[pin_id]

    @property
    def pins_by_id(self) -> dict[str, Pin]:
        return {p.id: p for d in self.devices for p in d.pins}

    def pin_owner(self, pin_id: str) -> Device:
        for dev in self.devices:
            for pin in dev.pins:
                if pin.id == pin_id:
                    return dev
        raise KeyError(pin_id)

    def nets_of_device(self, dev_id: str) -> list[Net]:
        dev = self.device(dev_id)
        pin_ids = {p.id for p in dev.pins}
        return [n for n in self.nets if pin_ids & set(n.pins)]


def netlist_from_dict(data: dict) -> Netlist:
    devices = []
    for d in data.get("devices", []):
        cls = int(d.get("class", 0))
        if not 0 <= cls < FUNCTIONAL_CLASSES:
            log.warning("device %s: unknown functional class %d, mapping to %d",
                        d.get("id"), cls, _RESERVED_CLASS)
            cls = _RESERVED_CLASS
        pins = tuple(
            Pin(id=p["id"], owner=d["id"], dx=int(p["dx"]), dy=int(p["dy"]),
                direction=p["dir"], kind=p.get("kind", "signal"),
                layers=(int(p["layers"][0]), int(p["layers"][1])))
            for p in d.get("pins", [])
        )
        variants = tuple((int(w), int(h)) for w, h in d["variants"])
        devices.append(Device(id=d["id"], name=d.get("name", d["id"]),
                              variants=variants, pins=pins,
                              functional_class=cls,
                              subblock=d.get("subblock", "")))
    nets = tuple(Net(id=n["id"], kind=n.get("kind", "signal"),
                     pins=tuple(n["pins"])) for n in data.get("nets", []))
    constraints = tuple(Constraint(kind=c["kind"], axis=c["axis"],
                                   members=tuple(c["members"]))
                        for c in data.get("constraints", []))
    return Netlist(devices=tuple(devices), nets=nets, constraints=constraints)


def netlist_to_dict(netlist: Netlist) -> dict:
    return {
        "devices": [
            {
                "id": d.id,
                "name": d.name,
                "variants": [[w, h] for w, h in d.variants],
                "class": d.functional_class,
                "subblock": d.subblock,
                "pins": [
                    {"id": p.id, "dx": p.dx, "dy": p.dy, "dir": p.direction,
                     "kind": p.kind, "layers": [p.layers[0], p.layers[1]]}
                    for p in d.pins
                ],
            }
            for d in netlist.devices
        ],
        "nets": [{"id": n.id, "kind": n.kind, "pins": list(n.pins)}
                 for n in netlist.nets],
        "constraints": [{"kind": c.kind, "axis": c.axis, "members": list(c.members)}
                        for c in netlist.constraints],
    }


def load_netlist(path: str) -> Netlist:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise NetlistError(f"malformed netlist JSON {path}: {exc}") from exc
    return netlist_from_dict(data)


def save_netlist(netlist: Netlist, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(netlist_to_dict(netlist), fh, indent=2, sort_keys=True)
        fh.write("\n")


# --- circuit graph -----------------------------------------------------------

NODE_TYPES = ("device", "pin", "net", "subblock")
EDGE_TYPES = ("device_has_pin", "pin_belongs_to_net", "constraint")


@dataclass(frozen=True)
class CircuitGraph:
    """Near-tripartite circuit graph.

    ``nodes`` maps node id to node type; ``edges`` are (type, u, v) triples.
    device_has_pin edges go device -> pin, pin_belongs_to_net go pin -> net,
    constraint edges go device -> device.
    """

    nodes: dict[str, str]
    edges: tuple[tuple[str, str, str], ...]
    netlist: Netlist = field(compare=False)

    def edges_of_type(self, kind: str) -> list[tuple[str, str, str]]:
        return [e for e in self.edges if e[0] == kind]


def build_circuit_graph(netlist: Netlist) -> CircuitGraph:
    nodes: dict[str, str] = {}
    edges: list[tuple[str, str, str]] = []
    subblocks = sorted({d.subblock for d in netlist.devices if d.subblock})
    for sb in subblocks:
        nodes[f"subblock:{sb}"] = "subblock"
    for dev in netlist.devices:
        nodes[dev.id] = "device"
        for pin in dev.pins:
            nodes[pin.id] = "pin"
            edges.append(("device_has_pin", dev.id, pin.id))
    for net in netlist.nets:
        nodes[net.id] = "net"
        for pid in net.pins:
            edges.append(("pin_belongs_to_net", pid, net.id))
    for con in netlist.constraints:
        members = list(con.members)
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                edges.append(("constraint", members[i], members[j]))
    return CircuitGraph(nodes=nodes, edges=tuple(edges), netlist=netlist)


def _one_hot(index: int, width: int) -> list[int]:
    row = [0] * width
    row[index] = 1
    return row


def extract_node_features(graph: CircuitGraph, num_layers: int = 2) -> dict[str, list]:
    """Per-node feature rows, keyed by node id.

    Device rows: [area, width, height, pin_count] + 28-wide class one-hot
    (variant-0 geometry).  Pin rows: [direction code, net-kind code] followed
    by one-hot bottom and top layer blocks.  Net rows: [device count, pin
    count].  Meant to be written out for external consumers.
    """
    netlist = graph.netlist
    table: dict[str, list] = {}
    for dev in netlist.devices:
        w, h = dev.variants[0]
        table[dev.id] = [w * h, w, h, len(dev.pins)] + _one_hot(
            dev.functional_class, FUNCTIONAL_CLASSES)
    for dev in netlist.devices:
        for pin in dev.pins:
            row = [PIN_DIRECTIONS.index(pin.direction), NET_KINDS.index(pin.kind)]
            row += _one_hot(pin.layers[0], num_layers)
            row += _one_hot(pin.layers[1], num_layers)
            table[pin.id] = row
    owners = {p.id: d.id for d in netlist.devices for p in d.pins}
    for net in netlist.nets:
        dev_count = len({owners[pid] for pid in net.pins})
        table[net.id] = [dev_count, len(net.pins)]
    return table


def write_feature_tables(graph: CircuitGraph, out_dir: str, num_layers: int = 2) -> list[str]:
    """Write one CSV per node type so row width is constant within each file."""
    import os

    table = extract_node_features(graph, num_layers=num_layers)
    netlist = graph.netlist
    paths = []

    dev_header = (["node_id", "area", "width", "height", "pin_count"]
                  + [f"class_{i}" for i in range(FUNCTIONAL_CLASSES)])
    pin_header = (["node_id", "direction", "net_kind"]
                  + [f"bottom_l{i}" for i in range(num_layers)]
                  + [f"top_l{i}" for i in range(num_layers)])
    net_header = ["node_id", "device_count", "pin_count"]

    groups = [
        ("device_features.csv", dev_header, [d.id for d in netlist.devices]),
        ("pin_features.csv", pin_header,
         [p.id for d in netlist.devices for p in d.pins]),
        ("net_features.csv", net_header, [n.id for n in netlist.nets]),
    ]
    for fname, header, ids in groups:
        path = os.path.join(out_dir, fname)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for node_id in ids:
                writer.writerow([node_id] + table[node_id])
        paths.append(path)
    return paths
