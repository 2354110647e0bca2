"""Synthetic circuit generator for desk-scale benchmarking.

Circuits span 3-24 functional blocks and 5-40 devices.  They are built to
be routable by construction under the bundled desk rules: pins sit on
maximally separated boundary cells (so projected terminals keep parallel
spacing) and the routing-resource padding reserves wide channels between
neighbors.  The placement grid uses a 2 micron pitch over a 1 micron
routing step so every pin-derived coordinate lands on an even routing step,
which keeps minimum-wire-length satisfied on bend-minimal paths.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .floorplan import GridConfig, drr_padding
from .netlist import Netlist, netlist_from_dict
from .tech import TechRules, desk_tech

CORPUS_PITCH = 2.0


@dataclass(frozen=True)
class CorpusCircuit:
    name: str
    netlist: Netlist
    grid: GridConfig


def _make_device(rng: random.Random, index: int, subblock: int) -> dict:
    w = rng.randint(4, 6)
    h = rng.randint(4, 6)
    variants = [[w, h]]
    if rng.random() < 0.5:
        variants.append([w + 1, max(4, h - 1)])
    pins = []
    n_h = rng.randint(1, 2)
    n_v = rng.randint(0, 1)
    rows = [0, h - 1]
    cols = [0, w - 1]
    for k in range(n_h):
        pins.append({"id": f"d{index}_ph{k}", "dx": w // 2, "dy": rows[k],
                     "dir": "horizontal", "kind": "signal", "layers": [0, 1]})
    for k in range(n_v):
        pins.append({"id": f"d{index}_pv{k}", "dx": cols[k], "dy": h // 2,
                     "dir": "vertical", "kind": "signal", "layers": [0, 1]})
    return {"id": f"d{index}", "name": f"dev{index}", "variants": variants,
            "class": rng.randrange(28), "subblock": f"b{subblock}", "pins": pins}


def generate_circuit(index: int, count: int = 20, seed: int = 0,
                     tech: TechRules | None = None) -> CorpusCircuit:
    """Deterministic synthetic circuit ``index`` of a ``count``-sized corpus."""
    tech = tech or desk_tech()
    rng = random.Random(seed * 7919 + index)
    frac = index / max(1, count - 1)
    n_blocks = round(3 + 21 * frac)
    n_dev = max(5, min(40, round(n_blocks * (1.2 + 0.5 * rng.random()))))

    devices = [_make_device(rng, i, i % n_blocks) for i in range(n_dev)]

    # one free-pin pool per device, consumed as nets are formed
    free = {d["id"]: [p["id"] for p in d["pins"]] for d in devices}
    nets = []

    def take_pin(dev_id: str) -> str | None:
        pool = free[dev_id]
        return pool.pop(0) if pool else None

    # chain nets link consecutive devices while their pin pools last; a
    # device whose neighbor ran out of pins may stay unwired, which is fine
    for i in range(n_dev - 1):
        a = take_pin(f"d{i}")
        b = take_pin(f"d{i + 1}")
        if a and b:
            nets.append({"id": f"n{len(nets)}", "kind": "signal", "pins": [a, b]})
        else:
            if a:
                free[f"d{i}"].insert(0, a)
            if b:
                free[f"d{i + 1}"].insert(0, b)

    # a few wider nets over leftover pins
    leftovers = [pid for d in devices for pid in free[d["id"]]]
    rng.shuffle(leftovers)
    while len(leftovers) >= 3 and rng.random() < 0.6:
        k = rng.choice((2, 3))
        group, leftovers = leftovers[:k], leftovers[k:]
        nets.append({"id": f"n{len(nets)}", "kind": "signal", "pins": group})

    netlist = netlist_from_dict(
        {"devices": devices, "nets": nets, "constraints": []})

    # size the grid so padded footprints fill roughly 40% of the canvas
    probe = GridConfig(resolution=64, cell_pitch=CORPUS_PITCH)
    padded_area = 0
    for dev in netlist.devices:
        ph, pv = drr_padding(dev, tech, probe, netlist)
        w, h = dev.variants[0]
        padded_area += (w + 2 * ph) * (h + 2 * pv)
    res = max(48, int(math.ceil(math.sqrt(padded_area * 2.4))))
    res = (res + 7) // 8 * 8
    grid = GridConfig(resolution=res, cell_pitch=CORPUS_PITCH)
    return CorpusCircuit(name=f"circuit{index:02d}", netlist=netlist, grid=grid)


def generate_corpus(count: int = 20, seed: int = 0,
                    tech: TechRules | None = None) -> list[CorpusCircuit]:
    return [generate_circuit(i, count, seed, tech) for i in range(count)]
