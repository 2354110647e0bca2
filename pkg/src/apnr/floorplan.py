"""The placement MDP: grid, legality masks, routing-resource padding,
HPWL/dead-space accounting, and partial/terminal rewards.

One :class:`FloorplanEnv` instance is single-writer; run independent
instances for parallel search.  States are copyable snapshots.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .netlist import Netlist, Device, netlist_to_dict
from .tech import TechRules


class FloorplanError(ValueError):
    pass


class IllegalActionError(FloorplanError):
    """Raised when a step action is not legal under the current mask."""


@dataclass(frozen=True)
class GridConfig:
    resolution: int = 256
    cell_pitch: float = 1.0   # microns per grid cell
    target_aspect: float = 1.0

    def __post_init__(self):
        if self.resolution < 8:
            raise FloorplanError("grid resolution must be >= 8")
        if self.cell_pitch <= 0:
            raise FloorplanError("cell pitch must be positive")


@dataclass(frozen=True)
class RewardWeights:
    alpha: float = 10.0
    beta: float = 100.0
    gamma: float = 5.0
    violation_penalty: float = -1000.0
    hpwl_min: float = 1.0

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) <= 0:
            raise FloorplanError("reward weights must be positive")


@dataclass(frozen=True)
class Placement:
    device: str
    variant: int
    x: int
    y: int
    pad_h: int
    pad_v: int
    width: int
    height: int

    @property
    def padded_bounds(self) -> tuple[int, int, int, int]:
        return (self.x - self.pad_h, self.y - self.pad_v,
                self.x + self.width + self.pad_h, self.y + self.height + self.pad_v)

    @property
    def bounds(self) -> tuple[int, int, int, int]:
        return (self.x, self.y, self.x + self.width, self.y + self.height)


@dataclass
class FloorplanState:
    occupancy: np.ndarray            # bool [R, R], indexed [x, y]
    placements: dict[str, Placement]
    t: int
    order: tuple[str, ...]
    hpwl: float
    dead_space: float
    done: bool
    stalled: bool = False

    def copy(self) -> "FloorplanState":
        return FloorplanState(
            occupancy=self.occupancy.copy(),
            placements=dict(self.placements),
            t=self.t, order=self.order, hpwl=self.hpwl,
            dead_space=self.dead_space, done=self.done, stalled=self.stalled)

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "order": list(self.order),
            "hpwl": self.hpwl,
            "dead_space": self.dead_space,
            "done": self.done,
            "stalled": self.stalled,
            "placements": {
                dev: {"variant": p.variant, "x": p.x, "y": p.y,
                      "pad_h": p.pad_h, "pad_v": p.pad_v,
                      "width": p.width, "height": p.height}
                for dev, p in sorted(self.placements.items())
            },
        }


def drr_padding(device: Device, tech: TechRules, grid: GridConfig,
                netlist: Netlist | None = None) -> tuple[int, int]:
    """Symmetric routing-resource padding (cells per side) for one device.

    Horizontal pins pad the left/right sides, vertical pins the top/bottom.
    The physical demand is one placement grid step plus, per pin, the worst
    parallel-run spacing and wire width over the device's nets; the result
    is converted to whole cells by ceiling division.
    """
    if netlist is not None:
        nets = netlist.nets_of_device(device.id)
    else:
        nets = []
    if nets:
        max_sp = max(tech.net_spacing(n.kind) for n in nets)
        max_w = max(tech.net_width(n.kind) for n in nets)
    else:
        max_sp = tech.net_spacing()
        max_w = tech.net_width()
    n_h = sum(1 for p in device.pins if p.direction == "horizontal")
    n_v = sum(1 for p in device.pins if p.direction == "vertical")
    zeta = grid.cell_pitch
    lam_h = zeta + n_h * (max_sp + max_w)
    lam_v = zeta + n_v * (max_sp + max_w)
    to_cells = lambda lam: int(math.ceil(lam / grid.cell_pitch - 1e-12))
    return to_cells(lam_h), to_cells(lam_v)


def recompute_hpwl(placements: dict[str, Placement], netlist: Netlist,
                   grid: GridConfig) -> float:
    """Half-perimeter wirelength in microns over currently placed pins.

    Nets with fewer than two placed pins contribute zero.
    """
    total = 0.0
    owners = {p.id: d for d in netlist.devices for p in d.pins}
    for net in netlist.nets:
        xs, ys = [], []
        for pid in net.pins:
            dev = owners[pid]
            pl = placements.get(dev.id)
            if pl is None:
                continue
            pin = next(p for p in dev.pins if p.id == pid)
            dx, dy = dev.pin_offset(pin, pl.variant)
            xs.append(pl.x + dx)
            ys.append(pl.y + dy)
        if len(xs) >= 2:
            total += (max(xs) - min(xs) + max(ys) - min(ys)) * grid.cell_pitch
    return total


def compute_dead_space(placements: dict[str, Placement]) -> float:
    """1 - sum(device areas) / bounding-box area, over unpadded rectangles."""
    if not placements:
        return 0.0
    x0 = min(p.x for p in placements.values())
    y0 = min(p.y for p in placements.values())
    x1 = max(p.x + p.width for p in placements.values())
    y1 = max(p.y + p.height for p in placements.values())
    area = sum(p.width * p.height for p in placements.values())
    bbox = (x1 - x0) * (y1 - y0)
    return 1.0 - area / bbox


def _doubled_center(p: Placement) -> tuple[int, int]:
    return 2 * p.x + p.width, 2 * p.y + p.height


def violated_constraints(placements: dict[str, Placement],
                         netlist: Netlist) -> list[int]:
    """Indices of topological constraints not met by the given placements."""
    bad = []
    for idx, con in enumerate(netlist.constraints):
        if any(m not in placements for m in con.members):
            bad.append(idx)
            continue
        centers = [_doubled_center(placements[m]) for m in con.members]
        if con.kind == "alignment":
            if con.axis == "vertical":
                ok = len({cx for cx, _ in centers}) == 1
            else:
                ok = len({cy for _, cy in centers}) == 1
        else:  # symmetry: mirrored about a shared axis, aligned on the other one
            if con.axis == "vertical":
                centers.sort()
                axis2 = centers[0][0] + centers[-1][0]
                ok = all(centers[i][0] + centers[-1 - i][0] == axis2 and
                         centers[i][1] == centers[-1 - i][1]
                         for i in range(len(centers) // 2 + 1))
            else:
                centers.sort(key=lambda c: (c[1], c[0]))
                axis2 = centers[0][1] + centers[-1][1]
                ok = all(centers[i][1] + centers[-1 - i][1] == axis2 and
                         centers[i][0] == centers[-1 - i][0]
                         for i in range(len(centers) // 2 + 1))
        if not ok:
            bad.append(idx)
    return bad


def eq1_terms(placements: dict[str, Placement], netlist: Netlist,
              grid: GridConfig) -> tuple[float, float, float]:
    """(bounding-box area / sum of device areas, HPWL microns, aspect ratio)."""
    x0 = min(p.x for p in placements.values())
    y0 = min(p.y for p in placements.values())
    x1 = max(p.x + p.width for p in placements.values())
    y1 = max(p.y + p.height for p in placements.values())
    f_area = (x1 - x0) * (y1 - y0)
    dev_area = sum(p.width * p.height for p in placements.values())
    hpwl = recompute_hpwl(placements, netlist, grid)
    aspect = (y1 - y0) / (x1 - x0)
    return f_area / dev_area, hpwl, aspect


def terminal_reward_value(placements: dict[str, Placement], netlist: Netlist,
                          grid: GridConfig, weights: RewardWeights,
                          stalled: bool = False) -> float:
    """Final-step reward: weighted area, normalized HPWL and aspect mismatch.

    Stalled episodes and violated topological constraints return the flat
    violation penalty.
    """
    if stalled or len(placements) < len(netlist.devices):
        return weights.violation_penalty
    if violated_constraints(placements, netlist):
        return weights.violation_penalty
    area_ratio, hpwl, aspect = eq1_terms(placements, netlist, grid)
    return -(weights.alpha * area_ratio
             + weights.beta * hpwl / weights.hpwl_min
             + weights.gamma * (grid.target_aspect - aspect) ** 2)


class FloorplanEnv:
    """Step/reset placement environment over a square occupancy grid."""

    def __init__(self, netlist: Netlist, tech: TechRules,
                 grid: GridConfig | None = None,
                 weights: RewardWeights | None = None,
                 hpwl_ref: float | None = None,
                 order: str = "area-desc",
                 use_drr: bool = True):
        self.netlist = netlist
        self.tech = tech
        self.grid = grid or GridConfig()
        self.use_drr = use_drr
        self.paddings = {
            d.id: (drr_padding(d, tech, self.grid, netlist) if use_drr else (0, 0))
            for d in netlist.devices
        }
        self.order = self._make_order(order)
        self.hpwl_ref = hpwl_ref if hpwl_ref is not None else 1.0
        base = weights or RewardWeights()
        self.weights = replace(base, hpwl_min=self.hpwl_ref)
        self.state = self.reset()

    def _make_order(self, order: str) -> tuple[str, ...]:
        devs = list(self.netlist.devices)
        if order == "area-desc":
            devs.sort(key=lambda d: (-d.area(0), d.id))
        elif order == "input":
            pass
        elif order == "random":
            import random
            random.Random(0).shuffle(devs)
        else:
            raise FloorplanError(f"unknown placement order {order!r}")
        return tuple(d.id for d in devs)

    # -- episode control ------------------------------------------------

    def reset(self) -> FloorplanState:
        res = self.grid.resolution
        self.state = FloorplanState(
            occupancy=np.zeros((res, res), dtype=bool),
            placements={}, t=0, order=self.order,
            hpwl=0.0, dead_space=0.0, done=not self.order)
        self._check_stall()
        return self.state

    def current_device(self) -> Device | None:
        if self.state.done or self.state.t >= len(self.order):
            return None
        return self.netlist.device(self.order[self.state.t])

    def legal_action_mask(self, device: Device | None = None) -> np.ndarray:
        """Boolean [3, R, R] tensor: (variant, x, y) is a legal origin."""
        if device is None:
            device = self.current_device()
        if device is None:
            return np.zeros((3, self.grid.resolution, self.grid.resolution),
                            dtype=bool)
        return self._mask_for(device, self.state.occupancy)

    def _mask_for(self, device: Device, occ: np.ndarray) -> np.ndarray:
        res = self.grid.resolution
        mask = np.zeros((3, res, res), dtype=bool)
        ph, pv = self.paddings[device.id]
        ii = np.zeros((res + 1, res + 1), dtype=np.int64)
        np.cumsum(np.cumsum(occ, axis=0), axis=1, out=ii[1:, 1:])
        for v, (w, h) in enumerate(device.variants):
            pw, pht = w + 2 * ph, h + 2 * pv
            if pw > res or pht > res:
                continue
            # window sums of the padded footprint at every padded origin
            sums = (ii[pw:, pht:] - ii[:-pw, pht:] - ii[pw:, :-pht]
                    + ii[:-pw, :-pht])
            free = sums == 0
            mask[v, ph:res - w - ph + 1, pv:res - h - pv + 1] = free
        return mask

    def _check_stall(self) -> None:
        if self.state.done:
            return
        dev = self.current_device()
        if dev is not None and not self.legal_action_mask(dev).any():
            self.state.stalled = True
            self.state.done = True

    def step(self, action: tuple[str, int, int, int]) -> tuple[FloorplanState, float, bool]:
        """Place the current device; returns (state, partial_reward, done).

        The partial reward is the negative normalized HPWL change plus the
        dead-space change.
        """
        if self.state.done:
            raise FloorplanError("step on a terminal state")
        dev_id, variant, x, y = action
        device = self.current_device()
        if dev_id != device.id:
            raise IllegalActionError(
                f"expected device {device.id} at step {self.state.t}, got {dev_id}")
        if not 0 <= variant < len(device.variants):
            raise IllegalActionError(f"device {dev_id}: no variant {variant}")
        w, h = device.variants[variant]
        ph, pv = self.paddings[dev_id]
        x0, y0 = x - ph, y - pv
        x1, y1 = x + w + ph, y + h + pv
        res = self.grid.resolution
        if x0 < 0 or y0 < 0 or x1 > res or y1 > res:
            raise IllegalActionError(
                f"device {dev_id} at ({x},{y}) variant {variant}: padded footprint "
                f"[{x0},{x1})x[{y0},{y1}) leaves the grid")
        window = self.state.occupancy[x0:x1, y0:y1]
        if window.any():
            ox, oy = np.argwhere(window)[0]
            raise IllegalActionError(
                f"device {dev_id} at ({x},{y}): cell ({x0 + ox},{y0 + oy}) occupied")

        self.state.occupancy[x0:x1, y0:y1] = True
        self.state.placements[dev_id] = Placement(
            device=dev_id, variant=variant, x=x, y=y, pad_h=ph, pad_v=pv,
            width=w, height=h)
        old_hpwl, old_ds = self.state.hpwl, self.state.dead_space
        self.state.hpwl = recompute_hpwl(self.state.placements, self.netlist, self.grid)
        self.state.dead_space = compute_dead_space(self.state.placements)
        reward = -((self.state.hpwl - old_hpwl) / self.hpwl_ref
                   + (self.state.dead_space - old_ds))
        self.state.t += 1
        if self.state.t == len(self.order):
            self.state.done = True
        else:
            self._check_stall()
        return self.state, reward, self.state.done

    def terminal_reward(self, state: FloorplanState | None = None) -> float:
        state = state or self.state
        if not state.done:
            raise FloorplanError("terminal_reward on a non-terminal state")
        return terminal_reward_value(state.placements, self.netlist, self.grid,
                                     self.weights, stalled=state.stalled)

    # -- whole-placement helpers (used by the annealing driver) ----------

    def evaluate_placements(self, placements: dict[str, Placement],
                            soft_constraints: bool = False) -> float:
        """Final reward for a complete placement map.

        With ``soft_constraints`` each violated constraint subtracts the
        penalty from the base value instead of flattening the landscape,
        which gives annealing a usable gradient.
        """
        if len(placements) < len(self.netlist.devices):
            return self.weights.violation_penalty
        bad = violated_constraints(placements, self.netlist)
        if bad and not soft_constraints:
            return self.weights.violation_penalty
        area_ratio, hpwl, aspect = eq1_terms(placements, self.netlist, self.grid)
        value = -(self.weights.alpha * area_ratio
                  + self.weights.beta * hpwl / self.weights.hpwl_min
                  + self.weights.gamma * (self.grid.target_aspect - aspect) ** 2)
        if bad:
            value += len(bad) * self.weights.violation_penalty
        return value

    def load_placements(self, placements: dict[str, Placement]) -> FloorplanState:
        """Install a complete placement map as a terminal state."""
        res = self.grid.resolution
        occ = np.zeros((res, res), dtype=bool)
        for dev_id in self.order:
            p = placements[dev_id]
            x0, y0, x1, y1 = p.padded_bounds
            if x0 < 0 or y0 < 0 or x1 > res or y1 > res or occ[x0:x1, y0:y1].any():
                raise FloorplanError(f"illegal placement for device {dev_id}")
            occ[x0:x1, y0:y1] = True
        self.state = FloorplanState(
            occupancy=occ, placements=dict(placements), t=len(self.order),
            order=self.order,
            hpwl=recompute_hpwl(placements, self.netlist, self.grid),
            dead_space=compute_dead_space(placements),
            done=True)
        return self.state

    # -- checkpointing ----------------------------------------------------

    def save_checkpoint(self, path: str) -> None:
        data = {"format_version": 1, "state": self.state.to_dict()}
        with open(path, "w") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def load_checkpoint(self, path: str) -> FloorplanState:
        with open(path) as fh:
            data = json.load(fh)
        sd = data["state"]
        res = self.grid.resolution
        occ = np.zeros((res, res), dtype=bool)
        placements = {}
        for dev, pd in sd["placements"].items():
            p = Placement(device=dev, variant=pd["variant"], x=pd["x"], y=pd["y"],
                          pad_h=pd["pad_h"], pad_v=pd["pad_v"],
                          width=pd["width"], height=pd["height"])
            placements[dev] = p
            x0, y0, x1, y1 = p.padded_bounds
            occ[x0:x1, y0:y1] = True
        self.state = FloorplanState(
            occupancy=occ, placements=placements, t=sd["t"],
            order=tuple(sd["order"]), hpwl=sd["hpwl"],
            dead_space=sd["dead_space"], done=sd["done"], stalled=sd["stalled"])
        return self.state


# --- HPWL_min bootstrap ------------------------------------------------------

_HPWL_MIN_CACHE: dict[str, float] = {}


def netlist_fingerprint(netlist: Netlist, grid: GridConfig,
                        budget: int, seed: int) -> str:
    payload = json.dumps(
        {"netlist": netlist_to_dict(netlist),
         "grid": [grid.resolution, grid.cell_pitch, grid.target_aspect],
         "budget": budget, "seed": seed},
        sort_keys=True)
    return hashlib.sha1(payload.encode()).hexdigest()


def estimate_hpwl_min(netlist: Netlist, tech: TechRules, grid: GridConfig,
                      budget: int = 20000, seed: int = 0,
                      use_drr: bool = True) -> float:
    """Best HPWL found by simulated annealing within the step budget.

    Cached per (netlist, grid, budget, seed) fingerprint.  Returns the 1.0
    sentinel when no net can ever span two points.
    """
    if budget < 1:
        raise FloorplanError("budget must be >= 1")
    if not any(len(n.pins) >= 2 for n in netlist.nets):
        return 1.0
    key = netlist_fingerprint(netlist, grid, budget, seed)
    if key in _HPWL_MIN_CACHE:
        return _HPWL_MIN_CACHE[key]

    from .placer import SaSchedule, anneal  # deferred: placer imports this module

    env = FloorplanEnv(netlist, tech, grid, hpwl_ref=1.0, use_drr=use_drr)
    schedule = SaSchedule(budget=budget, seed=seed)
    state = anneal(env, schedule, restarts=1, objective="hpwl")
    best = recompute_hpwl(state.placements, netlist, grid) if not state.stalled else 0.0
    value = best if best > 0 else 1.0
    _HPWL_MIN_CACHE[key] = value
    return value
