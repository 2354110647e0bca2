"""Search drivers over the floorplan environment.

Greedy rollout and simulated annealing, plus a pluggable policy hook that
keeps the seam where a trained agent could attach.  All drivers only emit
mask-true actions and are fully determined by their seeds.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .floorplan import (FloorplanEnv, FloorplanState, Placement,
                        compute_dead_space, FloorplanError)
from .netlist import Device


class PolicyError(ValueError):
    """Raised when an external policy hook returns a mask-false action."""


@dataclass(frozen=True)
class PolicyHook:
    """Callable contract: (state snapshot, legal mask, feature table) -> action."""

    fn: Callable
    name: str = "hook"


@dataclass(frozen=True)
class SaSchedule:
    t0: float = 1.0
    cooling: float = 0.97
    steps_per_temp: int = 200
    budget: int = 20000
    seed: int = 0
    # Stop a run after this many steps without improvement (0 disables).
    stall_limit: int = 4000

    def __post_init__(self):
        if self.t0 <= 0:
            raise ValueError("t0 must be positive")
        if not 0 < self.cooling < 1:
            raise ValueError("cooling factor must lie in (0, 1)")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")


# --- greedy rollout ----------------------------------------------------------

def _candidate_scores(env: FloorplanEnv, device: Device, mask: np.ndarray,
                      scorer: str) -> tuple[np.ndarray, np.ndarray]:
    """Scores for every mask-true action, vectorized per variant.

    Returns (candidates [N, 3] as (variant, x, y), scores [N]).  Scores are
    "higher is better": negated HPWL growth, optionally plus the negated
    dead-space growth (the partial reward).
    """
    placements = env.state.placements
    netlist = env.netlist
    pitch = env.grid.cell_pitch

    # Per net touching this device: bbox of already-placed pins and the
    # device's own pin offsets per variant.
    owners = {p.id: d for d in netlist.devices for p in d.pins}
    net_info = []
    for net in netlist.nets_of_device(device.id):
        own_pins = []
        xs, ys = [], []
        for pid in net.pins:
            dev = owners[pid]
            if dev.id == device.id:
                own_pins.append(next(p for p in dev.pins if p.id == pid))
                continue
            pl = placements.get(dev.id)
            if pl is None:
                continue
            pin = next(p for p in dev.pins if p.id == pid)
            dx, dy = dev.pin_offset(pin, pl.variant)
            xs.append(pl.x + dx)
            ys.append(pl.y + dy)
        net_info.append((own_pins, xs, ys))

    if placements:
        bx0 = min(p.x for p in placements.values())
        by0 = min(p.y for p in placements.values())
        bx1 = max(p.x + p.width for p in placements.values())
        by1 = max(p.y + p.height for p in placements.values())
        placed_area = sum(p.width * p.height for p in placements.values())
    old_ds = env.state.dead_space

    cand_list, score_list = [], []
    for v in range(len(device.variants)):
        xs_v, ys_v = np.nonzero(mask[v])
        if len(xs_v) == 0:
            continue
        w, h = device.variants[v]
        d_hpwl = np.zeros(len(xs_v))
        for own_pins, pxs, pys in net_info:
            if not own_pins:
                continue
            offs = [device.pin_offset(p, v) for p in own_pins]
            ox = np.array([o[0] for o in offs])[:, None]
            oy = np.array([o[1] for o in offs])[:, None]
            px = xs_v[None, :] + ox
            py = ys_v[None, :] + oy
            n_placed = len(pxs)
            if n_placed == 0:
                if len(own_pins) >= 2:
                    d_hpwl += (px.max(0) - px.min(0) + py.max(0) - py.min(0)) * pitch
                continue
            old = 0.0
            if n_placed >= 2:
                old = (max(pxs) - min(pxs) + max(pys) - min(pys)) * pitch
            nx0 = np.minimum(px.min(0), min(pxs))
            nx1 = np.maximum(px.max(0), max(pxs))
            ny0 = np.minimum(py.min(0), min(pys))
            ny1 = np.maximum(py.max(0), max(pys))
            d_hpwl += (nx1 - nx0 + ny1 - ny0) * pitch - old

        if scorer == "hpwl_delta":
            score = -d_hpwl
        elif scorer == "partial_reward":
            if placements:
                nx0 = np.minimum(xs_v, bx0)
                ny0 = np.minimum(ys_v, by0)
                nx1 = np.maximum(xs_v + w, bx1)
                ny1 = np.maximum(ys_v + h, by1)
                new_ds = 1.0 - (placed_area + w * h) / ((nx1 - nx0) * (ny1 - ny0))
            else:
                new_ds = np.zeros(len(xs_v))
            score = -(d_hpwl / env.hpwl_ref + (new_ds - old_ds))
        else:
            raise ValueError(f"unknown scorer {scorer!r}")

        cand = np.stack([np.full(len(xs_v), v), xs_v, ys_v], axis=1)
        cand_list.append(cand)
        score_list.append(score)

    return np.concatenate(cand_list), np.concatenate(score_list)


def greedy_rollout(env: FloorplanEnv, scorer: str = "partial_reward") -> FloorplanState:
    """Place every device at the best-scoring legal action.

    Ties break by (variant, y, x) lexicographic ascending; deterministic.
    """
    if env.state.t != 0:
        env.reset()
    while not env.state.done:
        device = env.current_device()
        mask = env.legal_action_mask(device)
        cand, scores = _candidate_scores(env, device, mask, scorer)
        # order candidates by (variant, y, x); argmax picks the first maximum
        order = np.lexsort((cand[:, 1], cand[:, 2], cand[:, 0]))
        cand, scores = cand[order], scores[order]
        v, x, y = cand[int(np.argmax(scores))]
        env.step((device.id, int(v), int(x), int(y)))
    return env.state


# --- simulated annealing -----------------------------------------------------

class _SaWorkspace:
    """Mutable placement map with occupancy for fast legality checks."""

    def __init__(self, env: FloorplanEnv, placements: dict[str, Placement]):
        self.env = env
        self.res = env.grid.resolution
        self.occ = np.zeros((self.res, self.res), dtype=bool)
        self.placements: dict[str, Placement] = {}
        for dev_id, p in placements.items():
            self._paint(p, True)
            self.placements[dev_id] = p

    def _paint(self, p: Placement, value: bool) -> None:
        x0, y0, x1, y1 = p.padded_bounds
        self.occ[x0:x1, y0:y1] = value

    def fits(self, p: Placement) -> bool:
        x0, y0, x1, y1 = p.padded_bounds
        if x0 < 0 or y0 < 0 or x1 > self.res or y1 > self.res:
            return False
        return not self.occ[x0:x1, y0:y1].any()

    def remove(self, dev_id: str) -> Placement:
        p = self.placements.pop(dev_id)
        self._paint(p, False)
        return p

    def add(self, p: Placement) -> None:
        self._paint(p, True)
        self.placements[p.device] = p


def _objective(env: FloorplanEnv, placements: dict[str, Placement],
               objective: str) -> float:
    if objective == "reward":
        return env.evaluate_placements(placements, soft_constraints=True)
    if objective == "hpwl":
        from .floorplan import recompute_hpwl
        return -recompute_hpwl(placements, env.netlist, env.grid)
    raise ValueError(f"unknown objective {objective!r}")


def _sa_run(env: FloorplanEnv, initial: dict[str, Placement],
            schedule: SaSchedule, seed: int, objective: str) -> tuple[float, dict]:
    rng = random.Random(seed)
    ws = _SaWorkspace(env, initial)
    devices = {d.id: d for d in env.netlist.devices}
    dev_ids = [d.id for d in env.netlist.devices]
    cur = _objective(env, ws.placements, objective)
    best = cur
    best_placements = dict(ws.placements)
    temp = schedule.t0
    since_best = 0

    for step in range(schedule.budget):
        if step and step % schedule.steps_per_temp == 0:
            temp *= schedule.cooling
        if schedule.stall_limit and since_best >= schedule.stall_limit:
            break
        since_best += 1

        move = rng.random()
        changed: list[tuple[Placement | None, Placement | None]] = []
        if move < 0.6 or len(dev_ids) < 2:
            # relocate one device to a random legal origin/variant
            dev_id = rng.choice(dev_ids)
            dev = devices[dev_id]
            old = ws.remove(dev_id)
            new = None
            for _ in range(10):
                v = rng.randrange(len(dev.variants))
                w, h = dev.variants[v]
                ph, pv = env.paddings[dev_id]
                hi_x, hi_y = ws.res - w - ph, ws.res - h - pv
                if hi_x < ph or hi_y < pv:
                    continue
                cand = Placement(device=dev_id, variant=v,
                                 x=rng.randint(ph, hi_x), y=rng.randint(pv, hi_y),
                                 pad_h=ph, pad_v=pv, width=w, height=h)
                if ws.fits(cand):
                    new = cand
                    break
            if new is None:
                ws.add(old)
                continue
            ws.add(new)
            changed.append((old, new))
        elif move < 0.8:
            # swap the origins of two devices
            a, b = rng.sample(dev_ids, 2)
            pa, pb = ws.remove(a), ws.remove(b)
            na = Placement(device=a, variant=pa.variant, x=pb.x, y=pb.y,
                           pad_h=pa.pad_h, pad_v=pa.pad_v,
                           width=pa.width, height=pa.height)
            nb = Placement(device=b, variant=pb.variant, x=pa.x, y=pa.y,
                           pad_h=pb.pad_h, pad_v=pb.pad_v,
                           width=pb.width, height=pb.height)
            if not ws.fits(na):
                ws.add(pa), ws.add(pb)
                continue
            ws.add(na)
            if not ws.fits(nb):
                ws.remove(a), ws.add(pa), ws.add(pb)
                continue
            ws.add(nb)
            changed += [(pa, na), (pb, nb)]
        else:
            # change shape variant in place
            dev_id = rng.choice(dev_ids)
            dev = devices[dev_id]
            if len(dev.variants) < 2:
                continue
            old = ws.remove(dev_id)
            v = rng.choice([i for i in range(len(dev.variants)) if i != old.variant])
            w, h = dev.variants[v]
            cand = Placement(device=dev_id, variant=v, x=old.x, y=old.y,
                             pad_h=old.pad_h, pad_v=old.pad_v, width=w, height=h)
            if not ws.fits(cand):
                ws.add(old)
                continue
            ws.add(cand)
            changed.append((old, cand))

        new_val = _objective(env, ws.placements, objective)
        delta = new_val - cur
        if delta >= 0 or rng.random() < math.exp(delta / temp):
            cur = new_val
            if cur > best:
                best = cur
                best_placements = dict(ws.placements)
                since_best = 0
        else:
            # remove every new placement before re-adding the old ones, or
            # the boolean occupancy paint of overlapping rects corrupts
            for _, new in changed:
                ws.remove(new.device)
            for old, _ in changed:
                ws.add(old)
    return best, best_placements


def anneal(env: FloorplanEnv, schedule: SaSchedule, restarts: int = 4,
           objective: str = "reward") -> FloorplanState:
    """Construct-then-perturb simulated annealing over complete placements.

    Starts from the deterministic greedy construction, perturbs with
    relocate/swap/variant moves, accepts worse states with probability
    exp(delta/T), and keeps the best state over all seeded restarts.
    """
    initial = greedy_rollout(env)
    if initial.stalled:
        return initial
    init_placements = dict(initial.placements)
    best_val = _objective(env, init_placements, objective)
    best = init_placements
    if schedule.budget > 1:
        for r in range(restarts):
            val, placements = _sa_run(env, init_placements, schedule,
                                      schedule.seed + r, objective)
            if val > best_val:
                best_val, best = val, placements
    return env.load_placements(best)


# --- external policy seam ----------------------------------------------------

def run_policy(env: FloorplanEnv, hook: PolicyHook) -> FloorplanState:
    """Step the environment with hook-chosen actions until terminal.

    A mask-false action aborts the episode with a diagnostic naming the step.
    """
    from .netlist import build_circuit_graph, extract_node_features

    if env.state.t != 0:
        env.reset()
    features = extract_node_features(build_circuit_graph(env.netlist))
    rewards = []
    while not env.state.done:
        device = env.current_device()
        mask = env.legal_action_mask(device)
        action = hook.fn(env.state.copy(), mask, features)
        dev_id, v, x, y = action
        if dev_id != device.id or not mask[v, x, y]:
            raise PolicyError(
                f"policy {hook.name!r} returned a mask-false action {action} "
                f"at step {env.state.t}")
        _, reward, _ = env.step(action)
        rewards.append(reward)
    env.last_partial_rewards = rewards
    return env.state
