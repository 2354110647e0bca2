"""Command line front end: place, route, pnr, drc-report, render, bench.

All JSON outputs are serialized with sorted keys and two-space indentation
so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .corpus import generate_corpus
from .drc import check_route
from .floorplan import (FloorplanEnv, GridConfig, Placement,
                        estimate_hpwl_min, recompute_hpwl, compute_dead_space)
from .metrics import MetricsReport, aggregate_stats
from .netlist import load_netlist, netlist_from_dict, netlist_to_dict
from .placer import SaSchedule, anneal, greedy_rollout
from .render import render_svg
from .router import Chain, Route, SearchParams, route_all
from .routegrid import WireSeg, build_routing_graph
from .tech import desk_tech, load_tech

FORMAT_VERSION = 1


def _log(args, event: str, **fields) -> None:
    if args.json_logs:
        print(json.dumps({"event": event, **fields}, sort_keys=True))
    else:
        extra = " ".join(f"{k}={v}" for k, v in fields.items())
        print(f"[{event}] {extra}".rstrip())


def _write_json(path: str, data: dict) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _grid_from_args(args) -> GridConfig:
    return GridConfig(resolution=args.grid, cell_pitch=args.pitch,
                      target_aspect=args.aspect)


def _grid_to_dict(grid: GridConfig) -> dict:
    return {"resolution": grid.resolution, "cell_pitch": grid.cell_pitch,
            "target_aspect": grid.target_aspect}


def _grid_from_dict(d: dict) -> GridConfig:
    return GridConfig(resolution=d["resolution"], cell_pitch=d["cell_pitch"],
                      target_aspect=d["target_aspect"])


def _placements_to_dict(placements: dict[str, Placement]) -> dict:
    return {dev: {"variant": p.variant, "x": p.x, "y": p.y,
                  "pad_h": p.pad_h, "pad_v": p.pad_v,
                  "width": p.width, "height": p.height}
            for dev, p in sorted(placements.items())}


def _placements_from_dict(d: dict) -> dict[str, Placement]:
    return {dev: Placement(device=dev, variant=pd["variant"], x=pd["x"],
                           y=pd["y"], pad_h=pd["pad_h"], pad_v=pd["pad_v"],
                           width=pd["width"], height=pd["height"])
            for dev, pd in d.items()}


def _routes_to_dict(layout) -> dict:
    out = {}
    for net_id in sorted(layout.routes):
        route = layout.routes[net_id]
        out[net_id] = {
            "chains": [
                {"segments": [[s.layer, s.x0, s.y0, s.x1, s.y1, s.width]
                              for s in ch.segments],
                 "vias": [list(v) for v in ch.vias]}
                for ch in route.chains
            ],
        }
    return out


def _routes_from_dict(d: dict) -> dict[str, Route]:
    routes = {}
    for net_id, rd in d.items():
        chains = []
        for ch in rd["chains"]:
            segs = [WireSeg(layer=s[0], x0=s[1], y0=s[2], x1=s[3], y1=s[4],
                            width=s[5]) for s in ch["segments"]]
            vias = [tuple(v) for v in ch["vias"]]
            verts = [v for s in segs for v in s.vertices()]
            chains.append(Chain(segments=segs, vias=vias, vertices=verts,
                                cost=0.0))
        routes[net_id] = Route(net_id=net_id, chains=chains)
    return routes


def _load_layout(path: str):
    with open(path) as fh:
        data = json.load(fh)
    if data.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported layout format version")
    netlist = netlist_from_dict(data["netlist"])
    grid = _grid_from_dict(data["grid"])
    placements = _placements_from_dict(data["placements"])
    return data, netlist, grid, placements


def _resolve_tech(args):
    return load_tech(args.tech) if args.tech else desk_tech()


def _out_path(args, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


# --- commands ----------------------------------------------------------------

def _run_place(args) -> int:
    tech = _resolve_tech(args)
    netlist = load_netlist(args.netlist)
    grid = _grid_from_args(args)
    t0 = time.perf_counter()

    if args.driver == "replay":
        if not args.layout:
            raise ValueError("replay driver needs --layout")
        _, _, _, placements = _load_layout(args.layout)
        env = FloorplanEnv(netlist, tech, grid, use_drr=not args.no_drr,
                           order=args.order)
        state = env.load_placements(placements)
    else:
        hpwl_min = estimate_hpwl_min(netlist, tech, grid,
                                     budget=args.hpwl_budget, seed=args.seed,
                                     use_drr=not args.no_drr)
        env = FloorplanEnv(netlist, tech, grid, hpwl_ref=hpwl_min,
                           order=args.order, use_drr=not args.no_drr)
        if args.driver == "greedy":
            state = greedy_rollout(env)
        else:
            schedule = SaSchedule(budget=args.sa_budget, seed=args.seed)
            state = anneal(env, schedule, restarts=args.restarts)

    runtime = time.perf_counter() - t0
    if state.stalled or len(state.placements) < len(netlist.devices):
        _log(args, "place.stalled", placed=len(state.placements),
             devices=len(netlist.devices))
        return 2
    reward = env.terminal_reward(state)
    data = {
        "format_version": FORMAT_VERSION,
        "grid": _grid_to_dict(grid),
        "netlist": netlist_to_dict(netlist),
        "placements": _placements_to_dict(state.placements),
        "metrics": {
            "hpwl_um": state.hpwl,
            "dead_space_pct": 100.0 * state.dead_space,
            "terminal_reward": reward,
            "seed": args.seed,
        },
    }
    path = _out_path(args, "layout.json")
    _write_json(path, data)
    _log(args, "place.done", out=path, hpwl_um=round(state.hpwl, 3),
         dead_space_pct=round(100.0 * state.dead_space, 3),
         reward=round(reward, 3), runtime_s=round(runtime, 3))
    return 0


def _search_params(args) -> SearchParams:
    return SearchParams(kappa=args.kappa, q=args.q, via_cost=args.via_cost,
                        drc_cost=args.drc_cost, max_iterations=args.max_iter)


def _route_layout(args, netlist, grid, placements, tech):
    graph = build_routing_graph(placements, netlist, tech, grid)
    return route_all(placements, netlist, graph, tech, grid,
                     _search_params(args))


def _run_route(args) -> int:
    tech = _resolve_tech(args)
    data, netlist, grid, placements = _load_layout(args.layout)
    t0 = time.perf_counter()
    layout = _route_layout(args, netlist, grid, placements, tech)
    runtime = time.perf_counter() - t0

    data["routes"] = _routes_to_dict(layout)
    data["routing"] = {
        "net_status": dict(sorted(layout.net_status.items())),
        "iterations": layout.iterations,
        "wirelength_um": layout.wirelength_um,
        "via_count": layout.via_count,
        "failed": layout.failed,
    }
    path = _out_path(args, "routed.json")
    _write_json(path, data)
    _log(args, "route.done", out=path, failed=layout.failed,
         iterations=layout.iterations,
         wirelength_um=round(layout.wirelength_um, 3),
         vias=layout.via_count, runtime_s=round(runtime, 3))
    return 2 if layout.failed else 0


def _run_pnr(args) -> int:
    rc = _run_place(args)
    if rc != 0:
        return rc
    args.layout = _out_path(args, "layout.json")
    return _run_route(args)


def _run_drc_report(args) -> int:
    tech = _resolve_tech(args)
    data, netlist, grid, placements = _load_layout(args.layout)
    routes = _routes_from_dict(data.get("routes", {}))
    graph = build_routing_graph(placements, netlist, tech, grid)
    for net_id in sorted(routes):
        for ci, ch in enumerate(routes[net_id].chains):
            graph.commit_geometry(net_id, ci, ch.segments, ch.vias)
    report = {}
    total = 0
    for net_id in sorted(routes):
        graph.uncommit_net(net_id)
        violations = check_route(
            [(ch.segments, ch.vias) for ch in routes[net_id].chains],
            graph, tech, net_id)
        for ci, ch in enumerate(routes[net_id].chains):
            graph.commit_geometry(net_id, ci, ch.segments, ch.vias)
        report[net_id] = [
            {"rule": v.rule, "location": list(v.location)} for v in violations]
        total += len(violations)
    path = _out_path(args, "drc_report.json")
    _write_json(path, {"format_version": FORMAT_VERSION,
                       "violations": report, "total": total})
    _log(args, "drc.done", out=path, total=total)
    return 0 if total == 0 else 2


def _run_render(args) -> int:
    tech = _resolve_tech(args)
    data, _, grid, placements = _load_layout(args.layout)
    routes = _routes_from_dict(data.get("routes", {}))
    svg = render_svg(placements, routes, tech, grid.cell_pitch)
    path = _out_path(args, "layout.svg")
    with open(path, "w") as fh:
        fh.write(svg)
    _log(args, "render.done", out=path)
    return 0


def _run_bench(args) -> int:
    tech = _resolve_tech(args)
    circuits = generate_corpus(count=args.count, seed=args.seed, tech=tech)
    reports = []
    for circ in circuits:
        t0 = time.perf_counter()
        env = FloorplanEnv(circ.netlist, tech, circ.grid,
                           use_drr=not args.no_drr)
        state = greedy_rollout(env)
        if state.stalled or len(state.placements) < len(circ.netlist.devices):
            reports.append(MetricsReport(
                dead_space_pct=0.0, hpwl_um=0.0, wirelength_um=0.0, vias=0,
                routing_iterations=0, routing_failed=True, seed=args.seed,
                runtime_s=time.perf_counter() - t0))
            _log(args, "bench.circuit", name=circ.name, status="stalled")
            continue
        graph = build_routing_graph(state.placements, circ.netlist, tech,
                                    circ.grid)
        layout = route_all(state.placements, circ.netlist, graph, tech,
                           circ.grid, _search_params(args))
        runtime = time.perf_counter() - t0
        reports.append(MetricsReport(
            dead_space_pct=100.0 * state.dead_space, hpwl_um=state.hpwl,
            wirelength_um=layout.wirelength_um, vias=layout.via_count,
            routing_iterations=layout.iterations,
            routing_failed=layout.failed, seed=args.seed, runtime_s=runtime))
        _log(args, "bench.circuit", name=circ.name,
             status="failed" if layout.failed else "routed",
             runtime_s=round(runtime, 3))
    stats = aggregate_stats(reports)
    data = {"format_version": FORMAT_VERSION,
            "reports": [r.to_dict() for r in reports],
            "aggregate": stats}
    path = _out_path(args, "bench.json")
    _write_json(path, data)
    _log(args, "bench.done", out=path,
         failure_rate_pct=stats["failure_rate_pct"])
    return 0


# --- argument parsing ----------------------------------------------------------

def _add_route_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iter", type=int, default=35)
    p.add_argument("--kappa", type=float, default=3.0)
    p.add_argument("--q", type=float, default=0.0001)
    p.add_argument("--via-cost", type=float, default=None)
    p.add_argument("--drc-cost", type=float, default=None)


def _add_place_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("netlist", help="netlist JSON file")
    p.add_argument("--driver", choices=("greedy", "sa", "replay"),
                   default="greedy")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--sa-budget", type=int, default=20000)
    p.add_argument("--grid", type=int, default=256,
                   help="placement grid resolution (cells per side)")
    p.add_argument("--pitch", type=float, default=1.0,
                   help="placement cell pitch in microns")
    p.add_argument("--aspect", type=float, default=1.0,
                   help="target aspect ratio (height / width)")
    p.add_argument("--hpwl-budget", type=int, default=2000,
                   help="annealing budget for the HPWL reference bootstrap")
    p.add_argument("--order", choices=("area-desc", "input", "random"),
                   default="area-desc")
    p.add_argument("--no-drr", action="store_true",
                   help="disable routing-resource padding")
    p.add_argument("--layout", default=None,
                   help="existing layout JSON (replay driver)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apnr", description="desk-scale analog place and route")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tech", default=None,
                        help="technology JSON (default: bundled desk rules)")
    parser.add_argument("--out-dir", default=".")
    parser.add_argument("--json-logs", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("place", help="place a netlist onto the grid")
    _add_place_flags(p)
    p.set_defaults(fn=_run_place)

    p = sub.add_parser("route", help="route a placed layout")
    p.add_argument("layout", help="layout JSON from the place command")
    _add_route_flags(p)
    p.set_defaults(fn=_run_route)

    p = sub.add_parser("pnr", help="place then route")
    _add_place_flags(p)
    _add_route_flags(p)
    p.set_defaults(fn=_run_pnr)

    p = sub.add_parser("drc-report", help="check a routed layout")
    p.add_argument("layout", help="routed layout JSON")
    p.set_defaults(fn=_run_drc_report)

    p = sub.add_parser("render", help="render a layout to SVG")
    p.add_argument("layout", help="layout JSON (routed or placed)")
    p.set_defaults(fn=_run_render)

    p = sub.add_parser("bench", help="run the synthetic benchmark corpus")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--no-drr", action="store_true")
    _add_route_flags(p)
    p.set_defaults(fn=_run_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
