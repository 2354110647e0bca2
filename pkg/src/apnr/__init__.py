"""apnr: a desk-scale analog place-and-route engine.

Gridded placement with legality masks and routing-resource padding,
greedy/annealing search drivers, a two-layer routing lattice, design-rule
checks, and a negotiated rip-up-and-reroute bidirectional weighted A*
router, plus CLI/serialization/SVG tooling.
"""

from .tech import LayerRule, TechRules, desk_tech, load_tech, tech_from_dict
from .netlist import (Netlist, Device, Pin, Net, Constraint, NetlistError,
                      load_netlist, save_netlist, netlist_from_dict,
                      netlist_to_dict, build_circuit_graph,
                      extract_node_features, write_feature_tables)
from .floorplan import (FloorplanEnv, FloorplanState, FloorplanError,
                        GridConfig, IllegalActionError, Placement,
                        RewardWeights, compute_dead_space, drr_padding,
                        estimate_hpwl_min, recompute_hpwl,
                        terminal_reward_value, violated_constraints)
from .placer import (PolicyError, PolicyHook, SaSchedule, anneal,
                     greedy_rollout, run_policy)
from .geometry import Geom, Rect, SpatialIndex
from .routegrid import (RoutingGraph, RoutingGridError, WireSeg,
                        build_routing_graph, pad_rect, seg_rect,
                        via_rect)
from .drc import (Violation, check_route, check_segment, check_via,
                  end_cap_bands, violation_indicator)
from .router import (Chain, NetTask, Route, RoutedLayout, RoutingError,
                     SearchFailure, SearchParams, UnroutableNetError,
                     astar_two_pin, decompose_net, min_run_steps, order_nets,
                     project_pins, route_all)
from .metrics import MetricsReport, aggregate_stats, iqm, iqr
from .render import render_svg
from .corpus import CorpusCircuit, generate_circuit, generate_corpus

__version__ = "1.0.0"

__all__ = [
    "LayerRule", "TechRules", "desk_tech", "load_tech", "tech_from_dict",
    "Netlist", "Device", "Pin", "Net", "Constraint", "NetlistError",
    "load_netlist", "save_netlist", "netlist_from_dict", "netlist_to_dict",
    "build_circuit_graph", "extract_node_features", "write_feature_tables",
    "FloorplanEnv", "FloorplanState", "FloorplanError", "GridConfig",
    "IllegalActionError", "Placement", "RewardWeights", "compute_dead_space",
    "drr_padding", "estimate_hpwl_min", "recompute_hpwl",
    "terminal_reward_value", "violated_constraints",
    "PolicyError", "PolicyHook", "SaSchedule", "anneal", "greedy_rollout",
    "run_policy",
    "Geom", "Rect", "SpatialIndex",
    "RoutingGraph", "RoutingGridError", "WireSeg", "build_routing_graph",
    "pad_rect", "seg_rect", "via_rect",
    "Violation", "check_route", "check_segment", "check_via",
    "end_cap_bands", "violation_indicator",
    "Chain", "NetTask", "Route", "RoutedLayout", "RoutingError",
    "SearchFailure", "SearchParams", "UnroutableNetError", "astar_two_pin",
    "decompose_net", "order_nets", "project_pins", "route_all",
    "MetricsReport", "aggregate_stats", "iqm", "iqr",
    "render_svg",
    "CorpusCircuit", "generate_circuit", "generate_corpus",
    "__version__",
]
