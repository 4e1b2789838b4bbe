"""Miniature pack / place / route / timing back end."""
from .blif import BlifError, LogicNetlist, emit_blif, parse_blif
from .flow import DesignMetrics, RoutedDesign, design_metrics, run_flow, run_sta
from .pack import PackError, check_packing, pack_netlist
from .place import Grid, PlacementError, place_sa
from .route import RouterConfig, UnroutableError, check_routing, route_pathfinder
from .rrgraph import RRGraphError, build_rr_graph, chan_node_count
from .sta import CombinationalCycleError, TimingGraph, longest_path

__all__ = [
    "BlifError", "LogicNetlist", "emit_blif", "parse_blif", "DesignMetrics", "RoutedDesign",
    "design_metrics", "run_flow", "run_sta", "PackError", "check_packing", "pack_netlist", "Grid",
    "PlacementError", "place_sa", "RouterConfig", "UnroutableError", "check_routing",
    "route_pathfinder", "RRGraphError", "build_rr_graph", "chan_node_count",
    "CombinationalCycleError", "TimingGraph", "longest_path",
]
