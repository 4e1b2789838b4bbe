"""Pack -> place -> route -> time flow and design metrics."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from ..costs import LN2, RcTree, t50
from ..sizing import ArchModel, tile_spec_of
from .blif import LogicNetlist
from .pack import Cluster, pack_netlist
from .place import CLB, IO, Grid, Placement, fit_grid, place_sa
from .route import RouteRequest, RouterConfig, Routing, route_pathfinder
from .rrgraph import CHANX, CHANY, IPIN, OPIN, RRGraph, build_rr_graph
from .sta import StaResult, TimingGraph, longest_path


@dataclass
class RoutedDesign:
    netlist: LogicNetlist
    arch: ArchModel
    clusters: list
    block_types: list  # CLB / IO per block
    block_names: list
    net_blocks: dict  # net -> (driver block, [sink blocks])
    placement: Placement | None
    rr: RRGraph | None
    routing: Routing | None
    requests: list = field(default_factory=list)


@dataclass
class DesignMetrics:
    cpd: float
    f_max: float
    a_tot: float
    at2: float
    occupancy: dict  # nominal segment length -> used wire nodes
    congestion: dict  # (x, y) -> accumulated history cost
    n_clusters: int = 0
    grid: tuple = (0, 0)
    route_iterations: int = 0

    def long_fraction(self) -> float:
        total = sum(self.occupancy.values())
        if not total:
            return 0.0
        longest = max(self.occupancy)
        return self.occupancy[longest] / total if longest > 1 else 0.0


def _blocks(nl: LogicNetlist, clusters: list):
    owner = {}
    for cl in clusters:
        for b in cl.bles:
            if b.lut:
                owner[("lut", b.lut)] = cl.index
            if b.latch:
                owner[("latch", b.latch)] = cl.index
    types = [CLB] * len(clusters)
    names = [f"clb{cl.index}" for cl in clusters]
    pi_block = {}
    for p in nl.inputs:
        pi_block[p] = len(types)
        types.append(IO)
        names.append(f"in:{p}")
    po_block = {}
    for o in nl.outputs:
        po_block[o] = len(types)
        types.append(IO)
        names.append(f"out:{o}")
    return owner, types, names, pi_block, po_block


def _driver_block(nl, net, owner, pi_block):
    kind = nl.driver(net)
    if kind == "input":
        return pi_block[net]
    return owner[(kind, net)]


def run_flow(nl: LogicNetlist, arch: ArchModel, seed: int = 0, router: RouterConfig | None = None,
             long_fraction: float | None = None) -> RoutedDesign:
    spec = tile_spec_of(arch)
    clusters = pack_netlist(nl, spec)
    owner, types, names, pi_block, po_block = _blocks(nl, clusters)
    net_blocks = {}
    for net, consumers in nl.fanout().items():
        drv = _driver_block(nl, net, owner, pi_block)
        sinks = []
        for kind, name in consumers:
            blk = po_block[name] if kind == "output" else owner[(kind, name)]
            if blk != drv and blk not in sinks:
                sinks.append(blk)
        net_blocks[net] = (drv, sinks)
    if not clusters and not nl.inputs and not nl.outputs:
        return RoutedDesign(nl, arch, clusters, types, names, net_blocks, None, None, None)
    n_io = len(nl.inputs) + len(nl.outputs)
    grid = fit_grid(len(clusters), n_io)
    pnets = [[d, *s] for d, s in net_blocks.values() if s]
    placement = place_sa(types, pnets, grid, seed=seed)
    rr = build_rr_graph(arch, spec, grid, long_fraction)
    requests = []
    for net, (drv, sinks) in net_blocks.items():
        if not sinks:
            continue
        src = rr.blocks[placement.locs[drv][:2]]["source"]
        snk = tuple(rr.blocks[placement.locs[b][:2]]["sink"] for b in sinks)
        requests.append(RouteRequest(net, src, snk))
    routing = route_pathfinder(rr, requests, router)
    return RoutedDesign(nl, arch, clusters, types, names, net_blocks, placement, rr, routing, requests)


def _stage_offsets(rr: RRGraph, tree: dict, arch: ArchModel, clb_driver: bool) -> dict:
    """Delay from the driving BLE output to every node of a route tree."""
    children: dict = {}
    for node, parent in tree.items():
        if parent != -1:
            children.setdefault(parent, []).append(node)
    sw, ipin = arch.switch, arch.ipin

    def load(n):
        c = 0.0
        for ch in children.get(n, ()):
            k = rr.kind[ch]
            if k == CHANX or k == CHANY:
                c += sw["c_in"]
            elif k == IPIN:
                c += ipin["c_in"]
        return c

    def stage(n):
        k = rr.kind[n]
        if k == OPIN:
            return (arch.opin["t_del"] if clb_driver else 0.0) + LN2 * arch.opin["r_drv"] * load(n)
        if k == CHANX or k == CHANY:
            t = RcTree("drv", sw["r_on"], sw["c_out"])
            end = t.add_wire("drv", "w", 1.0, float(rr.r[n]), float(rr.c[n]))
            t.add_cap(end, load(n))
            return sw["t_del"] + t50(t, end)
        if k == IPIN:
            return ipin["t_del"]
        return 0.0

    off = {}
    order = [n for n, p in tree.items() if p == -1]
    for n in order:
        off[n] = 0.0
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        for ch in children.get(u, ()):
            off[ch] = off[u] + stage(ch)
            order.append(ch)
    return off


def build_timing_graph(design: RoutedDesign) -> TimingGraph:
    nl, arch = design.netlist, design.arch
    blk = arch.blocks
    owner, _, _, pi_block, po_block = _blocks(nl, design.clusters)
    ble_of = {}
    for cl in design.clusters:
        for b in cl.bles:
            if b.lut and b.latch:
                ble_of[b.latch] = b.lut
    tg = TimingGraph()
    drv_node = {}
    for p in nl.inputs:
        tg.add_node(f"pi:{p}", 0.0)
        drv_node[p] = f"pi:{p}"
    for la in nl.latches.values():
        tg.add_node(f"q:{la.name}", blk["ff"]["delay"])
        tg.add_node(f"d:{la.name}", 0.0)
        drv_node[la.name] = f"q:{la.name}"
    for lut in nl.luts.values():
        tg.add_node(f"lut:{lut.name}", blk["lut"]["delay"])
        drv_node[lut.name] = f"lut:{lut.name}"
    for o in nl.outputs:
        tg.add_node(f"po:{o}", 0.0)

    offsets = {}
    routing = design.routing
    if routing is not None:
        for net, tree in routing.trees.items():
            offsets[net] = _stage_offsets(design.rr, tree, arch, nl.driver(net) != "input")

    def conn(net, kind, name):
        drv, _ = design.net_blocks[net]
        dst = po_block[name] if kind == "output" else owner[(kind, name)]
        if dst == drv:
            if kind == "latch" and ble_of.get(name) == net:
                return 0.0
            return blk["local"]["delay"]
        loc = design.placement.locs[dst][:2]
        sink = design.rr.blocks[loc]["sink"]
        d = offsets[net][sink]
        return d + (blk["clb_in"]["delay"] if kind != "output" else 0.0)

    for lut in nl.luts.values():
        for i in lut.inputs:
            tg.add_edge(drv_node[i], f"lut:{lut.name}", conn(i, "lut", lut.name))
    for la in nl.latches.values():
        tg.add_edge(drv_node[la.input], f"d:{la.name}", conn(la.input, "latch", la.name))
    for o in nl.outputs:
        tg.add_edge(drv_node[o], f"po:{o}", conn(o, "output", o))
    return tg


def run_sta(design: RoutedDesign) -> StaResult:
    return longest_path(build_timing_graph(design))


def design_metrics(design: RoutedDesign, sta: StaResult | None = None) -> DesignMetrics:
    if design.routing is None and not design.netlist.luts and not design.netlist.latches:
        return DesignMetrics(0.0, 0.0, 0.0, 0.0, {}, {})
    sta = sta or run_sta(design)
    a_tot = len(design.clusters) * design.arch.tile["footprint"]
    occupancy: dict = {}
    congestion: dict = {}
    rr = design.rr
    if design.routing is not None:
        for n in sorted(design.routing.used_nodes()):
            if rr.kind[n] == CHANX or rr.kind[n] == CHANY:
                L = int(rr.seg_len[n])
                occupancy[L] = occupancy.get(L, 0) + 1
        hist = design.routing.hist
        for n in range(rr.n_nodes):
            if (rr.kind[n] == CHANX or rr.kind[n] == CHANY) and hist[n] > 1.0:
                key = (int(rr.xlo[n]), int(rr.ylo[n]))
                congestion[key] = congestion.get(key, 0.0) + float(hist[n] - 1.0)
    grid = (design.placement.grid.nx, design.placement.grid.ny) if design.placement else (0, 0)
    return DesignMetrics(sta.cpd, sta.f_max, a_tot, a_tot * sta.cpd ** 2, occupancy, congestion,
                         len(design.clusters), grid,
                         design.routing.iterations if design.routing else 0)


METRIC_COLUMNS = ("benchmark", "variant", "cpd_s", "fmax_hz", "a_tot_um2", "at2", "seg_len", "seg_used")


def metrics_rows(benchmark: str, variant: str, m: DesignMetrics) -> list:
    segs = sorted(m.occupancy) or [0]
    return [(benchmark, variant, "%.9e" % m.cpd, "%.9e" % m.f_max, "%.9e" % m.a_tot, "%.9e" % m.at2,
             str(L), str(m.occupancy.get(L, 0))) for L in segs]


def metrics_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRIC_COLUMNS)
    w.writerows(rows)
    return buf.getvalue()


def congestion_csv(m: DesignMetrics) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("x", "y", "history_cost"))
    for (x, y), v in sorted(m.congestion.items()):
        w.writerow((x, y, "%.9e" % v))
    return buf.getvalue()
