"""PathFinder negotiated-congestion routing.

Every iteration rips up and reroutes all nets in request order.  A net is
grown sink by sink (sinks in node-id order) with a label-setting search
from the whole current route tree.  Entering node v costs

    base(v) * (1 + pres_fac * overuse(v)) * hist(v) + timing_weight * delay(v) / d_ref

where overuse counts occupants beyond capacity including this net and
d_ref is the mean wire delay of the graph.  The search is confined to the
net's pin bounding box grown by ``bb_margin`` tiles (the whole graph is
retried if that fails).  After each iteration hist grows by
hist_fac * overuse on overused nodes and pres_fac is multiplied by
pres_mult.  Routing stops when nothing is overused or after max_iters.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from .rrgraph import CHANX, CHANY, RRGraph


class UnroutableError(RuntimeError):
    def __init__(self, message, overuse: dict):
        super().__init__(message)
        self.overuse = overuse


@dataclass
class RouterConfig:
    pres_fac: float = 0.5
    pres_mult: float = 1.8
    hist_fac: float = 1.0
    max_iters: int = 60
    timing_weight: float = 1.0
    bb_margin: int = 3


@dataclass(frozen=True)
class RouteRequest:
    name: str
    source: int
    sinks: tuple


@dataclass
class Routing:
    trees: dict  # net name -> {node: parent node or -1}
    occ: np.ndarray
    hist: np.ndarray
    iterations: int
    converged: bool
    requests: list = field(default_factory=list)

    def used_nodes(self) -> set:
        return {n for t in self.trees.values() for n in t}


def _bbox(rr: RRGraph, req: RouteRequest, margin: int):
    nodes = [req.source, *req.sinks]
    return (int(min(rr.xlo[n] for n in nodes)) - margin, int(max(rr.xhi[n] for n in nodes)) + margin,
            int(min(rr.ylo[n] for n in nodes)) - margin, int(max(rr.yhi[n] for n in nodes)) + margin)


def route_pathfinder(rr: RRGraph, requests, config: RouterConfig | None = None) -> Routing:
    cfg = config or RouterConfig()
    n = rr.n_nodes
    wires = (rr.kind == CHANX) | (rr.kind == CHANY)
    d_ref = float(rr.delay[wires].mean()) if wires.any() and rr.delay[wires].mean() > 0 else 1.0
    dterm = kernels.floats(cfg.timing_weight * rr.delay / d_ref)
    ptr, dst = kernels.ints(rr.ptr), kernels.ints(rr.dst)
    base, cap = kernels.floats(rr.base), kernels.ints(rr.cap)
    xlo, xhi, ylo, yhi = (kernels.ints(a) for a in (rr.xlo, rr.xhi, rr.ylo, rr.yhi))
    occ = np.zeros(n, dtype=np.int64)
    hist = np.ones(n, dtype=np.float64)
    pres = cfg.pres_fac
    big = 1 << 40
    requests = list(requests)
    bbs = [_bbox(rr, r, cfg.bb_margin) for r in requests]
    trees: dict = {}
    for it in range(1, cfg.max_iters + 1):
        for req, bb in zip(requests, bbs):
            old = trees.get(req.name)
            if old:
                for node in old:
                    occ[node] -= 1
            tree = {req.source: -1}
            order = [req.source]
            for sink in sorted(set(req.sinks)):
                if sink in tree:
                    continue
                path = kernels.route_search(ptr, dst, base, occ, cap, hist, pres, dterm,
                                            xlo, xhi, ylo, yhi, *bb, order, sink)
                if len(path) == 0:
                    path = kernels.route_search(ptr, dst, base, occ, cap, hist, pres, dterm,
                                                xlo, xhi, ylo, yhi, -big, big, -big, big, order, sink)
                if len(path) == 0:
                    raise UnroutableError(f"net {req.name}: sink {sink} unreachable", {})
                path = path.tolist()
                for a, b in zip(path, path[1:]):
                    tree[b] = a
                    order.append(b)
            trees[req.name] = tree
            for node in tree:
                occ[node] += 1
        over = occ - rr.cap
        if not np.any(over > 0):
            return Routing(trees, occ, hist, it, True, requests)
        hist = hist + cfg.hist_fac * np.where(over > 0, over, 0)
        pres *= cfg.pres_mult
    overuse = {int(i): int(over[i]) for i in np.flatnonzero(over > 0)}
    raise UnroutableError(f"still {len(overuse)} overused nodes after {cfg.max_iters} iterations", overuse)


def check_routing(rr: RRGraph, requests, routing: Routing) -> list:
    """Independent legality check from the route trees alone."""
    problems = []
    usage = np.zeros(rr.n_nodes, dtype=np.int64)
    for req in requests:
        tree = routing.trees.get(req.name)
        if tree is None:
            problems.append(f"net {req.name}: not routed")
            continue
        for node, parent in tree.items():
            usage[node] += 1
            if parent == -1:
                if node != req.source:
                    problems.append(f"net {req.name}: root {node} is not the source")
            elif parent not in tree:
                problems.append(f"net {req.name}: node {node} hangs off a foreign node")
            elif not rr.has_edge(parent, node):
                problems.append(f"net {req.name}: no edge {parent}->{node}")
        for s in req.sinks:
            node, steps = s, 0
            while node in tree and tree[node] != -1 and steps <= len(tree):
                node, steps = tree[node], steps + 1
            if node != req.source:
                problems.append(f"net {req.name}: sink {s} not connected to the source")
    for i in np.flatnonzero(usage > rr.cap):
        problems.append(f"node {int(i)}: usage {int(usage[i])} > capacity {int(rr.cap[i])}")
    return problems
