"""Routing-resource graph for an island grid with mixed segment lengths.

Coordinates: CLBs sit at (1..nx, 1..ny) and IO pads on the ring around
them.  CHANX (x, y) is the horizontal channel above tile row y (y = 0..ny),
CHANY (x, y) the vertical channel right of tile column x (x = 0..nx).  Switch
block (x, y) joins the channel pieces meeting at that corner.

Track t is long (length L) or short (length 1) by an interleaved split of
the channel.  A long track with stagger s (its index among long tracks,
mod L) starts segments at tile 1 and at every tile p >= 2 with
(p - 1 + s) % L == 0.  Per channel row or column of n tiles the track
therefore has 1 + floor((n - 1 + s) / L) nodes; this closed form is what
``chan_node_count`` returns and what the tests recount independently.

Switch blocks are disjoint: a wire ending at a switch block connects to the
same track index on up to fs other sides (straight first, then the two
turns).  Connections are bidirectional.  Every pin connects to ceil(w * fc)
tracks of its channel, spread evenly with a pin-dependent offset.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..costs import LN2
from .place import CLB, IO, Grid

SOURCE, SINK, OPIN, IPIN, CHANX, CHANY = range(6)
KIND_NAMES = ("SOURCE", "SINK", "OPIN", "IPIN", "CHANX", "CHANY")
SW_NONE, SW_SB, SW_IPIN = 0, 1, 2


class RRGraphError(ValueError):
    pass


@dataclass
class RRGraph:
    kind: np.ndarray
    xlo: np.ndarray
    xhi: np.ndarray
    ylo: np.ndarray
    yhi: np.ndarray
    track: np.ndarray
    seg_len: np.ndarray  # nominal segment length (0 for non-wire nodes)
    cap: np.ndarray
    r: np.ndarray  # wire resistance of the node
    c: np.ndarray  # wire capacitance of the node
    base: np.ndarray  # congestion base cost
    delay: np.ndarray  # intrinsic delay estimate used by the router
    ptr: np.ndarray
    dst: np.ndarray
    switch: np.ndarray  # per edge: SW_NONE, SW_SB or SW_IPIN
    blocks: dict = field(default_factory=dict)  # (x, y, sub) -> {source, sink, opins, ipins}
    sw: dict = field(default_factory=dict)  # switch electrical data
    w: int = 0

    @property
    def n_nodes(self) -> int:
        return len(self.kind)

    @property
    def n_edges(self) -> int:
        return len(self.dst)

    def out_edges(self, u: int):
        return self.dst[self.ptr[u]:self.ptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(np.any(self.out_edges(u) == v))

    def edge_switch(self, u: int, v: int) -> int:
        lo, hi = self.ptr[u], self.ptr[u + 1]
        idx = np.flatnonzero(self.dst[lo:hi] == v)
        return int(self.switch[lo + idx[0]])


def is_long(t: int, frac: float) -> bool:
    return math.floor((t + 1) * frac) > math.floor(t * frac)


def track_types(w: int, l: int, long_fraction: float):
    """(length, stagger) per track."""
    out = []
    n_long = 0
    for t in range(w):
        if l > 1 and is_long(t, long_fraction):
            out.append((l, n_long % l))
            n_long += 1
        else:
            out.append((1, 0))
    return out


def segment_starts(n: int, length: int, stagger: int) -> list:
    return [1] + [p for p in range(2, n + 1) if (p - 1 + stagger) % length == 0]


def chan_node_count(w: int, l: int, nx: int, ny: int, long_fraction: float = 0.5) -> int:
    """Closed-form CHANX + CHANY node count."""
    total = 0
    for length, s in track_types(w, l, long_fraction):
        total += (ny + 1) * (1 + (nx - 1 + s) // length)
        total += (nx + 1) * (1 + (ny - 1 + s) // length)
    return total


def pin_tracks(w: int, fc: float, offset: int) -> list:
    n = min(w, max(1, math.ceil(w * fc - 1e-9)))
    return sorted({(offset + (j * w) // n) % w for j in range(n)})


def _clb_side(pin: int) -> int:
    return pin % 4  # 0 top, 1 right, 2 bottom, 3 left


def _io_side(x: int, y: int, grid: Grid) -> int:
    if x == 0:
        return 1
    if x == grid.nx + 1:
        return 3
    if y == 0:
        return 0
    return 2


def build_rr_graph(arch, spec, grid: Grid, long_fraction: float | None = None) -> RRGraph:
    """Build the routing graph for ``grid`` using the channel and pin
    parameters of ``spec`` and the electrical data of ``arch``."""
    w, l, fs = spec.w, spec.l, spec.fs
    if w <= 0:
        raise RRGraphError("channel width w must be positive")
    if l < 1 or fs < 1:
        raise RRGraphError("segment length and fs must be >= 1")
    if long_fraction is None:
        long_fraction = arch.topology.get("long_fraction", 0.5) if arch is not None else 0.5
    nx, ny = grid.nx, grid.ny
    types = track_types(w, l, long_fraction)

    kind, xlo, xhi, ylo, yhi, track, seg, cap = [], [], [], [], [], [], [], []

    def node(k, x0, x1, y0, y1, t=-1, length=0, capacity=1):
        kind.append(k)
        xlo.append(x0)
        xhi.append(x1)
        ylo.append(y0)
        yhi.append(y1)
        track.append(t)
        seg.append(length)
        cap.append(capacity)
        return len(kind) - 1

    blocks = {}
    locs = []
    for kd, x, y, _ in grid.slots():
        if kd == CLB:
            locs.append((kd, x, y, 0))
    seen_io = set()
    for kd, x, y, _ in grid.slots():
        if kd == IO and (x, y) not in seen_io:
            seen_io.add((x, y))
            locs.append((kd, x, y, 0))
    for kd, x, y, _ in locs:
        if kd == CLB:
            n_out, n_in = spec.n, spec.i
        else:
            n_out = n_in = grid.io_capacity
        src = node(SOURCE, x, x, y, y, capacity=n_out)
        snk = node(SINK, x, x, y, y, capacity=n_in)
        opins = [node(OPIN, x, x, y, y) for _ in range(n_out)]
        ipins = [node(IPIN, x, x, y, y) for _ in range(n_in)]
        blocks[(x, y)] = {"type": kd, "source": src, "sink": snk, "opins": opins, "ipins": ipins}

    # wires; lookup[(CHANX, row y, track t)] -> per-tile node id (index = tile position)
    lookup = {}
    for y in range(ny + 1):
        for t, (length, s) in enumerate(types):
            per = [-1] * (nx + 2)
            starts = segment_starts(nx, length, s)
            for j, a in enumerate(starts):
                b = (starts[j + 1] - 1) if j + 1 < len(starts) else nx
                nid = node(CHANX, a, b, y, y, t, length)
                for p in range(a, b + 1):
                    per[p] = nid
            lookup[(CHANX, y, t)] = per
    for x in range(nx + 1):
        for t, (length, s) in enumerate(types):
            per = [-1] * (ny + 2)
            starts = segment_starts(ny, length, s)
            for j, a in enumerate(starts):
                b = (starts[j + 1] - 1) if j + 1 < len(starts) else ny
                nid = node(CHANY, x, x, a, b, t, length)
                for p in range(a, b + 1):
                    per[p] = nid
            lookup[(CHANY, x, t)] = per

    edges = {}

    def edge(u, v, sw):
        edges[(u, v)] = sw

    def side_nodes(x, y, side):
        """Channel next to tile (x, y) on ``side``: (lookup key prefix, tile pos)."""
        if side == 0:
            return (CHANX, y), x
        if side == 2:
            return (CHANX, y - 1), x
        if side == 1:
            return (CHANY, x), y
        return (CHANY, x - 1), y

    for (x, y), blk in blocks.items():
        for p, op in enumerate(blk["opins"]):
            edge(blk["source"], op, SW_NONE)
            side = _clb_side(p) if blk["type"] == CLB else _io_side(x, y, grid)
            (ck, ci), pos = side_nodes(x, y, side)
            for t in pin_tracks(w, spec.fc_out if blk["type"] == CLB else 1.0, (p * 5 + x + 3 * y) % w):
                edge(op, lookup[(ck, ci, t)][pos], SW_SB)
        for p, ip in enumerate(blk["ipins"]):
            edge(ip, blk["sink"], SW_NONE)
            side = _clb_side(p) if blk["type"] == CLB else _io_side(x, y, grid)
            (ck, ci), pos = side_nodes(x, y, side)
            fc = spec.fc_in if blk["type"] == CLB else 1.0
            for t in pin_tracks(w, fc, (p * 7 + 2 * x + y) % w):
                edge(lookup[(ck, ci, t)][pos], ip, SW_IPIN)

    # switch blocks
    for x in range(nx + 1):
        for y in range(ny + 1):
            for t in range(w):
                # side order: left, right, bottom, top; value (node, ends here)
                sides = [None] * 4
                if x >= 1:
                    n = lookup[(CHANX, y, t)][x]
                    sides[0] = (n, xhi[n] == x)
                if x + 1 <= nx:
                    n = lookup[(CHANX, y, t)][x + 1]
                    sides[1] = (n, xlo[n] == x + 1)
                if y >= 1:
                    n = lookup[(CHANY, x, t)][y]
                    sides[2] = (n, yhi[n] == y)
                if y + 1 <= ny:
                    n = lookup[(CHANY, x, t)][y + 1]
                    sides[3] = (n, ylo[n] == y + 1)
                # straight partner first, then the two turns
                order = {0: (1, 2, 3), 1: (0, 3, 2), 2: (3, 1, 0), 3: (2, 0, 1)}
                for a in range(4):
                    if sides[a] is None or not sides[a][1]:
                        continue
                    na = sides[a][0]
                    for b in order[a][:fs]:
                        if sides[b] is None or sides[b][0] == na:
                            continue
                        nb = sides[b][0]
                        edge(na, nb, SW_SB)
                        edge(nb, na, SW_SB)

    n_nodes = len(kind)
    order = sorted(edges)
    src_arr = np.asarray([u for u, _ in order], dtype=np.int64)
    ptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.add.at(ptr, src_arr + 1, 1)
    ptr = np.cumsum(ptr)
    dst = np.asarray([v for _, v in order], dtype=np.int64)
    swa = np.asarray([edges[e] for e in order], dtype=np.int64)

    kind_a = np.asarray(kind, dtype=np.int64)
    span = np.asarray([(b - a + 1) if k == CHANX else (d - c + 1) if k == CHANY else 0
                       for k, a, b, c, d in zip(kind, xlo, xhi, ylo, yhi)], dtype=np.float64)
    if arch is not None:
        seg_ = arch.segment
        sw = dict(arch.switch)
        ipin = dict(arch.ipin)
    else:
        seg_ = {"r_per_tile": 0.0, "c_per_tile": 0.0}
        sw = {"r_on": 0.0, "c_in": 0.0, "c_out": 0.0, "t_del": 1.0}
        ipin = {"t_del": 0.0, "c_in": 0.0}
    r = span * seg_["r_per_tile"]
    c = span * seg_["c_per_tile"]
    is_wire = (kind_a == CHANX) | (kind_a == CHANY)
    delay = np.where(is_wire, sw["t_del"] + LN2 * (sw["r_on"] * c + 0.5 * r * c), 0.0)
    delay = np.where(kind_a == IPIN, ipin["t_del"], delay)
    base = np.select([is_wire, kind_a == IPIN, kind_a == OPIN, kind_a == SOURCE],
                     [1.0, 0.95, 1.0, 1.0], 0.0)
    return RRGraph(kind_a, np.asarray(xlo, dtype=np.int64), np.asarray(xhi, dtype=np.int64),
                   np.asarray(ylo, dtype=np.int64), np.asarray(yhi, dtype=np.int64),
                   np.asarray(track, dtype=np.int64), np.asarray(seg, dtype=np.int64),
                   np.asarray(cap, dtype=np.int64), r, c, base.astype(np.float64), delay,
                   ptr, dst, swa, blocks, {"sb": sw, "ipin": ipin}, w)


def custom_graph(n_nodes: int, edges, cap=None, base=None, delay=None, kind=None, coords=None) -> RRGraph:
    """Small hand-built graph for tests and examples."""
    order = sorted(set(edges))
    ptr = np.zeros(n_nodes + 1, dtype=np.int64)
    for u, _ in order:
        ptr[u + 1] += 1
    ptr = np.cumsum(ptr)
    z = np.zeros(n_nodes, dtype=np.int64)
    xy = np.asarray(coords if coords is not None else [(0, 0)] * n_nodes, dtype=np.int64)
    return RRGraph(
        kind=np.asarray(kind if kind is not None else [CHANX] * n_nodes, dtype=np.int64),
        xlo=xy[:, 0].copy(), xhi=xy[:, 0].copy(), ylo=xy[:, 1].copy(), yhi=xy[:, 1].copy(),
        track=z.copy(), seg_len=np.ones(n_nodes, dtype=np.int64),
        cap=np.asarray(cap if cap is not None else [1] * n_nodes, dtype=np.int64),
        r=np.zeros(n_nodes), c=np.zeros(n_nodes),
        base=np.asarray(base if base is not None else [1.0] * n_nodes, dtype=np.float64),
        delay=np.asarray(delay if delay is not None else [0.0] * n_nodes, dtype=np.float64),
        ptr=ptr, dst=np.asarray([v for _, v in order], dtype=np.int64),
        switch=np.full(len(order), SW_SB, dtype=np.int64),
    )
