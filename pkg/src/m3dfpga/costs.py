"""Area, Elmore timing and power models for generated tiles and mux DUTs."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from .devices import (
    AreaRules, DeviceParams, SizingError, TechnologyLibrary, drain_current,
    effective_resistance, leakage_power, load_tech, transistor_area,
)
from .sram import cell_from_tech, sram_static_power
from .tile import (
    DEFAULT_ROLES, DEFAULT_SIZING, TileNetlist, TileSpec, mux_config_bits, mux_stages,
    restorers_needed,
)

LN2 = math.log(2.0)
CONGESTION_W0 = 200  # channel width where the BEOL pass-gate tier starts to inflate
DUT_WINDOW = 4e-9
DUT_TOGGLE_FREQ = 250e6

# local CLB wire lengths as fractions of the tile side
LOCAL_WIRE_FRACTION = {"cb_to_xbar": 0.5, "xbar_to_lut": 0.25, "lut_to_ble": 0.1, "ble_to_sb": 0.5}


class RcTreeError(ValueError):
    pass


class RcTree:
    """RC tree rooted at a driver with source resistance ``r_source``.

    Nodes are added parent-first, so insertion order is a topological order.
    """

    def __init__(self, root="root", r_source: float = 0.0, c_root: float = 0.0):
        if r_source < 0 or c_root < 0:
            raise RcTreeError("negative source resistance or capacitance")
        self.root = root
        self.r_source = r_source
        self.cap = {root: c_root}
        self.parent = {root: None}
        self.r = {root: 0.0}

    @classmethod
    def from_edges(cls, root, edges, caps, r_source: float = 0.0) -> "RcTree":
        """Build from ``(parent, child, r)`` edges in any order; validates the shape."""
        children: dict = {}
        seen_child = set()
        for p, c, r in edges:
            if c in seen_child or c == root:
                raise RcTreeError(f"node {c!r} has more than one parent")
            seen_child.add(c)
            children.setdefault(p, []).append((c, r))
        tree = cls(root, r_source, caps.get(root, 0.0))
        stack = [root]
        while stack:
            p = stack.pop()
            for c, r in children.get(p, ()):
                tree.add(c, p, r, caps.get(c, 0.0))
                stack.append(c)
        missing = (seen_child | set(caps)) - set(tree.cap)
        if missing:
            raise RcTreeError(f"nodes not connected to the root: {sorted(map(str, missing))}")
        return tree

    def add(self, node, parent, r: float, c: float = 0.0):
        if parent not in self.cap:
            raise RcTreeError(f"unknown parent {parent!r}")
        if node in self.cap:
            raise RcTreeError(f"duplicate node {node!r}")
        if r < 0 or c < 0:
            raise RcTreeError("negative r or c")
        self.cap[node] = c
        self.parent[node] = parent
        self.r[node] = r
        return node

    def add_cap(self, node, c: float):
        if c < 0:
            raise RcTreeError("negative capacitance")
        self.cap[node] += c

    def add_wire(self, parent, prefix: str, length: float, r_per_um: float, c_per_um: float,
                 segments: int = 1):
        """Append a wire as ``segments`` pi sections; returns the far-end node."""
        node = parent
        seg = length / segments
        for j in range(segments):
            c = c_per_um * seg
            self.add_cap(node, c / 2)
            node = self.add(f"{prefix}{j}", node, r_per_um * seg, c / 2)
        return node

    def total_cap(self) -> float:
        return sum(self.cap.values())

    def __contains__(self, node):
        return node in self.cap


def elmore_delay(tree: RcTree, sink) -> float:
    """First moment: sum_k c_k * R(root->sink shared with root->k)."""
    if sink not in tree.cap:
        raise RcTreeError(f"sink {sink!r} is not connected to the tree")
    r_path = {}
    for node in tree.cap:
        p = tree.parent[node]
        r_path[node] = tree.r_source if p is None else r_path[p] + tree.r[node]
    on_path = set()
    node = sink
    while node is not None:
        on_path.add(node)
        node = tree.parent[node]
    shared = {}
    total = 0.0
    for node in tree.cap:
        p = tree.parent[node]
        shared[node] = r_path[node] if node in on_path else shared[p]
        total += tree.cap[node] * shared[node]
    return total


def t50(tree: RcTree, sink) -> float:
    return LN2 * elmore_delay(tree, sink)


# ---------------------------------------------------------------------------
# area


def subcircuit_area(sub, rules: AreaRules, sizing: dict | None = None, per_instance: bool = False) -> float:
    """Minimum-width-transistor-area sum over the devices of a subcircuit group."""
    sizing = sizing or {}
    a = 0.0
    for d in sub.devices:
        w = d.w(sizing)
        if w < d.dev.w_min * (1 - 1e-9):
            raise SizingError(f"{sub.name}: {d.role} width {w} below w_min {d.dev.w_min}")
        a += d.n * transistor_area(d.dev, w, rules)
    return a if per_instance else a * sub.count


def congestion_factor(w: int, w0: int = CONGESTION_W0) -> float:
    return max(1.0, w / w0)


@dataclass
class TileCostReport:
    variant: str
    area_per_tier: dict
    footprint: float
    block_area_shares: dict
    cpd: float = 0.0
    static_power: float = 0.0
    config_static_share: float = 0.0
    stage_delays: dict = field(default_factory=dict)
    static_by_owner: dict = field(default_factory=dict)
    raw_tier_area: dict = field(default_factory=dict)


def tile_footprint(tile: TileNetlist, tech: TechnologyLibrary | None = None) -> TileCostReport:
    """Per-tier areas, footprint and FEOL block shares (no timing or power)."""
    tech = tech or load_tech()
    rules = tech.area_rules
    raw: dict = {}
    owners: dict = {}
    for s in tile.subcircuits:
        a = subcircuit_area(s, rules, tile.sizing) + rules.miv_keepout * s.miv_count * s.count
        raw[s.tier] = raw.get(s.tier, 0.0) + a
        if s.tier == "FEOL":
            owners[s.owner] = owners.get(s.owner, 0.0) + a
    tiers = dict(raw)
    if "FEOL" in tiers:
        tiers["FEOL"] *= rules.whitespace
    if "BEOL_PG" in tiers:
        tiers["BEOL_PG"] *= congestion_factor(tile.spec.w)
    feol = raw.get("FEOL", 0.0)
    shares = {o: (owners.get(o, 0.0) / feol if feol else 0.0)
              for o in ("sb", "cb", "local_xbar", "lut", "ble", "config_sram")}
    variant = tile.style.variant if tile.style else "CMOS_2D"
    return TileCostReport(variant, tiers, max(tiers.values()), shares, raw_tier_area=raw)


# ---------------------------------------------------------------------------
# timing


def node_swing(pass_dev: DeviceParams, v_gate: float, v_dd: float) -> float:
    """High level passed by a pass device: min(v_dd, v_gate - |vth|) for n-type."""
    if pass_dev.polarity == "n":
        return max(0.0, min(v_dd, v_gate - pass_dev.vth))
    return v_dd


def _rail(style, rail: str) -> float:
    if rail == "v_sram_scb":
        return style.scb
    if rail == "v_sram":
        return style.v_sram
    return style.v_dd


class _Path:
    """Helpers shared by the representative-path stage builders."""

    def __init__(self, tile: TileNetlist, tech: TechnologyLibrary, footprint: float):
        self.tile = tile
        self.tech = tech
        self.style = tile.style
        self.sz = tile.sizing
        self.side = math.sqrt(footprint)
        self.subs = {s.name: s for s in tile.subcircuits}

    def dev(self, sub: str, role: str):
        for d in self.subs[sub].devices:
            if d.role == role:
                return d.dev, d.w(self.sz)
        raise KeyError(f"{sub}:{role}")

    def has(self, sub: str) -> bool:
        return sub in self.subs

    def cpar(self, sub, role) -> float:
        d, w = self.dev(sub, role)
        return d.c_parasitic * w

    def cgate(self, sub, role) -> float:
        d, w = self.dev(sub, role)
        return d.c_gate * w

    def r_inv(self, sub, stage) -> float:
        vdd = self.style.v_dd
        dn, wn = self.dev(sub, f"buf_stage{stage}_n")
        dp, wp = self.dev(sub, f"buf_stage{stage}_p")
        return 0.5 * (effective_resistance(dn, vdd, wn) + effective_resistance(dp, vdd, wp))

    def buf_in(self, sub) -> float:
        return self.cgate(sub, "buf_stage1_n") + self.cgate(sub, "buf_stage1_p")

    def buf_intrinsic(self, sub) -> float:
        c = (self.cpar(sub, "buf_stage1_n") + self.cpar(sub, "buf_stage1_p")
             + self.cgate(sub, "buf_stage2_n") + self.cgate(sub, "buf_stage2_p"))
        return LN2 * self.r_inv(sub, 1) * c

    def buf_root(self, sub) -> RcTree:
        c = self.cpar(sub, "buf_stage2_n") + self.cpar(sub, "buf_stage2_p")
        return RcTree("drv", self.r_inv(sub, 2), c)

    def mivs(self, tree: RcTree, node, sub: str, dst: str):
        for net, r, c in self.subs[sub].rc:
            if net.startswith(f"out->{dst}#"):
                node = tree.add(f"{sub}:{net}", node, r, c)
        return node

    def r_pass(self, sub) -> float:
        d, w = self.dev(sub, "pass")
        v_gate = _rail(self.style, self.subs[sub].gate_rail)
        return effective_resistance(d, v_gate, w, v_ds=self.style.v_dd)

    def mux(self, tree: RcTree, node, prefix: str):
        """Through a two-level mux from an input already on ``node``; returns output node."""
        mux = f"{prefix}.mux"
        s1, s2 = mux_stages(self.subs[mux].mux_size)
        cp = self.cpar(mux, "pass")
        rp = self.r_pass(mux)
        if s2 > 1:
            # first-stage output: s1 drains plus the second-stage source
            node = tree.add(f"{prefix}:int", node, rp, (s1 + 1) * cp)
            out_diff = s2
        else:
            out_diff = s1
        out = tree.add(f"{prefix}:out", node, rp, out_diff * cp)
        if self.has(f"{prefix}.rst"):
            tree.add_cap(out, self.cpar(f"{prefix}.rst", "keeper"))
        out = self.mivs(tree, out, mux, f"{prefix}.buf")
        tree.add_cap(out, self.buf_in(f"{prefix}.buf"))
        return out

    def local_wire(self, tree, node, name, length):
        m = self.tech.local_metal
        return tree.add_wire(node, name, length, m.r_per_um, m.c_per_um)


def _stage_wire(p: _Path) -> float:
    """SB buffer -> one L-tile segment with CB/SB taps -> far-end CB mux."""
    sp = p.tile.spec
    tree = p.buf_root("sb.buf")
    node = p.mivs(tree, "drv", "sb.buf", "sb.mux")
    m = p.tech.routing_metal
    cb_taps = sp.i * sp.cb_mux_size / sp.w
    tap_c = cb_taps * p.cpar("cb.mux", "pass")
    for j in range(sp.l):
        node = tree.add_wire(node, f"seg{j}_", p.side, m.r_per_um, m.c_per_um)
        tree.add_cap(node, tap_c)
    tree.add_cap(node, sp.fs * p.cpar("sb.mux", "pass"))
    out = p.mux(tree, node, "cb")
    return t50(tree, out) + p.buf_intrinsic("cb.buf")


def _stage_cb_to_xbar(p: _Path) -> float:
    sp = p.tile.spec
    tree = p.buf_root("cb.buf")
    node = p.mivs(tree, "drv", "cb.buf", "xbar.mux")
    node = p.local_wire(tree, node, "w", LOCAL_WIRE_FRACTION["cb_to_xbar"] * p.side)
    fanout = sp.n * sp.k * sp.xbar_mux_size / (sp.i + sp.n)
    tree.add_cap(node, fanout * p.cpar("xbar.mux", "pass"))
    out = p.mux(tree, node, "xbar")
    return t50(tree, out) + p.buf_intrinsic("xbar.buf")


def _lut_driver(p: _Path) -> tuple:
    """(input cap, delay) of the true/complement select driver."""
    k = p.tile.spec.k
    dn, wn = p.dev("lut.drv", "drv_n")
    dp, wp = p.dev("lut.drv", "drv_p")
    vdd = p.style.v_dd
    r = 0.5 * (effective_resistance(dn, vdd, wn) + effective_resistance(dp, vdd, wp))
    c_self = dn.c_parasitic * wn + dp.c_parasitic * wp
    c_in = dn.c_gate * wn + dp.c_gate * wp
    # select of the first level above the isolation buffers
    gates = 2 ** (k - k // 2 - 1) * p.cgate("lut.tree", "pass")
    d1 = LN2 * r * (c_self + gates + c_in)  # complement, also drives the second inverter
    d2 = LN2 * r * (c_self + gates)
    return c_in, d1 + d2


def _stage_xbar_to_lut(p: _Path) -> float:
    tree = p.buf_root("xbar.buf")
    node = p.local_wire(tree, "drv", "w", LOCAL_WIRE_FRACTION["xbar_to_lut"] * p.side)
    c_in, d_drv = _lut_driver(p)
    tree.add_cap(node, c_in)
    return t50(tree, node) + d_drv


def _stage_lut(p: _Path) -> float:
    """Isolation buffer through the upper pass levels to the LUT output buffer.

    The representative path enters on the first input above the isolation
    buffers (the fast input a timing-driven packer gives a critical net), so
    the configuration SRAM only holds static data on the lower levels.
    """
    k = p.tile.spec.k
    d, w = p.dev("lut.tree", "pass")
    rp = effective_resistance(d, p.style.v_dd, w)
    cp = d.c_parasitic * w
    tree = p.buf_root("lut.ibuf")
    node = "drv"
    tree.add_cap(node, cp)
    for level in range(k // 2, k):
        node = tree.add(f"l{level}", node, rp, (2 if level == k - 1 else 3) * cp)
    tree.add_cap(node, p.buf_in("lut.buf"))
    return t50(tree, node) + p.buf_intrinsic("lut.buf")


def _stage_lut_to_ble(p: _Path) -> float:
    tree = p.buf_root("lut.buf")
    node = p.local_wire(tree, "drv", "w", LOCAL_WIRE_FRACTION["lut_to_ble"] * p.side)
    dn, wn = p.dev("ff", "ff_n")
    tree.add_cap(node, 2 * dn.c_gate * wn + p.cpar("ble.mux", "pass"))
    out = p.mux(tree, node, "ble")
    return t50(tree, out) + p.buf_intrinsic("ble.buf")


def _stage_ble_to_sb(p: _Path) -> float:
    sp = p.tile.spec
    tree = p.buf_root("ble.buf")
    node = p.mivs(tree, "drv", "ble.buf", "sb.mux")
    node = p.local_wire(tree, node, "w", LOCAL_WIRE_FRACTION["ble_to_sb"] * p.side)
    tree.add_cap(node, sp.opin_tracks * p.cpar("sb.mux", "pass"))
    out = p.mux(tree, node, "sb")
    return t50(tree, out) + p.buf_intrinsic("sb.buf")


STAGES = {
    "wire_to_cb": _stage_wire,
    "cb_to_xbar": _stage_cb_to_xbar,
    "xbar_to_lut": _stage_xbar_to_lut,
    "lut": _stage_lut,
    "lut_to_ble": _stage_lut_to_ble,
    "ble_to_sb": _stage_ble_to_sb,
}


def stage_delays(tile: TileNetlist, tech: TechnologyLibrary | None = None,
                 footprint: float | None = None) -> dict:
    tech = tech or load_tech()
    if tile.style is None:
        raise ValueError("tile must be tier-assigned")
    if footprint is None:
        footprint = tile_footprint(tile, tech).footprint
    p = _Path(tile, tech, footprint)
    return {name: fn(p) for name, fn in STAGES.items()}


def representative_cpd(tile: TileNetlist, style=None, tech: TechnologyLibrary | None = None,
                       footprint: float | None = None) -> float:
    """ln2-Elmore delay of CB -> crossbar -> LUT -> BLE out -> SB -> L-tile wire."""
    if style is not None and tile.style != style:
        tile = dataclasses.replace(tile, style=style)
    return sum(stage_delays(tile, tech, footprint).values())


def sb_switch_model(tile: TileNetlist, tech: TechnologyLibrary | None = None,
                    footprint: float | None = None) -> dict:
    """Routing switch (SB mux + buffer) as intrinsic delay plus output resistance."""
    tech = tech or load_tech()
    if footprint is None:
        footprint = tile_footprint(tile, tech).footprint
    p = _Path(tile, tech, footprint)
    tree = RcTree("in", 0.0, p.cpar("sb.mux", "pass"))
    out = p.mux(tree, "in", "sb")
    t_del = t50(tree, out) + p.buf_intrinsic("sb.buf")
    c_out = p.cpar("sb.buf", "buf_stage2_n") + p.cpar("sb.buf", "buf_stage2_p")
    return {"r_on": p.r_inv("sb.buf", 2), "c_in": p.cpar("sb.mux", "pass"), "c_out": c_out,
            "t_del": t_del}


# ---------------------------------------------------------------------------
# static power


def _inverter_leak(n_dev, wn, p_dev, wp, v_dd) -> float:
    # one of the two devices is off, each half the time
    return 0.5 * (leakage_power(n_dev, wn, v_dd) + leakage_power(p_dev, wp, v_dd))


def tile_static_power(tile: TileNetlist, tech: TechnologyLibrary | None = None) -> dict:
    """Static power by owner class, split into config bits and logic leakage."""
    tech = tech or load_tech()
    style = tile.style
    cell = cell_from_tech(tech, tile.cell)
    per_bit: dict = {}
    out = {"config": {}, "logic": {}}
    for s in tile.subcircuits:
        if s.block == "SRAM_BIT":
            if s.name.endswith("_p"):
                continue
            owner = tile.sub(s.drives).owner if s.drives else s.owner
            v = _rail(style, s.gate_rail)
            if v not in per_bit:
                per_bit[v] = sram_static_power(cell, v)
            out["config"][owner] = out["config"].get(owner, 0.0) + s.count * per_bit[v]
        elif s.block == "BUFFER":
            leak = 0.0
            devs = list(s.devices)
            for a, b in zip(devs[0::2], devs[1::2]):
                leak += a.n * _inverter_leak(a.dev, a.w(tile.sizing), b.dev, b.w(tile.sizing), style.v_dd)
            out["logic"][s.owner] = out["logic"].get(s.owner, 0.0) + s.count * leak
        elif s.block == "FF":
            out["logic"][s.owner] = out["logic"].get(s.owner, 0.0) + s.count * tech.ff_leakage
    return out


def evaluate_tile(tile: TileNetlist, tech: TechnologyLibrary | None = None) -> TileCostReport:
    tech = tech or load_tech()
    rep = tile_footprint(tile, tech)
    rep.stage_delays = stage_delays(tile, tech, rep.footprint)
    rep.cpd = sum(rep.stage_delays.values())
    sp = tile_static_power(tile, tech)
    owners = set(sp["config"]) | set(sp["logic"])
    rep.static_by_owner = {o: sp["config"].get(o, 0.0) + sp["logic"].get(o, 0.0) for o in sorted(owners)}
    rep.static_power = sum(rep.static_by_owner.values())
    cfg = sum(sp["config"].values())
    rep.config_static_share = cfg / rep.static_power if rep.static_power else 0.0
    rep.static_config = cfg
    rep.static_routing = sum(v for o, v in rep.static_by_owner.items() if o in ("sb", "cb"))
    return rep


def system_power_breakdown(report: TileCostReport, grid: tuple = (1, 1)) -> dict:
    rows, cols = grid
    if rows < 1 or cols < 1:
        raise ValueError("grid must be at least 1x1")
    n = rows * cols
    total = report.static_power * n
    cfg = getattr(report, "static_config", report.config_static_share * report.static_power) * n
    routing = getattr(report, "static_routing", 0.0) * n
    return {
        "config_share": cfg / total if total else 0.0,
        "routing_share": routing / total if total else 0.0,
        "total_static": total,
    }


# ---------------------------------------------------------------------------
# mux DUT power


class DutError(ValueError):
    pass


@dataclass(frozen=True)
class MuxDut:
    mux_size: int
    pass_dev: DeviceParams
    pass_width: float
    load: RcTree
    v_sram_gate: float
    n_sram: int
    toggle_freq: float = DUT_TOGGLE_FREQ
    window: float = DUT_WINDOW
    restorer: DeviceParams | None = None  # always-on weak pull-up when present
    buffer_n: tuple | None = None  # (device, stage1 width, stage2 width)
    buffer_p: tuple | None = None
    sram_cell: object = None
    v_dd: float = 0.7

    def __post_init__(self):
        if self.window <= 0:
            raise DutError("window must be > 0")
        if self.mux_size < 1:
            raise DutError("mux needs at least one input")
        if self.n_sram < 0:
            raise DutError("negative SRAM count")


def _toggles(dut: MuxDut) -> float:
    if dut.toggle_freq == 0:
        return 0.0
    n = dut.toggle_freq * dut.window
    if abs(n - round(n)) > 1e-6:
        raise DutError(f"window {dut.window} s is not a multiple of the toggle period "
                       f"{1 / dut.toggle_freq} s")
    return float(round(n))


def dut_switched_nodes(dut: MuxDut) -> list:
    """(name, capacitance, swing) for every node that toggles with the selected input."""
    v_dd = dut.v_dd
    swing = node_swing(dut.pass_dev, dut.v_sram_gate, v_dd)
    cp = dut.pass_dev.c_parasitic * dut.pass_width
    s1, s2 = mux_stages(dut.mux_size)
    nodes = [("input", cp, v_dd)]
    out_diff = s1
    if s2 > 1:
        nodes.append(("internal", (s1 + 1) * cp, swing))
        out_diff = s2
    c_out = out_diff * cp
    out_swing = swing
    if dut.restorer is not None:
        c_out += dut.restorer.c_parasitic * dut.restorer.w_min
        out_swing = v_dd
    if dut.buffer_n is not None:
        dn, w1n, w2n = dut.buffer_n
        dp, w1p, w2p = dut.buffer_p
        c_out += dn.c_gate * w1n + dp.c_gate * w1p
        nodes.append(("output", c_out, out_swing))
        nodes.append(("buffer1", dn.c_parasitic * w1n + dp.c_parasitic * w1p
                      + dn.c_gate * w2n + dp.c_gate * w2p, v_dd))
        nodes.append(("load", dn.c_parasitic * w2n + dp.c_parasitic * w2p + dut.load.total_cap(), v_dd))
    else:
        nodes.append(("output", c_out + dut.load.total_cap(), out_swing))
    return nodes


def mux_dut_power(dut: MuxDut, style=None) -> float:
    """Average supply power over the window plus configuration-bit static power."""
    v_dd = dut.v_dd if style is None else style.v_dd
    if style is not None and v_dd != dut.v_dd:
        dut = dataclasses.replace(dut, v_dd=v_dd)
    toggles = _toggles(dut)
    e_dyn = sum(c * v * v for _, c, v in dut_switched_nodes(dut)) * toggles
    p = e_dyn / dut.window
    if dut.restorer is not None:
        # the keeper fights the mux whenever the output is low (half the time)
        i_keep = abs(drain_current(dut.restorer, -v_dd, -v_dd, dut.restorer.w_min))
        p += 0.5 * v_dd * i_keep
    # off pass devices with a full input swing across them half the time
    s1, s2 = mux_stages(dut.mux_size)
    n_pass = dut.mux_size if s2 == 1 else dut.mux_size + s2
    off = n_pass - (1 if s2 == 1 else 2)
    p += 0.5 * off * leakage_power(dut.pass_dev, dut.pass_width, v_dd)
    if dut.buffer_n is not None:
        dn, w1n, w2n = dut.buffer_n
        dp, w1p, w2p = dut.buffer_p
        p += _inverter_leak(dn, w1n, dp, w1p, v_dd) + _inverter_leak(dn, w2n, dp, w2p, v_dd)
    if dut.n_sram and dut.sram_cell is not None:
        p += dut.n_sram * sram_static_power(dut.sram_cell, dut.v_sram_gate)
    return p


# reference test-bench loads: the SB DUT drives one routing segment, the CB
# DUT a local wire into crossbar inputs; identical for every variant
DUT_LOADS = {
    "sb": {"length_um": 100.0, "layer": "routing", "taps": 4},
    "cb": {"length_um": 25.0, "layer": "local", "taps": 30},
}
SB_SWEEP = (4, 6, 8, 10, 12)  # SB mux_size
CB_SWEEP = (50, 100, 150, 200, 250)  # channel width w; CB mux size = ceil(w * fc_in)


def make_dut(kind: str, style, tech: TechnologyLibrary | None = None, mux_size: int | None = None,
             spec=None, sizing: dict | None = None) -> MuxDut:
    """Stand-alone SB or CB mux test bench for a style.

    AOS pass gates are used for ``M3D_FULL``; configuration bits use the
    variant's cell at ``v_sram_scb``; a restorer is attached when the style
    needs one.
    """
    tech = tech or load_tech()
    spec = spec or TileSpec()
    if kind not in ("sb", "cb"):
        raise DutError(f"unknown DUT kind {kind!r}")
    sz = {**DEFAULT_SIZING, **(sizing or {})}
    roles = DEFAULT_ROLES
    full = style.variant == "M3D_FULL"
    pass_dev = tech.device(roles["beol_pass" if full else "pass"])
    if mux_size is None:
        mux_size = spec.sb_mux_size if kind == "sb" else spec.cb_mux_size
    cell = cell_from_tech(tech, roles["feol_cell" if style.variant == "CMOS_2D" else "beol_cell"])
    n_dev, p_dev = tech.device(roles["logic_n"]), tech.device(roles["logic_p"])
    m2 = sz[f"{kind}_buf"]
    m1 = max(1.0, math.sqrt(m2))
    spec_load = DUT_LOADS[kind]
    metal = tech.routing_metal if spec_load["layer"] == "routing" else tech.local_metal
    load = RcTree("out")
    end = load.add_wire("out", "w", spec_load["length_um"], metal.r_per_um, metal.c_per_um)
    tap_dev = pass_dev if kind == "sb" else tech.device(roles["pass"])
    tap_w = sz[f"{kind}_pass" if kind == "sb" else "xbar_pass"] * tap_dev.w_min
    load.add_cap(end, spec_load["taps"] * tap_dev.c_parasitic * tap_w)
    rst = tech.device(roles["keeper"]) if restorers_needed(style, pass_dev) else None
    return MuxDut(
        mux_size=mux_size, pass_dev=pass_dev, pass_width=sz[f"{kind}_pass"] * pass_dev.w_min,
        load=load, v_sram_gate=style.scb, n_sram=mux_config_bits(mux_size), restorer=rst,
        buffer_n=(n_dev, m1 * n_dev.w_min, m2 * n_dev.w_min),
        buffer_p=(p_dev, m1 * p_dev.w_min, m2 * p_dev.w_min),
        sram_cell=cell, v_dd=style.v_dd)


SWEEP_PARAMS = {"sb": ("mux_size",), "cb": ("w", "fc_in", "mux_size")}


def dut_sweep(kind: str, style, tech: TechnologyLibrary | None = None, values=None,
              param: str | None = None) -> list:
    """(parameter value, power) over a sweep grid.

    SB sweeps the mux size; CB sweeps the channel width by default (mux size
    ceil(w * fc_in)), or ``fc_in`` or the mux size directly.
    """
    tech = tech or load_tech()
    if kind not in SWEEP_PARAMS:
        raise DutError(f"unknown DUT kind {kind!r}")
    param = param or SWEEP_PARAMS[kind][0]
    if param not in SWEEP_PARAMS[kind]:
        raise DutError(f"{kind} DUT sweeps one of {SWEEP_PARAMS[kind]}, not {param!r}")
    if values is None:
        if param == "fc_in":
            values = (0.05, 0.1, 0.15, 0.2, 0.25)
        else:
            values = SB_SWEEP if kind == "sb" else CB_SWEEP
    out = []
    for v in values:
        if param == "mux_size":
            dut = make_dut(kind, style, tech, mux_size=int(v))
        else:
            dut = make_dut(kind, style, tech, spec=dataclasses.replace(TileSpec(), **{param: v}))
        out.append((v, mux_dut_power(dut, style)))
    return out
