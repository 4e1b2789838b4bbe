"""FPGA tile generator: subcircuit netlist, configuration bits, tiers and MIVs.

A tile is described by a flat list of subcircuit groups.  Each group is
``count`` identical instances (e.g. ``W`` switch-block muxes), so the
netlist stays small while every device is still accounted for.  Device
widths are stored as multiples of the device's ``w_min`` per sizing class;
SRAM bit-cell devices carry absolute widths taken from the cell record.

Structure of one CLB tile (N BLEs of K-LUTs):

* ``lut``   N LUTs, each a K-level binary pass-device tree (2^(K+1) - 2
  devices) with 2^K SRAM data bits, K input drivers, isolation buffers
  K // 2 levels above the data bits and an output buffer.
* ``xbar``  N*K local-crossbar muxes, each selecting from a fraction
  ``xbar_population`` of the I + N (inputs plus feedback) sources.
* ``ble``   2 output muxes (2:1, LUT or FF) per BLE: one to the output pin,
  one to the feedback path.
* ``ff``    N flip-flops with one init bit each.
* ``cb``    I connection-block muxes of ceil(W * fc_in) inputs.
* ``sb``    W switch-block muxes of fs + 1 inputs (fs track inputs from the
  other channel sides plus one CLB output pin).

Muxes are two-level: stage 2 has ``s2 = round(sqrt(n))`` devices, stage 1 has
``s1 = ceil(n / s2)`` devices per group.  Stage-1 select lines are shared
across groups, so a mux needs ``s1 + s2`` configuration bits and ``n + s2``
pass devices.  When ``s2 == 1`` the mux is single-level (``n`` bits).
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .devices import DeviceParams, DomainError, TechnologyLibrary, load_tech
from .sram import cell_from_tech

VARIANTS = ("CMOS_2D", "M3D_SRAM_ONLY", "M3D_FULL")
BLOCKS = ("LUT", "CLB_XBAR", "BLE_OUT", "FF", "SB_MUX", "CB_MUX", "BUFFER", "RESTORER", "SRAM_BIT")
TIERS = ("FEOL", "BEOL_PG", "BEOL_SRAM_N", "BEOL_SRAM_P")
SHARE_CLASSES = ("sb", "cb", "local_xbar", "lut", "ble", "config_sram")

# technology device roles; override with build_tile(roles=...)
DEFAULT_ROLES = {
    "logic_n": "si_n",
    "logic_p": "si_p",
    "pass": "si_n",
    "keeper": "si_p_weak",
    "beol_pass": "aos_n_iwo",
    "feol_cell": "si_6t",
    "beol_cell": "aos_6t",
}

SIZING_CLASSES = (
    "sb_pass", "sb_buf", "cb_pass", "cb_buf", "xbar_pass", "xbar_buf",
    "lut_pass", "lut_buf", "ble_pass", "ble_buf",
)
DEFAULT_SIZING = {
    "sb_pass": 1.5, "sb_buf": 4.0, "cb_pass": 2.0, "cb_buf": 2.0,
    "xbar_pass": 3.0, "xbar_buf": 3.0, "lut_pass": 3.0, "lut_buf": 3.0,
    "ble_pass": 2.0, "ble_buf": 3.0,
}


class TileSpecError(ValueError):
    pass


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class ImplStyle:
    variant: str = "CMOS_2D"
    v_dd: float = 0.7
    v_sram: float = 0.8
    v_sram_scb: float | None = None  # None: same rail as v_sram
    level_restorers: str = "auto"  # auto | on | off

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise TileSpecError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.level_restorers not in ("auto", "on", "off"):
            raise TileSpecError("level_restorers must be auto, on or off")
        if self.v_dd <= 0 or self.v_sram <= 0:
            raise TileSpecError("rail voltages must be positive")
        if self.v_sram_scb is not None and self.v_sram_scb <= 0:
            raise TileSpecError("v_sram_scb must be positive")

    @property
    def scb(self) -> float:
        return self.v_sram if self.v_sram_scb is None else self.v_sram_scb


@dataclass(frozen=True)
class TileSpec:
    k: int = 6
    n: int = 10
    i: int = 40
    w: int = 150
    l: int = 8
    fs: int = 3
    fc_in: float = 0.15
    fc_out: float = 0.10
    style: ImplStyle = field(default_factory=ImplStyle)
    xbar_population: float = 0.5

    def __post_init__(self):
        bad = []
        if self.k < 2:
            bad.append("k >= 2")
        if self.n < 1:
            bad.append("n >= 1")
        if self.i < 1:
            bad.append("i >= 1")
        if self.w < 2:
            bad.append("w >= 2")
        if self.l < 1:
            bad.append("l >= 1")
        if self.fs < 3:
            bad.append("fs >= 3")
        for name in ("fc_in", "fc_out", "xbar_population"):
            if not 0 < getattr(self, name) <= 1:
                bad.append(f"0 < {name} <= 1")
        if bad:
            raise TileSpecError("invalid tile spec, violated: " + ", ".join(bad))

    # derived mux sizes
    @property
    def cb_mux_size(self) -> int:
        return math.ceil(self.w * self.fc_in - 1e-9)

    @property
    def sb_mux_size(self) -> int:
        return self.fs + 1

    @property
    def xbar_mux_size(self) -> int:
        return max(1, math.ceil(self.xbar_population * (self.i + self.n) - 1e-9))

    @property
    def opin_tracks(self) -> int:
        return math.ceil(self.w * self.fc_out - 1e-9)


def mux_stages(n: int) -> tuple[int, int]:
    """(s1, s2): inputs per first-stage group and number of groups."""
    if n < 1:
        raise TileSpecError("mux needs at least one input")
    s2 = max(1, round(math.sqrt(n)))
    if s2 == 1:
        return n, 1
    return math.ceil(n / s2), s2


def mux_config_bits(n: int) -> int:
    s1, s2 = mux_stages(n)
    return s1 if s2 == 1 else s1 + s2


def mux_pass_devices(n: int) -> int:
    s1, s2 = mux_stages(n)
    return n if s2 == 1 else n + s2


@dataclass(frozen=True)
class Device:
    dev: DeviceParams
    cls: str  # sizing class; "fixed" uses `width`
    role: str
    n: int = 1  # identical devices per instance
    width: float | None = None  # absolute width (um) for fixed devices

    def w(self, sizing: dict) -> float:
        if self.width is not None:
            return self.width
        if self.cls.endswith("_buf1"):
            # first buffer stage tapers geometrically toward the second
            return max(1.0, math.sqrt(sizing.get(self.cls[:-1], 1.0))) * self.dev.w_min
        return sizing.get(self.cls, 1.0) * self.dev.w_min


@dataclass(frozen=True)
class Subcircuit:
    name: str
    block: str
    owner: str  # area-share class
    count: int
    devices: tuple
    tier: str = "FEOL"
    miv_count: int = 0  # per instance
    rc: tuple = ()  # parasitic elements (net, r, c), per instance
    fanout: tuple = ()  # downstream subcircuit names
    drives: str = ""  # SRAM_BIT: the subcircuit whose gates/data it drives
    gate_rail: str = ""  # "v_sram" or "v_sram_scb" for config-driven devices
    mux_size: int = 0
    bits_per_instance: int = 0  # config bits each instance requires

    def device_count(self) -> int:
        return self.count * sum(d.n for d in self.devices)


@dataclass(frozen=True)
class TileNetlist:
    spec: TileSpec
    subcircuits: tuple
    sizing: dict
    cell: str = "si_6t"
    style: ImplStyle | None = None  # set by assign_tiers
    restorers: bool = True
    mivs_inserted: bool = False

    def sub(self, name: str) -> Subcircuit:
        for s in self.subcircuits:
            if s.name == name:
                return s
        raise KeyError(name)

    def with_sizing(self, sizing: dict) -> "TileNetlist":
        merged = dict(self.sizing)
        merged.update(sizing)
        return dataclasses.replace(self, sizing=merged)

    def device_count(self) -> int:
        return sum(s.device_count() for s in self.subcircuits)


def restorers_needed(style: ImplStyle, pass_dev: DeviceParams) -> bool:
    """Level restorers are dropped when the routing gate rail passes a full v_dd."""
    if style.level_restorers != "auto":
        return style.level_restorers == "on"
    return style.scb < style.v_dd + pass_dev.vth


def _sram_group(name: str, drives: str, owner_count: int, bits: int, tech, roles, rail) -> Subcircuit:
    cell = cell_from_tech(tech, roles["feol_cell"])
    devs = (
        Device(cell.pu_dev, "fixed", "pull_up", 2, cell.w_pu),
        Device(cell.pd_dev, "fixed", "pull_down", 2, cell.w_pd),
        Device(cell.pg_dev, "fixed", "access", 2, cell.w_pg),
    )
    return Subcircuit(name, "SRAM_BIT", "config_sram", owner_count * bits, devs,
                      drives=drives, gate_rail=rail, bits_per_instance=1)


def _buffer(name, owner, count, tech, roles, cls, fanout=()) -> Subcircuit:
    n, p = tech.device(roles["logic_n"]), tech.device(roles["logic_p"])
    devs = (
        Device(n, cls + "1", "buf_stage1_n"), Device(p, cls + "1", "buf_stage1_p"),
        Device(n, cls, "buf_stage2_n"), Device(p, cls, "buf_stage2_p"),
    )
    return Subcircuit(name, "BUFFER", owner, count, devs, fanout=tuple(fanout))


def _mux_group(prefix, block, owner, count, size, pass_dev, cls, rail, tech, roles,
               restorer: bool, fanout) -> list:
    subs = []
    devs = (Device(pass_dev, cls, "pass", mux_pass_devices(size)),)
    out = [f"{prefix}.rst"] if restorer else []
    subs.append(Subcircuit(f"{prefix}.mux", block, owner, count, devs,
                           fanout=tuple(out + [f"{prefix}.buf"]), gate_rail=rail,
                           mux_size=size, bits_per_instance=mux_config_bits(size)))
    if restorer:
        keeper = tech.device(roles["keeper"])
        subs.append(Subcircuit(f"{prefix}.rst", "RESTORER", owner, count,
                               (Device(keeper, "fixed", "keeper", 1, keeper.w_min),)))
    subs.append(_buffer(f"{prefix}.buf", owner, count, tech, roles, cls.replace("_pass", "_buf"), fanout))
    subs.append(_sram_group(f"{prefix}.cfg", f"{prefix}.mux", count,
                            mux_config_bits(size), tech, roles, rail))
    return subs


def build_tile(spec: TileSpec, tech: TechnologyLibrary | None = None, roles: dict | None = None,
               sizing: dict | None = None) -> TileNetlist:
    """Generate the (untiered, all-FEOL) netlist of one tile.

    Whether level restorers are instantiated follows ``spec.style``: the
    routing pass device of the variant (AOS for ``M3D_FULL``) decides the
    ``auto`` threshold, and the decision is tile-wide.
    """
    tech = tech or load_tech()
    roles = {**DEFAULT_ROLES, **(roles or {})}
    sz = {**DEFAULT_SIZING, **(sizing or {})}
    routing_pass = tech.device(roles["beol_pass" if spec.style.variant == "M3D_FULL" else "pass"])
    rst = restorers_needed(spec.style, routing_pass)
    n_dev, p_dev, pg = tech.device(roles["logic_n"]), tech.device(roles["logic_p"]), tech.device(roles["pass"])
    k, n = spec.k, spec.n
    subs: list[Subcircuit] = []

    # LUTs
    subs.append(Subcircuit("lut.tree", "LUT", "lut", n,
                           (Device(pg, "lut_pass", "pass", 2 ** (k + 1) - 2),),
                           fanout=("lut.buf",), mux_size=2 ** k))
    # isolation buffers inside the tree, k // 2 levels above the data bits
    subs.append(_buffer("lut.ibuf", "lut", n * 2 ** (k - k // 2), tech, roles, "lut_buf", ("lut.tree",)))
    subs.append(Subcircuit("lut.drv", "BUFFER", "lut", n,
                           (Device(n_dev, "lut_buf1", "drv_n", 2 * k),
                            Device(p_dev, "lut_buf1", "drv_p", 2 * k)),
                           fanout=("lut.tree",)))
    subs.append(_buffer("lut.buf", "lut", n, tech, roles, "lut_buf", ("ble.mux", "ff")))
    subs.append(_sram_group("lut.cfg", "lut.tree", n, 2 ** k, tech, roles, "v_sram"))

    subs += _mux_group("xbar", "CLB_XBAR", "local_xbar", n * k, spec.xbar_mux_size, pg,
                       "xbar_pass", "v_sram", tech, roles, rst, ("lut.drv",))
    subs += _mux_group("ble", "BLE_OUT", "ble", 2 * n, 2, pg, "ble_pass", "v_sram",
                       tech, roles, rst, ("sb.mux", "xbar.mux"))
    ff_half = max(1, round(tech.ff_area / 2))
    subs.append(Subcircuit("ff", "FF", "ble", n,
                           (Device(n_dev, "fixed", "ff_n", ff_half, n_dev.w_min),
                            Device(p_dev, "fixed", "ff_p", ff_half, p_dev.w_min)),
                           fanout=("ble.mux",)))
    subs.append(_sram_group("ff.cfg", "ff", n, 1, tech, roles, "v_sram"))
    subs += _mux_group("cb", "CB_MUX", "cb", spec.i, spec.cb_mux_size, pg, "cb_pass",
                       "v_sram_scb", tech, roles, rst, ("xbar.mux",))
    subs += _mux_group("sb", "SB_MUX", "sb", spec.w, spec.sb_mux_size, pg, "sb_pass",
                       "v_sram_scb", tech, roles, rst, ("sb.mux", "cb.mux"))
    return TileNetlist(spec, tuple(subs), sz, cell=roles["feol_cell"], restorers=rst)


def count_config_bits(tile: TileNetlist) -> dict:
    per_block: dict[str, int] = {}
    for s in tile.subcircuits:
        if s.block == "SRAM_BIT" and not s.name.endswith(".cfg_p"):
            target = tile.sub(s.drives)
            per_block[target.block] = per_block.get(target.block, 0) + s.count
    return {"per_block": per_block, "total": sum(per_block.values())}


def _tier_index(style: ImplStyle) -> dict:
    present = {"CMOS_2D": ("FEOL",),
               "M3D_SRAM_ONLY": ("FEOL", "BEOL_SRAM_N", "BEOL_SRAM_P"),
               "M3D_FULL": TIERS}[style.variant]
    return {t: i for i, t in enumerate(present)}


def assign_tiers(tile: TileNetlist, style: ImplStyle, tech: TechnologyLibrary | None = None,
                 roles: dict | None = None) -> TileNetlist:
    """Place subcircuits on tiers and swap in BEOL devices for the variant."""
    tech = tech or load_tech()
    roles = {**DEFAULT_ROLES, **(roles or {})}
    if style.variant == "CMOS_2D":
        subs = tuple(dataclasses.replace(s, tier="FEOL") for s in tile.subcircuits)
        return dataclasses.replace(tile, subcircuits=subs, style=style)
    try:
        cell = cell_from_tech(tech, roles["beol_cell"])
        beol_pass = tech.device(roles["beol_pass"]) if style.variant == "M3D_FULL" else None
    except (DomainError, ValueError) as exc:
        raise ConfigurationError(f"{style.variant} needs BEOL devices: {exc}") from None
    if cell.layout_style != "BEOL_two_tier":
        raise ConfigurationError(f"cell {roles['beol_cell']!r} is not a two-tier BEOL cell")
    if beol_pass is not None and (beol_pass.polarity != "n" or beol_pass.tier_class != "BEOL"):
        raise ConfigurationError("BEOL pass gates must be n-type BEOL devices")
    out = []
    for s in tile.subcircuits:
        if s.block == "SRAM_BIT":
            n_devs = (Device(cell.pd_dev, "fixed", "pull_down", 2, cell.w_pd),
                      Device(cell.pg_dev, "fixed", "access", 2, cell.w_pg))
            p_devs = (Device(cell.pu_dev, "fixed", "pull_up", 2, cell.w_pu),)
            out.append(dataclasses.replace(s, name=s.name + "_n", devices=n_devs, tier="BEOL_SRAM_N"))
            out.append(dataclasses.replace(s, name=s.name + "_p", devices=p_devs, tier="BEOL_SRAM_P"))
        elif beol_pass is not None and s.block in ("SB_MUX", "CB_MUX"):
            devs = tuple(dataclasses.replace(d, dev=beol_pass) if d.role == "pass" else d
                         for d in s.devices)
            out.append(dataclasses.replace(s, devices=devs, tier="BEOL_PG"))
        else:
            out.append(dataclasses.replace(s, tier="FEOL"))
    return dataclasses.replace(tile, subcircuits=tuple(out), style=style, cell=roles["beol_cell"])


def _crossings(tiers: dict, a: str, b: str) -> int:
    return abs(tiers[a] - tiers[b])


def insert_mivs(tile: TileNetlist, tech: TechnologyLibrary | None = None,
                miv_pairs: int | None = None) -> TileNetlist:
    """Add one series R / shunt C per tier crossing on every inter-tier net."""
    if tile.style is None:
        raise ConfigurationError("assign tiers before inserting MIVs")
    tech = tech or load_tech()
    if tile.style.variant == "CMOS_2D":
        return dataclasses.replace(tile, mivs_inserted=True)
    tiers = _tier_index(tile.style)
    by_name = {s.name: s for s in tile.subcircuits}
    if miv_pairs is None:
        miv_pairs = tech.cells.get(tile.cell, {}).get("miv_pairs", 0)
    out = []
    for s in tile.subcircuits:
        rc = list(s.rc)
        mivs = 0
        for dst in s.fanout:
            x = _crossings(tiers, s.tier, by_name[dst].tier)
            for j in range(x):
                rc.append((f"out->{dst}#{j}", tech.miv_r, tech.miv_c))
            mivs += x
        if s.block == "SRAM_BIT":
            # inverter/feedback via pairs inside the cell; the n tier also
            # carries the storage-node via down to the driven gate
            mivs += 2 * miv_pairs
            for j in range(2 * miv_pairs):
                rc.append((f"cell#{j}", tech.miv_r, tech.miv_c))
            if s.tier == "BEOL_SRAM_N":
                x = _crossings(tiers, s.tier, by_name[s.drives].tier)
                for j in range(x):
                    rc.append((f"q->{s.drives}#{j}", tech.miv_r, tech.miv_c))
                mivs += x
        out.append(dataclasses.replace(s, rc=tuple(rc), miv_count=mivs))
    return dataclasses.replace(tile, subcircuits=tuple(out), mivs_inserted=True)


def generate_tile(spec: TileSpec, tech: TechnologyLibrary | None = None, style: ImplStyle | None = None,
                  sizing: dict | None = None) -> TileNetlist:
    """build_tile -> assign_tiers -> insert_mivs with the spec's own style by default."""
    tech = tech or load_tech()
    style = style or spec.style
    if style != spec.style:
        spec = dataclasses.replace(spec, style=style)
    tile = build_tile(spec, tech, sizing=sizing)
    return insert_mivs(assign_tiers(tile, style, tech), tech)


# ---------------------------------------------------------------------------
# text format

NETLIST_VERSION = 1


def _fmt(x: float) -> str:
    return format(x, ".12g")


def format_netlist(tile: TileNetlist) -> str:
    """Line-oriented dump: a header, then one stanza per subcircuit group.

    ::

        tile-netlist v1
        spec k=6 n=10 ...
        style variant=... v_dd=... v_sram=... v_sram_scb=... restorers=...
        sizing <class>=<multiplier> ...
        subckt <name> block=<B> owner=<o> count=<c> tier=<T> mivs=<m> ...
          dev <device> cls=<class> role=<role> n=<count> w=<um>
          rc <net> r=<ohm> c=<F>
          fanout <name> ...
        end
    """
    sp = tile.spec
    lines = [f"tile-netlist v{NETLIST_VERSION}",
             f"spec k={sp.k} n={sp.n} i={sp.i} w={sp.w} l={sp.l} fs={sp.fs} "
             f"fc_in={_fmt(sp.fc_in)} fc_out={_fmt(sp.fc_out)} xbar_population={_fmt(sp.xbar_population)}"]
    st = tile.style
    if st is not None:
        lines.append(f"style variant={st.variant} v_dd={_fmt(st.v_dd)} v_sram={_fmt(st.v_sram)} "
                     f"v_sram_scb={_fmt(st.scb)} level_restorers={st.level_restorers}")
    lines.append(f"restorers={'on' if tile.restorers else 'off'} cell={tile.cell}")
    lines.append("sizing " + " ".join(f"{k}={_fmt(v)}" for k, v in sorted(tile.sizing.items())))
    for s in tile.subcircuits:
        head = (f"subckt {s.name} block={s.block} owner={s.owner} count={s.count} "
                f"tier={s.tier} mivs={s.miv_count}")
        if s.mux_size:
            head += f" inputs={s.mux_size}"
        if s.bits_per_instance:
            head += f" bits={s.bits_per_instance}"
        if s.gate_rail:
            head += f" rail={s.gate_rail}"
        if s.drives:
            head += f" drives={s.drives}"
        lines.append(head)
        for d in s.devices:
            lines.append(f"  dev {d.dev.name} cls={d.cls} role={d.role} n={d.n} w={_fmt(d.w(tile.sizing))}")
        for net, r, c in s.rc:
            lines.append(f"  rc {net} r={_fmt(r)} c={_fmt(c)}")
        if s.fanout:
            lines.append("  fanout " + " ".join(s.fanout))
        lines.append("end")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# architecture spec files

_SPEC_INT = ("k", "n", "i", "w", "l", "fs")
_SPEC_FLOAT = ("fc_in", "fc_out", "xbar_population")
_STYLE_KEYS = ("variant", "v_dd", "v_sram", "v_sram_scb", "level_restorers")


def parse_tile_spec(text: str, source: str = "<spec>") -> TileSpec:
    """Read a ``[tile]`` / ``[style]`` key = value file; omitted keys keep defaults.

    ::

        [tile]
        k = 6
        w = 150
        [style]
        variant = M3D_FULL
        v_sram_scb = 1.2
    """
    section = None
    tile_kw: dict = {}
    style_kw: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in ("tile", "style"):
                raise TileSpecError(f"{where}: unknown section [{section}]")
            continue
        if "=" not in line or section is None:
            raise TileSpecError(f"{where}: expected 'key = value' inside [tile] or [style]")
        key, value = (x.strip() for x in line.split("=", 1))
        try:
            if section == "tile":
                if key in _SPEC_INT:
                    tile_kw[key] = int(value)
                elif key in _SPEC_FLOAT:
                    tile_kw[key] = float(value)
                else:
                    raise TileSpecError(f"{where}: unknown tile key {key!r}")
            else:
                if key not in _STYLE_KEYS:
                    raise TileSpecError(f"{where}: unknown style key {key!r}")
                style_kw[key] = value if key in ("variant", "level_restorers") else float(value)
        except ValueError as exc:
            if isinstance(exc, TileSpecError):
                raise
            raise TileSpecError(f"{where}: bad value {value!r} for {key}") from None
    return TileSpec(**tile_kw, style=ImplStyle(**style_kw))


def format_tile_spec(spec: TileSpec) -> str:
    lines = ["[tile]"]
    lines += [f"{k} = {getattr(spec, k)}" for k in _SPEC_INT]
    lines += [f"{k} = {_fmt(getattr(spec, k))}" for k in _SPEC_FLOAT]
    st = spec.style
    lines += ["[style]", f"variant = {st.variant}", f"v_dd = {_fmt(st.v_dd)}", f"v_sram = {_fmt(st.v_sram)}"]
    if st.v_sram_scb is not None:
        lines.append(f"v_sram_scb = {_fmt(st.v_sram_scb)}")
    lines.append(f"level_restorers = {st.level_restorers}")
    return "\n".join(lines) + "\n"


def load_tile_spec(path=None) -> TileSpec:
    """The shipped default spec, or the file at ``path``."""
    p = Path(path) if path else Path(__file__).parent / "data" / "default.spec"
    return parse_tile_spec(p.read_text(), str(p))
