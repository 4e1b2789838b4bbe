"""Discrete transistor sizing and the exported architecture model.

Sizing is coordinate descent over subcircuit classes on a fixed multiplier
grid.  Each step scans every grid value of one class with the others held,
keeps a strict improvement only, and the loop stops after a full pass with
no change.  The objective is footprint x representative CPD.

The ArchModel file is sectioned ``key = value`` text with a version header.
Floats are written with ``%.9e`` so export -> parse -> export is byte-exact.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from .costs import (
    RcTree, t50, _Path, evaluate_tile, sb_switch_model, stage_delays, subcircuit_area, tile_footprint,
)
from .devices import TechnologyLibrary, load_tech
from .tile import SIZING_CLASSES, TileNetlist, TileSpec, ImplStyle

GRID = (1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0)
MAX_PASSES = 20
ARCH_FORMAT_VERSION = 1
FLOAT_FMT = "%.9e"


class SizingNotConverged(RuntimeError):
    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class SizingVector:
    multipliers: dict
    grid: tuple = GRID

    def __post_init__(self):
        for cls, m in self.multipliers.items():
            if m < 1:
                raise ValueError(f"{cls}: multiplier {m} below 1")
            if m not in self.grid:
                raise ValueError(f"{cls}: multiplier {m} not on the grid {self.grid}")


@dataclass
class DescentResult:
    best: dict
    objective: float
    trace: list  # objective after every accepted or rejected class scan
    passes: int


def coordinate_descent(classes, grid, evaluate, start: dict, max_passes: int = MAX_PASSES) -> DescentResult:
    """Generic discrete coordinate descent; ``evaluate(assignment) -> float``."""
    current = dict(start)
    best = evaluate(current)
    trace = [best]
    for npass in range(1, max_passes + 1):
        changed = False
        for cls in classes:
            keep = current[cls]
            choice, choice_val = keep, best
            for g in grid:
                if g == keep:
                    continue
                trial = dict(current)
                trial[cls] = g
                val = evaluate(trial)
                # strict improvement; ties keep the earlier (current) value
                if val < choice_val * (1 - 1e-12):
                    choice, choice_val = g, val
            if choice != keep:
                current[cls] = choice
                best = choice_val
                changed = True
            trace.append(best)
        if not changed:
            return DescentResult(current, best, trace, npass)
    raise SizingNotConverged(f"no convergence within {max_passes} passes",
                             DescentResult(current, best, trace, max_passes))


def _snap(m: float, grid) -> float:
    return min(grid, key=lambda g: (abs(g - m), g))


def sizing_objective(tile: TileNetlist, tech: TechnologyLibrary) -> float:
    fp = tile_footprint(tile, tech).footprint
    return fp * sum(stage_delays(tile, tech, fp).values())


def optimize_sizing(tile: TileNetlist, style: ImplStyle | None = None, tech: TechnologyLibrary | None = None,
                    classes=SIZING_CLASSES, grid=GRID, max_passes: int = MAX_PASSES):
    """Minimise footprint x CPD; returns (SizingVector, TileCostReport)."""
    tech = tech or load_tech()
    if style is not None and tile.style != style:
        tile = dataclasses.replace(tile, style=style)
    if tile.style is None:
        raise ValueError("tile must be tier-assigned before sizing")
    start = {c: _snap(tile.sizing.get(c, 1.0), grid) for c in classes}

    def evaluate(assign):
        return sizing_objective(tile.with_sizing(assign), tech)

    res = coordinate_descent(classes, grid, evaluate, start, max_passes)
    sized = tile.with_sizing(res.best)
    report = evaluate_tile(sized, tech)
    report.descent_trace = res.trace
    return SizingVector(dict(res.best), tuple(grid)), report


# ---------------------------------------------------------------------------
# architecture model


@dataclass
class ArchModel:
    style: dict  # variant, v_dd, v_sram, v_sram_scb
    topology: dict  # k, n, i, w, l, fs, fc_in, fc_out, long_fraction
    blocks: dict  # name -> {delay, area}
    switch: dict  # r_on, c_in, c_out, t_del
    ipin: dict  # t_del, c_in
    opin: dict  # r_drv, t_del
    segment: dict  # l, r_per_tile, c_per_tile
    tile: dict  # footprint, area per tier
    sizing: dict = field(default_factory=dict)

    @property
    def variant(self) -> str:
        return self.style["variant"]


_INT_TOPO = ("k", "n", "i", "w", "l", "fs")


def _cb_model(tile: TileNetlist, tech, footprint: float) -> dict:
    p = _Path(tile, tech, footprint)
    tree = RcTree("in", 0.0, p.cpar("cb.mux", "pass"))
    out = p.mux(tree, "in", "cb")
    return {"t_del": t50(tree, out) + p.buf_intrinsic("cb.buf"), "c_in": p.cpar("cb.mux", "pass")}


def export_arch(tile: TileNetlist, sizing: SizingVector | dict | None, report=None,
                tech: TechnologyLibrary | None = None, long_fraction: float = 0.5) -> ArchModel:
    tech = tech or load_tech()
    if sizing is not None:
        tile = tile.with_sizing(sizing.multipliers if isinstance(sizing, SizingVector) else sizing)
    report = report or evaluate_tile(tile, tech)
    fp = report.footprint
    sd = report.stage_delays
    sp = tile.spec
    st = tile.style
    side = math.sqrt(fp)
    sw = sb_switch_model(tile, tech, fp)
    cb = _cb_model(tile, tech, fp)
    p = _Path(tile, tech, fp)
    m = tech.routing_metal
    tap_c = sp.i * sp.cb_mux_size / sp.w * p.cpar("cb.mux", "pass")
    owner_area = {}
    for s in tile.subcircuits:
        if s.tier == "FEOL":
            owner_area[s.owner] = owner_area.get(s.owner, 0.0) + subcircuit_area(s, tech.area_rules, tile.sizing)
    blocks = {
        "lut": {"delay": sd["lut"], "area": owner_area.get("lut", 0.0) / sp.n},
        "clb_in": {"delay": sd["cb_to_xbar"] + sd["xbar_to_lut"], "area": owner_area.get("cb", 0.0) / sp.i},
        "local": {"delay": sd["lut_to_ble"] + sd["cb_to_xbar"] + sd["xbar_to_lut"],
                  "area": owner_area.get("local_xbar", 0.0) / (sp.n * sp.k)},
        "ble_out": {"delay": sd["lut_to_ble"], "area": owner_area.get("ble", 0.0) / sp.n},
        "ff": {"delay": 2 * p.buf_intrinsic("ble.buf"), "area": tech.ff_area * tech.area_rules.min_width_transistor_area},
    }
    return ArchModel(
        style={"variant": st.variant, "v_dd": st.v_dd, "v_sram": st.v_sram, "v_sram_scb": st.scb},
        topology={"k": sp.k, "n": sp.n, "i": sp.i, "w": sp.w, "l": sp.l, "fs": sp.fs,
                  "fc_in": sp.fc_in, "fc_out": sp.fc_out, "long_fraction": long_fraction},
        blocks=blocks,
        switch=sw,
        ipin=cb,
        opin={"r_drv": p.r_inv("ble.buf", 2), "t_del": sd["lut_to_ble"]},
        segment={"r_per_tile": m.r_per_um * side, "c_per_tile": m.c_per_um * side + tap_c},
        tile={"footprint": fp, **{f"area_{t}": a for t, a in sorted(report.area_per_tier.items())}},
        sizing=dict(tile.sizing),
    )


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, int) and not isinstance(v, bool):
        return str(v)
    return FLOAT_FMT % v


def format_arch(arch: ArchModel) -> str:
    lines = [f"arch-model v{ARCH_FORMAT_VERSION}"]

    def section(name, d):
        lines.append(f"[{name}]")
        for k in sorted(d):
            lines.append(f"{k} = {_fmt(d[k])}")

    section("style", arch.style)
    section("topology", arch.topology)
    for name in sorted(arch.blocks):
        section(f"block {name}", arch.blocks[name])
    section("switch", arch.switch)
    section("ipin", arch.ipin)
    section("opin", arch.opin)
    section("segment", arch.segment)
    section("tile", arch.tile)
    section("sizing", arch.sizing)
    return "\n".join(lines) + "\n"


class ArchFormatError(ValueError):
    pass


def parse_arch(text: str, source: str = "<arch>") -> ArchModel:
    lines = text.splitlines()
    if not lines or lines[0].strip() != f"arch-model v{ARCH_FORMAT_VERSION}":
        raise ArchFormatError(f"{source}:1: expected header 'arch-model v{ARCH_FORMAT_VERSION}'")
    data: dict = {}
    current = None
    for lineno, raw in enumerate(lines[1:], 2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            current = data.setdefault(line[1:-1], {})
            continue
        if current is None or "=" not in line:
            raise ArchFormatError(f"{source}:{lineno}: expected 'key = value' in a section")
        k, v = (x.strip() for x in line.split("=", 1))
        current[k] = v
    try:
        style = dict(data["style"])
        for k in ("v_dd", "v_sram", "v_sram_scb"):
            style[k] = float(style[k])
        topo = {k: (int(v) if k in _INT_TOPO else float(v)) for k, v in data["topology"].items()}
        blocks = {name[6:]: {k: float(v) for k, v in d.items()}
                  for name, d in data.items() if name.startswith("block ")}
        fl = {name: {k: float(v) for k, v in data[name].items()}
              for name in ("switch", "ipin", "opin", "segment", "tile", "sizing")}
    except (KeyError, ValueError) as exc:
        raise ArchFormatError(f"{source}: malformed arch model ({exc})") from None
    arch = ArchModel(style, topo, blocks, fl["switch"], fl["ipin"], fl["opin"], fl["segment"],
                     fl["tile"], fl["sizing"])
    validate_arch(arch)
    return arch


def validate_arch(arch: ArchModel):
    for section in (arch.blocks.values(), [arch.switch, arch.ipin, arch.opin, arch.segment, arch.tile]):
        for d in section:
            for k, v in d.items():
                if not (math.isfinite(v) and v > 0):
                    raise ArchFormatError(f"arch field {k} must be positive and finite, got {v}")


def tile_spec_of(arch: ArchModel) -> TileSpec:
    t = arch.topology
    st = arch.style
    return TileSpec(k=t["k"], n=t["n"], i=t["i"], w=t["w"], l=t["l"], fs=t["fs"],
                    fc_in=t["fc_in"], fc_out=t["fc_out"],
                    style=ImplStyle(st["variant"], st["v_dd"], st["v_sram"], st["v_sram_scb"]))
