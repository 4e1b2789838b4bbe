"""End-to-end experiments: architecture comparison, retargeting and figure presets.

Every preset writes plain CSV.  Floats are formatted with ``%.9e`` so an
emitted table parsed back and re-emitted is byte-identical.

Figure presets (columns):

* ``3c``  v_sram, aos_power_w, cmos_power_w             (config bit static power)
* ``3d``  v_sram, cmos_cpd_s, m3d_cpd_s                 (tile CPD; M3D sweeps v_sram_scb)
* ``5a``  variant, block, share, footprint_um2          (FEOL block shares)
* ``5b``  param, value, variant, footprint_um2          (footprint vs K, N, W)
* ``6b``  dut, param, value, cmos_power_w, m3d_power_w  (SB/CB DUT power)
* ``8``   comparison report rows, see ``COMPARE_COLUMNS``
* ``9a``  benchmark, variant, seg_len, seg_used, fraction
"""
from __future__ import annotations

import csv
import dataclasses
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .costs import dut_sweep, evaluate_tile
from .devices import TechnologyLibrary, load_tech
from .pnr import LogicNetlist, UnroutableError, design_metrics, parse_blif, run_flow
from .sizing import ArchModel, export_arch, optimize_sizing
from .sram import NumericalError, cell_from_tech, sram_static_power
from .tile import ImplStyle, TileSpec, generate_tile

log = logging.getLogger(__name__)

FIGURES = ("3c", "3d", "5a", "5b", "6b", "8", "9a")
DEFAULT_SEEDS = (1, 2, 3)
# operating points pinned by the presets
V_DD, V_SRAM, V_SRAM_SCB = 0.7, 0.8, 1.2
BENCHMARK_DIR = Path(__file__).parent / "data" / "benchmarks"


class ExperimentError(ValueError):
    pass


def _f(x: float) -> str:
    return "%.9e" % x


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def preset_style(variant: str) -> ImplStyle:
    """The operating point used for each variant in comparisons and figures."""
    scb = V_SRAM_SCB if variant == "M3D_FULL" else None
    return ImplStyle(variant, v_dd=V_DD, v_sram=V_SRAM, v_sram_scb=scb)


def build_arch(variant: str, spec: TileSpec | None = None, tech: TechnologyLibrary | None = None,
               style: ImplStyle | None = None, sized: bool = True) -> ArchModel:
    """Generate, optionally size, and export the architecture model of a variant."""
    tech = tech or load_tech()
    spec = spec or TileSpec()
    style = style or preset_style(variant)
    tile = generate_tile(dataclasses.replace(spec, style=style), tech, style)
    if not sized:
        return export_arch(tile, None, tech=tech)
    vec, report = optimize_sizing(tile, tech=tech)
    return export_arch(tile, vec, report, tech=tech)


# ---------------------------------------------------------------------------
# architecture comparison


def load_corpus(paths=None) -> dict:
    """name -> LogicNetlist for BLIF files (default: the shipped corpus)."""
    if paths is None:
        paths = sorted(BENCHMARK_DIR.glob("*.blif"))
    out = {}
    for p in paths:
        p = Path(p)
        if p.is_dir():
            out.update(load_corpus(sorted(p.glob("*.blif"))))
        else:
            out[p.stem] = parse_blif(p.read_text(), str(p))
    if not out:
        raise ExperimentError("no benchmarks found")
    return out


def _run_job(job):
    name, variant, seed, nl, arch = job
    try:
        return (name, variant, seed), design_metrics(run_flow(nl, arch, seed=seed))
    except UnroutableError as exc:
        return (name, variant, seed), exc


def run_jobs(jobs, n_jobs: int = 1) -> dict:
    """Run (name, variant, seed, netlist, arch) flows; results keyed by the first three."""
    if n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    return dict(results)


def _geomean(values) -> float:
    vals = [v for v in values if v > 0]
    if not vals:
        return float("nan")
    return math.exp(sum(math.log(v) for v in vals) / len(vals))


@dataclass
class ComparisonRow:
    benchmark: str
    ok: bool
    cpd_a: float = 0.0
    cpd_b: float = 0.0
    a_tot_a: float = 0.0
    a_tot_b: float = 0.0
    at2_a: float = 0.0
    at2_b: float = 0.0
    delta_cpd: float = 0.0
    delta_area: float = 0.0
    delta_at2: float = 0.0
    note: str = ""


@dataclass
class ComparisonReport:
    variant_a: str
    variant_b: str
    seeds: tuple
    rows: list
    geomean_delta_cpd: float = 0.0
    geomean_delta_area: float = 0.0
    geomean_delta_at2: float = 0.0
    warnings: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)  # (benchmark, variant, seed) -> DesignMetrics

    def ok_rows(self) -> list:
        return [r for r in self.rows if r.ok]


def at2_delta(delta_area: float, delta_cpd: float) -> float:
    return (1.0 + delta_area) * (1.0 + delta_cpd) ** 2 - 1.0


def compare_architectures(corpus: dict, arch_a: ArchModel, arch_b: ArchModel, seeds=DEFAULT_SEEDS,
                          n_jobs: int = 1) -> ComparisonReport:
    """Full flow per (benchmark, variant, seed); deltas are b relative to a.

    A benchmark's CPD for a variant is the geometric mean over the seeds
    (A_TOT does not depend on the seed).  Rows with an unroutable run are
    marked failed and left out of the geometric means.
    """
    if not corpus:
        raise ExperimentError("empty corpus")
    seeds = tuple(seeds)
    if not seeds:
        raise ExperimentError("at least one seed is required")
    archs = {"a": arch_a, "b": arch_b}
    jobs = [(name, v, s, corpus[name], archs[v]) for name in sorted(corpus) for v in ("a", "b") for s in seeds]
    results = run_jobs(jobs, n_jobs)
    rows, warnings, metrics = [], [], {}
    for name in sorted(corpus):
        per = {v: [results[(name, v, s)] for s in seeds] for v in ("a", "b")}
        failed = [f"{v}/seed {s}" for v in ("a", "b") for s, m in zip(seeds, per[v]) if isinstance(m, Exception)]
        if failed:
            msg = f"{name}: unroutable ({', '.join(failed)}); excluded from the geometric mean"
            log.warning(msg)
            warnings.append(msg)
            rows.append(ComparisonRow(name, False, note="unroutable"))
            continue
        for v in ("a", "b"):
            for s, m in zip(seeds, per[v]):
                metrics[(name, v, s)] = m
        cpd = {v: _geomean([m.cpd for m in per[v]]) for v in per}
        area = {v: per[v][0].a_tot for v in per}
        d_t = cpd["b"] / cpd["a"] - 1.0
        d_a = area["b"] / area["a"] - 1.0
        rows.append(ComparisonRow(name, True, cpd["a"], cpd["b"], area["a"], area["b"],
                                  area["a"] * cpd["a"] ** 2, area["b"] * cpd["b"] ** 2,
                                  d_t, d_a, at2_delta(d_a, d_t)))
    rep = ComparisonReport(arch_a.variant, arch_b.variant, seeds, rows, warnings=warnings, metrics=metrics)
    ok = rep.ok_rows()
    if ok:
        rep.geomean_delta_cpd = _geomean([r.cpd_b / r.cpd_a for r in ok]) - 1.0
        rep.geomean_delta_area = _geomean([r.a_tot_b / r.a_tot_a for r in ok]) - 1.0
        rep.geomean_delta_at2 = at2_delta(rep.geomean_delta_area, rep.geomean_delta_cpd)
    return rep


COMPARE_COLUMNS = ("benchmark", "status", "variant_a", "variant_b", "cpd_a_s", "cpd_b_s", "a_tot_a_um2",
                   "a_tot_b_um2", "at2_a", "at2_b", "delta_cpd", "delta_a_tot", "delta_at2")


def comparison_csv(rep: ComparisonReport) -> str:
    rows = []
    for r in rep.rows:
        if not r.ok:
            rows.append((r.benchmark, "failed", rep.variant_a, rep.variant_b) + ("",) * 9)
            continue
        rows.append((r.benchmark, "ok", rep.variant_a, rep.variant_b, _f(r.cpd_a), _f(r.cpd_b), _f(r.a_tot_a),
                     _f(r.a_tot_b), _f(r.at2_a), _f(r.at2_b), _f(r.delta_cpd), _f(r.delta_area),
                     _f(r.delta_at2)))
    rows.append(("geomean", "ok", rep.variant_a, rep.variant_b, "", "", "", "", "", "",
                 _f(rep.geomean_delta_cpd), _f(rep.geomean_delta_area), _f(rep.geomean_delta_at2)))
    return _csv(COMPARE_COLUMNS, rows)


def occupancy_rows(rep: ComparisonReport) -> list:
    """(benchmark, variant, seg_len, seg_used, fraction) summed over seeds."""
    out = []
    for r in rep.ok_rows():
        for v, variant in (("a", rep.variant_a), ("b", rep.variant_b)):
            hist: dict = {}
            for s in rep.seeds:
                for L, n in rep.metrics[(r.benchmark, v, s)].occupancy.items():
                    hist[L] = hist.get(L, 0) + n
            total = sum(hist.values())
            for L in sorted(hist):
                out.append((r.benchmark, variant, L, hist[L], hist[L] / total if total else 0.0))
    return out


def long_fraction_by_benchmark(rep: ComparisonReport) -> dict:
    """benchmark -> (fraction on the longest segments for a, for b)."""
    out: dict = {}
    for bench, variant, L, n, frac in occupancy_rows(rep):
        out.setdefault(bench, {}).setdefault(variant, {})[L] = frac
    res = {}
    for bench, per in out.items():
        fr = []
        for variant in (rep.variant_a, rep.variant_b):
            hist = per.get(variant, {})
            L = max(hist) if hist else 0
            fr.append(hist[L] if L > 1 else 0.0)
        res[bench] = tuple(fr)
    return res


# ---------------------------------------------------------------------------
# retargeting


@dataclass(frozen=True)
class RetargetInput:
    base_area: float  # mm^2
    base_delay: float  # ns
    area_scale: float
    delay_scale: float

    def __post_init__(self):
        for name in ("base_area", "base_delay", "area_scale", "delay_scale"):
            if not getattr(self, name) > 0:
                raise ExperimentError(f"{name} must be > 0")


def retarget_estimate(inp: RetargetInput) -> dict:
    area = inp.base_area * inp.area_scale
    delay = inp.base_delay * inp.delay_scale
    at2 = area * delay ** 2
    base_at2 = inp.base_area * inp.base_delay ** 2
    return {"area": area, "delay": delay, "at2": at2,
            "deltas": {"area": inp.area_scale - 1.0, "delay": inp.delay_scale - 1.0,
                       "at2": at2 / base_at2 - 1.0}}


def scales_from_report(rep: ComparisonReport) -> tuple:
    """(area_scale, delay_scale) from a comparison's geometric means."""
    return 1.0 + rep.geomean_delta_area, 1.0 + rep.geomean_delta_cpd


def retarget_csv(inp: RetargetInput, out: dict) -> str:
    return _csv(("quantity", "base", "scale", "estimate", "delta"), [
        ("area_mm2", _f(inp.base_area), _f(inp.area_scale), _f(out["area"]), _f(out["deltas"]["area"])),
        ("delay_ns", _f(inp.base_delay), _f(inp.delay_scale), _f(out["delay"]), _f(out["deltas"]["delay"])),
        ("at2_mm2ns2", _f(inp.base_area * inp.base_delay ** 2), "", _f(out["at2"]), _f(out["deltas"]["at2"])),
    ])


# ---------------------------------------------------------------------------
# figure presets

SRAM_SWEEP = tuple(np.round(np.linspace(0.6, 1.2, 7), 6))
SCB_SWEEP = (0.8, 0.9, 1.0, 1.1, 1.2)
FOOTPRINT_SWEEP = {"k": (4, 5, 6, 7), "n": (4, 6, 8, 10, 12), "w": (50, 100, 150, 200, 250)}


def _tile_report(spec: TileSpec, style: ImplStyle, tech):
    return evaluate_tile(generate_tile(dataclasses.replace(spec, style=style), tech, style), tech)


def figure_3c(tech, spec) -> str:
    aos = cell_from_tech(tech, "aos_6t")
    si = cell_from_tech(tech, "si_6t")
    rows = [(_f(v), _f(sram_static_power(aos, v)), _f(sram_static_power(si, v))) for v in SRAM_SWEEP]
    return _csv(("v_sram", "aos_power_w", "cmos_power_w"), rows)


def figure_3d(tech, spec) -> str:
    rows = []
    for v in SCB_SWEEP:
        cm = _tile_report(spec, ImplStyle("CMOS_2D", v_dd=V_DD, v_sram=v), tech)
        m3 = _tile_report(spec, ImplStyle("M3D_FULL", v_dd=V_DD, v_sram=V_SRAM, v_sram_scb=v), tech)
        rows.append((_f(v), _f(cm.cpd), _f(m3.cpd)))
    return _csv(("v_sram", "cmos_cpd_s", "m3d_cpd_s"), rows)


def figure_5a(tech, spec) -> str:
    rows = []
    for variant in ("CMOS_2D", "M3D_SRAM_ONLY", "M3D_FULL"):
        rep = _tile_report(spec, preset_style(variant), tech)
        for block, share in rep.block_area_shares.items():
            rows.append((variant, block, _f(share), _f(rep.footprint)))
    return _csv(("variant", "block", "share", "footprint_um2"), rows)


def figure_5b(tech, spec) -> str:
    rows = []
    for param, values in FOOTPRINT_SWEEP.items():
        for value in values:
            sp = dataclasses.replace(spec, **{param: value})
            for variant in ("CMOS_2D", "M3D_FULL"):
                rows.append((param, value, variant, _f(_tile_report(sp, preset_style(variant), tech).footprint)))
    return _csv(("param", "value", "variant", "footprint_um2"), rows)


def figure_6b(tech, spec) -> str:
    rows = []
    for kind, param in (("sb", "mux_size"), ("cb", "w")):
        cm = dut_sweep(kind, preset_style("CMOS_2D"), tech)
        m3 = dut_sweep(kind, preset_style("M3D_FULL"), tech)
        for (v, pc), (_, pm) in zip(cm, m3):
            rows.append((kind, param, v, _f(pc), _f(pm)))
    return _csv(("dut", "param", "value", "cmos_power_w", "m3d_power_w"), rows)


def _comparison(tech, spec, corpus=None, seeds=DEFAULT_SEEDS, n_jobs=1) -> ComparisonReport:
    corpus = corpus if corpus is not None else load_corpus()
    a = build_arch("CMOS_2D", spec, tech)
    b = build_arch("M3D_FULL", spec, tech)
    return compare_architectures(corpus, a, b, seeds, n_jobs)


def figure_9a_csv(rep: ComparisonReport) -> str:
    rows = [(b, v, L, n, _f(f)) for b, v, L, n, f in occupancy_rows(rep)]
    return _csv(("benchmark", "variant", "seg_len", "seg_used", "fraction"), rows)


def reproduce_figure(fig: str, tech: TechnologyLibrary | None = None, spec: TileSpec | None = None,
                     corpus=None, seeds=DEFAULT_SEEDS, n_jobs: int = 1) -> str:
    """CSV text of one figure preset."""
    fig = str(fig).lower()
    if fig not in FIGURES:
        raise ExperimentError(f"unknown figure {fig!r}; expected one of {', '.join(FIGURES)}")
    tech = tech or load_tech()
    spec = spec or TileSpec()
    if fig in ("8", "9a"):
        rep = _comparison(tech, spec, corpus, seeds, n_jobs)
        return comparison_csv(rep) if fig == "8" else figure_9a_csv(rep)
    return {"3c": figure_3c, "3d": figure_3d, "5a": figure_5a, "5b": figure_5b, "6b": figure_6b}[fig](tech, spec)


def analyze_sram_csv(cell, v_values, v_wl: float | None = None, v_bl: float | None = None) -> str:
    """v_sram, static_power_w, hsnm_v, write_delay_s; ``nan`` where a write cannot complete.

    Word line and bit line follow the cell rail unless pinned.
    """
    from .sram import hold_snm, write_delay

    rows = []
    for v in v_values:
        try:
            wd = _f(write_delay(cell, v if v_wl is None else v_wl, v if v_bl is None else v_bl, v_sram=v))
        except NumericalError:
            wd = "nan"
        rows.append((_f(v), _f(sram_static_power(cell, v)), _f(hold_snm(cell, v)), wd))
    return _csv(("v_sram", "static_power_w", "hsnm_v", "write_delay_s"), rows)


def tile_report_csv(report) -> str:
    rows = [("variant", report.variant), ("footprint_um2", _f(report.footprint)), ("cpd_s", _f(report.cpd)),
            ("static_power_w", _f(report.static_power)),
            ("config_static_share", _f(report.config_static_share))]
    rows += [(f"area_{t}_um2", _f(a)) for t, a in sorted(report.area_per_tier.items())]
    rows += [(f"share_{b}", _f(s)) for b, s in report.block_area_shares.items()]
    rows += [(f"stage_{k}_s", _f(d)) for k, d in report.stage_delays.items()]
    return _csv(("field", "value"), rows)
