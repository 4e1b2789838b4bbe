"""Command-line entry point.

Exit codes: 0 success, 2 validation error, 3 unroutable, 4 numerical failure.

Output goes to ``--out`` when given, otherwise to ``<out-dir>/<default name>``
when ``--out-dir`` is given, otherwise to stdout.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .costs import dut_sweep, evaluate_tile
from .devices import load_tech
from .pnr import UnroutableError, design_metrics, parse_blif, run_flow
from .pnr.flow import congestion_csv, metrics_csv, metrics_rows
from .sizing import SizingNotConverged, export_arch, format_arch, optimize_sizing, parse_arch
from .sram import NumericalError, cell_from_tech
from .tile import VARIANTS, count_config_bits, format_netlist, generate_tile, load_tile_spec

EXIT_OK, EXIT_VALIDATION, EXIT_UNROUTABLE, EXIT_NUMERICAL = 0, 2, 3, 4

log = logging.getLogger("m3dfpga")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _write(args, text: str, default_name: str, out: str | None = None):
    out = out or getattr(args, "out", None)
    if out:
        path = Path(out)
    elif args.out_dir:
        path = Path(args.out_dir) / default_name
    else:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    log.info("wrote %s", path)


def _tech(args):
    return load_tech(args.tech)


def _spec(args, variant: str | None = None):
    """Spec file with the variant overridden by --style.

    The override also takes the variant's preset routing-gate rail unless
    the spec file sets ``v_sram_scb`` itself.
    """
    spec = load_tile_spec(args.spec)
    variant = variant or getattr(args, "style", None)
    if variant and variant != spec.style.variant:
        scb = spec.style.v_sram_scb
        if scb is None:
            scb = ex.preset_style(variant).v_sram_scb
        style = dataclasses.replace(spec.style, variant=variant, v_sram_scb=scb)
        spec = dataclasses.replace(spec, style=style)
    return spec


def _linspace(lo: float, hi: float, steps: int):
    if steps < 1:
        raise ValueError("--steps must be >= 1")
    return [float(v) for v in np.linspace(lo, hi, steps)]


# ---------------------------------------------------------------------------
# subcommands


def cmd_analyze_sram(args):
    cell = cell_from_tech(_tech(args), args.cell)
    text = ex.analyze_sram_csv(cell, _linspace(args.vmin, args.vmax, args.steps))
    _write(args, text, f"sram_{args.cell}.csv")


def cmd_build_tile(args):
    tech = _tech(args)
    spec = _spec(args)
    tile = generate_tile(spec, tech)
    _write(args, format_netlist(tile), f"tile_{spec.style.variant}.net")
    bits = count_config_bits(tile)
    log.info("config bits: %s", bits)


def cmd_tile_report(args):
    tech = _tech(args)
    spec = _spec(args)
    rep = evaluate_tile(generate_tile(spec, tech), tech)
    _write(args, ex.tile_report_csv(rep), f"tile_report_{spec.style.variant}.csv")


def cmd_sweep(args):
    tech = _tech(args)
    spec = _spec(args)
    values = _linspace(args.from_, args.to, args.steps)
    if args.param != "fc_in":
        values = [int(round(v)) for v in values]
    rows = dut_sweep(args.dut, spec.style, tech, values, args.param)
    text = ex._csv((args.param, "power_w"), [(v, ex._f(p)) for v, p in rows])
    _write(args, text, f"sweep_{args.dut}_{spec.style.variant}.csv")


def cmd_size(args):
    tech = _tech(args)
    spec = _spec(args)
    tile = generate_tile(spec, tech)
    vec, rep = optimize_sizing(tile, tech=tech)
    arch = export_arch(tile, vec, rep, tech=tech)
    _write(args, format_arch(arch), f"{spec.style.variant}.arch")


def _read_arch(path):
    return parse_arch(Path(path).read_text(), str(path))


def cmd_pnr(args):
    arch = _read_arch(args.arch)
    rows = []
    last = None
    for blif in args.blif:
        nl = parse_blif(Path(blif).read_text(), str(blif))
        last = design_metrics(run_flow(nl, arch, seed=1 if args.seed is None else args.seed))
        rows += metrics_rows(Path(blif).stem, arch.variant, last)
    _write(args, metrics_csv(rows), "metrics.csv")
    if args.congestion_map and last is not None:
        _write(args, congestion_csv(last), "congestion.csv", out=args.congestion_map)


def _compare(args):
    tech = _tech(args)
    spec = load_tile_spec(args.spec)
    archs = []
    for path, variant in ((args.arch_a, args.variant_a), (args.arch_b, args.variant_b)):
        archs.append(_read_arch(path) if path else ex.build_arch(variant, spec, tech))
    corpus = ex.load_corpus(args.blif or None)
    seeds = tuple(args.seeds) if args.seeds else (args.seed,) if args.seed is not None else ex.DEFAULT_SEEDS
    rep = ex.compare_architectures(corpus, archs[0], archs[1], seeds, args.jobs)
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return rep


def cmd_compare(args):
    rep = _compare(args)
    _write(args, ex.comparison_csv(rep), "compare.csv")
    if args.occupancy:
        _write(args, ex.figure_9a_csv(rep), "occupancy.csv", out=args.occupancy)


def cmd_retarget(args):
    if args.compare_csv:
        area_scale, delay_scale = _scales_from_csv(args.compare_csv)
    else:
        area_scale, delay_scale = args.area_scale, args.delay_scale
    inp = ex.RetargetInput(args.base_area, args.base_delay, area_scale, delay_scale)
    _write(args, ex.retarget_csv(inp, ex.retarget_estimate(inp)), "retarget.csv")


def _scales_from_csv(path):
    import csv

    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if row["benchmark"] == "geomean":
                return 1.0 + float(row["delta_a_tot"]), 1.0 + float(row["delta_cpd"])
    raise ValueError(f"{path}: no geomean row")


def cmd_reproduce_figure(args):
    tech = _tech(args)
    spec = load_tile_spec(args.spec)
    seeds = (args.seed,) if args.seed is not None else ex.DEFAULT_SEEDS
    text = ex.reproduce_figure(args.figure, tech, spec, seeds=seeds, n_jobs=args.jobs)
    _write(args, text, f"fig{args.figure}.csv")


# ---------------------------------------------------------------------------


def _global_args(p, defaults: bool):
    def d(v):
        return v if defaults else argparse.SUPPRESS

    g = p.add_argument_group("global options")
    g.add_argument("--tech", default=d(None), help="technology library file (default: shipped 7 nm library)")
    g.add_argument("--spec", default=d(None), help="tile spec file (default: shipped default.spec)")
    g.add_argument("--seed", type=int, default=d(None), help="placement seed")
    g.add_argument("--jobs", type=int, default=d(1), help="parallel P&R jobs")
    g.add_argument("--out-dir", default=d(None), help="directory for outputs when --out is not given")
    g.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="m3dfpga", description="Monolithic-3D FPGA tile modeling and evaluation.")
    _global_args(p, defaults=True)
    # repeated on every subcommand so the flags work on either side of it
    common = argparse.ArgumentParser(add_help=False)
    _global_args(common, defaults=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.set_defaults(func=fn)
        return sp

    sp = add("analyze-sram", cmd_analyze_sram, "SRAM static power, hold SNM and write delay vs v_sram")
    sp.add_argument("--cell", default="aos_6t")
    sp.add_argument("--vmin", type=float, default=0.6)
    sp.add_argument("--vmax", type=float, default=1.2)
    sp.add_argument("--steps", type=int, default=7)
    sp.add_argument("--out")

    sp = add("build-tile", cmd_build_tile, "generate a tile netlist")
    sp.add_argument("--style", choices=VARIANTS)
    sp.add_argument("--out")

    sp = add("tile-report", cmd_tile_report, "area, delay and power report of a tile")
    sp.add_argument("--style", choices=VARIANTS)
    sp.add_argument("--out")

    sp = add("sweep", cmd_sweep, "SB/CB DUT power sweep")
    sp.add_argument("--dut", choices=("sb", "cb"), required=True)
    sp.add_argument("--param", choices=("mux_size", "w", "fc_in"),
                    help="swept parameter: sb sweeps mux_size; cb sweeps w (default), fc_in or mux_size")
    sp.add_argument("--from", dest="from_", type=float)
    sp.add_argument("--to", type=float)
    sp.add_argument("--steps", type=int, default=5)
    sp.add_argument("--style", choices=VARIANTS)
    sp.add_argument("--out")

    sp = add("size", cmd_size, "size a tile and export the architecture model")
    sp.add_argument("--style", choices=VARIANTS)
    sp.add_argument("--out")

    sp = add("pnr", cmd_pnr, "pack, place, route and time BLIF circuits")
    sp.add_argument("--arch", required=True)
    sp.add_argument("--blif", nargs="+", required=True)
    sp.add_argument("--congestion-map")
    sp.add_argument("--out")

    sp = add("compare", cmd_compare, "compare two architectures over a corpus")
    sp.add_argument("--arch-a")
    sp.add_argument("--arch-b")
    sp.add_argument("--variant-a", choices=VARIANTS, default="CMOS_2D")
    sp.add_argument("--variant-b", choices=VARIANTS, default="M3D_FULL")
    sp.add_argument("--blif", nargs="*", help="BLIF files or directories (default: shipped corpus)")
    sp.add_argument("--seeds", type=int, nargs="+")
    sp.add_argument("--occupancy", help="also write the occupancy table here")
    sp.add_argument("--out")

    sp = add("retarget", cmd_retarget, "scale a reference implementation by architecture ratios")
    sp.add_argument("--base-area", type=float, required=True, help="mm^2")
    sp.add_argument("--base-delay", type=float, required=True, help="ns")
    sp.add_argument("--area-scale", type=float)
    sp.add_argument("--delay-scale", type=float)
    sp.add_argument("--compare-csv", help="take the scales from a compare output")
    sp.add_argument("--out")

    sp = add("reproduce-figure", cmd_reproduce_figure, "emit the CSV data of a figure preset")
    sp.add_argument("figure", choices=ex.FIGURES)
    sp.add_argument("--out")
    return p


def _validate(args):
    if args.jobs < 1:
        raise ValueError("--jobs must be >= 1")
    if args.command == "sweep":
        args.param = args.param or ("mux_size" if args.dut == "sb" else "w")
        lo, hi = {"mux_size": (4, 12), "w": (50, 250), "fc_in": (0.05, 0.25)}[args.param]
        args.from_ = lo if args.from_ is None else args.from_
        args.to = hi if args.to is None else args.to
    if args.command == "retarget" and not args.compare_csv:
        if args.area_scale is None or args.delay_scale is None:
            raise ValueError("retarget needs --area-scale and --delay-scale or --compare-csv")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        _validate(args)
        args.func(args)
    except UnroutableError as exc:
        print(f"error: unroutable: {exc}", file=sys.stderr)
        return EXIT_UNROUTABLE
    except (NumericalError, ArithmeticError, SizingNotConverged) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
