"""Time the placement and routing kernels on both back ends.

    python3 benchmarks/bench_kernels.py [circuit] [--repeat N]

Runs SA placement and PathFinder routing of one shipped circuit with the
pure-Python and the compiled kernels, checks that both give identical
results and prints the wall-clock times and the speed-up.
"""
from __future__ import annotations

import argparse
import time
from pathlib import Path

import numpy as np

from m3dfpga import kernels
from m3dfpga.experiments import BENCHMARK_DIR, build_arch
from m3dfpga.pnr import parse_blif, route_pathfinder
from m3dfpga.pnr.flow import run_flow
from m3dfpga.pnr.place import place_sa


def _timed(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("circuit", nargs="?", default="huffman_fsm")
    ap.add_argument("--repeat", type=int, default=1)
    args = ap.parse_args(argv)

    nl = parse_blif((BENCHMARK_DIR / f"{args.circuit}.blif").read_text(), args.circuit)
    arch = build_arch("CMOS_2D", sized=False)
    design = run_flow(nl, arch, seed=1)
    pl = design.placement
    nets = [[d, *s] for d, s in design.net_blocks.values() if s]

    backends = ["python"]
    try:
        kernels.use_backend("cython")
        backends.append("cython")
    except ImportError:
        print("compiled kernels not built; timing the Python back end only")

    results = {}
    for name in backends:
        kernels.use_backend(name)
        t_place, p = _timed(lambda: place_sa(design.block_types, nets, pl.grid, seed=1), args.repeat)
        t_route, r = _timed(lambda: route_pathfinder(design.rr, design.requests), args.repeat)
        results[name] = (t_place, t_route, p, r)
        print(f"{name:7s} place {t_place:8.3f} s   route {t_route:8.3f} s")

    if len(results) == 2:
        (tp0, tr0, p0, r0), (tp1, tr1, p1, r1) = results["python"], results["cython"]
        same = p0.locs == p1.locs and r0.trees == r1.trees and np.array_equal(r0.occ, r1.occ)
        print(f"speed-up place {tp0 / tp1:6.1f}x   route {tr0 / tr1:6.1f}x   identical results: {same}")
        return 0 if same else 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
