import itertools

import numpy as np
import pytest

from m3dfpga.costs import sb_switch_model
from m3dfpga.experiments import preset_style
from m3dfpga.sizing import (
    GRID,
    ArchFormatError,
    SizingNotConverged,
    SizingVector,
    coordinate_descent,
    export_arch,
    format_arch,
    optimize_sizing,
    parse_arch,
    tile_spec_of,
)
from m3dfpga.tile import generate_tile


def test_single_class_toy():
    # area (1 + m) x delay (1 + 4 / m) is smallest at m = 2
    res = coordinate_descent(["x"], GRID, lambda a: (1 + a["x"]) * (1 + 4 / a["x"]), {"x": 1.0})
    assert res.best == {"x": 2.0}
    assert res.objective == pytest.approx(9.0)


def _toy(rng):
    """Separable 2-class objective: either a sum or a product of positive 1-D terms."""
    ca, cb = rng.uniform(0.5, 5, 2), rng.uniform(0.5, 5, 2)
    fa = {g: ca[0] * g + ca[1] / g for g in GRID}
    fb = {g: cb[0] * g + cb[1] / g for g in GRID}
    if rng.random() < 0.5:
        return lambda a: fa[a["x"]] + fb[a["y"]]
    return lambda a: fa[a["x"]] * fb[a["y"]]


def test_two_class_vs_exhaustive():
    rng = np.random.default_rng(11)
    for _ in range(50):
        f = _toy(rng)
        start = {"x": float(rng.choice(GRID)), "y": float(rng.choice(GRID))}
        res = coordinate_descent(["x", "y"], GRID, f, start)
        best = min(f({"x": x, "y": y}) for x, y in itertools.product(GRID, GRID))
        assert res.objective == pytest.approx(best, rel=1e-12)


def test_permutation_invariant():
    rng = np.random.default_rng(3)
    for _ in range(20):
        f = _toy(rng)
        a = coordinate_descent(["x", "y"], GRID, f, {"x": 1.0, "y": 1.0})
        b = coordinate_descent(["y", "x"], GRID, f, {"x": 1.0, "y": 1.0})
        assert a.best == b.best


def test_trace_monotone():
    rng = np.random.default_rng(8)
    f = _toy(rng)
    res = coordinate_descent(["x", "y"], GRID, f, {"x": 8.0, "y": 1.0})
    assert all(b <= a for a, b in zip(res.trace, res.trace[1:]))
    assert res.trace[-1] == res.objective


def test_not_converged():
    with pytest.raises(SizingNotConverged) as info:
        coordinate_descent(["x"], GRID, lambda a: (a["x"] - 3) ** 2, {"x": 1.0}, max_passes=1)
    assert info.value.best.best == {"x": 3.0}


def test_sizing_vector_validation():
    SizingVector({"sb_pass": 2.0})
    with pytest.raises(ValueError):
        SizingVector({"sb_pass": 0.5})
    with pytest.raises(ValueError):
        SizingVector({"sb_pass": 2.5})


def test_tile_sizing_improves(tech, spec):
    tile = generate_tile(spec, tech, preset_style("CMOS_2D"))
    vec, rep = optimize_sizing(tile, tech=tech)
    trace = rep.descent_trace
    assert trace[-1] <= trace[0]
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    assert set(vec.multipliers.values()) <= set(GRID)


def test_aos_pass_gate_not_narrower(archs):
    assert archs["M3D_FULL"].sizing["sb_pass"] >= archs["CMOS_2D"].sizing["sb_pass"]
    assert archs["M3D_FULL"].sizing["cb_pass"] >= archs["CMOS_2D"].sizing["cb_pass"]


def test_arch_round_trip(archs):
    for arch in archs.values():
        text = format_arch(arch)
        assert format_arch(parse_arch(text)) == text


def test_same_topology(archs):
    a, b = archs["CMOS_2D"].topology, archs["M3D_FULL"].topology
    assert a == b


def test_switch_matches_model(archs, tech, spec):
    arch = archs["M3D_FULL"]
    tile = generate_tile(spec, tech, preset_style("M3D_FULL")).with_sizing(arch.sizing)
    sw = sb_switch_model(tile, tech, arch.tile["footprint"])
    for k in ("t_del", "r_on", "c_in", "c_out"):
        assert arch.switch[k] == pytest.approx(sw[k], rel=1e-12)


def test_fields_positive(archs):
    for arch in archs.values():
        for d in [arch.switch, arch.ipin, arch.opin, arch.segment, arch.tile, *arch.blocks.values()]:
            assert all(v > 0 for v in d.values())


def test_tile_spec_of(archs, spec):
    sp = tile_spec_of(archs["M3D_FULL"])
    assert (sp.k, sp.n, sp.i, sp.w, sp.l, sp.fs) == (spec.k, spec.n, spec.i, spec.w, spec.l, spec.fs)
    assert sp.style.scb == 1.2


def test_unsized_export(tech, spec):
    tile = generate_tile(spec, tech, preset_style("CMOS_2D"))
    arch = export_arch(tile, None, tech=tech)
    assert arch.sizing == tile.sizing


def test_parse_errors(archs):
    text = format_arch(archs["CMOS_2D"])
    with pytest.raises(ArchFormatError):
        parse_arch("arch-model v9\n" + text.split("\n", 1)[1])
    with pytest.raises(ArchFormatError):
        parse_arch(text.replace("[switch]", "[switchy]"))
    with pytest.raises(ArchFormatError):
        parse_arch(text + "orphan\n")
    bad = text.replace("[switch]\nc_in = ", "[switch]\nc_in = -")
    with pytest.raises(ArchFormatError):
        parse_arch(bad)
