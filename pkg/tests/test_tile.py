import dataclasses
import math

import pytest

from m3dfpga.tile import (
    BLOCKS,
    ConfigurationError,
    ImplStyle,
    TileSpec,
    TileSpecError,
    assign_tiers,
    build_tile,
    count_config_bits,
    format_netlist,
    format_tile_spec,
    generate_tile,
    insert_mivs,
    load_tile_spec,
    mux_config_bits,
    mux_pass_devices,
    mux_stages,
    parse_tile_spec,
    restorers_needed,
)


def _bits_oracle(n):
    # two-level mux: round(sqrt(n)) groups of ceil(n / groups), one-hot in each level
    g = max(1, round(math.sqrt(n)))
    return n if g == 1 else math.ceil(n / g) + g


@pytest.mark.parametrize("n", range(1, 40))
def test_mux_bits_and_devices(n):
    s1, s2 = mux_stages(n)
    assert s1 * s2 >= n
    assert mux_config_bits(n) == _bits_oracle(n)
    assert mux_pass_devices(n) == (n if s2 == 1 else n + s2)


def test_mux_rejects_empty():
    with pytest.raises(TileSpecError):
        mux_stages(0)


def test_derived_mux_sizes(spec):
    assert spec.cb_mux_size == 23
    assert spec.sb_mux_size == 4
    assert spec.xbar_mux_size == 25
    assert spec.opin_tracks == 15


def test_config_bits_default_spec(tiles, spec):
    for tile in tiles.values():
        bits = count_config_bits(tile)
        assert bits["per_block"]["LUT"] == 640
        assert sum(bits["per_block"].values()) == bits["total"]
        assert 2000 <= bits["total"] <= 5000
        oracle = (spec.n * 2 ** spec.k
                  + spec.n * spec.k * _bits_oracle(spec.xbar_mux_size)
                  + 2 * spec.n * _bits_oracle(2)
                  + spec.n
                  + spec.i * _bits_oracle(spec.cb_mux_size)
                  + spec.w * _bits_oracle(spec.sb_mux_size))
        assert bits["total"] == oracle


def test_restorers(tiles, tech):
    assert tiles["CMOS_2D"].restorers
    assert any(s.block == "RESTORER" for s in tiles["CMOS_2D"].subcircuits)
    assert not tiles["M3D_FULL"].restorers
    assert not any(s.block == "RESTORER" for s in tiles["M3D_FULL"].subcircuits)
    aos = tech.device("aos_n_iwo")
    assert restorers_needed(ImplStyle("M3D_FULL", v_sram_scb=0.8), aos)
    assert not restorers_needed(ImplStyle("M3D_FULL", v_sram_scb=0.7 + aos.vth + 0.01), aos)
    assert restorers_needed(ImplStyle("M3D_FULL", v_sram_scb=2.0, level_restorers="on"), aos)
    assert not restorers_needed(ImplStyle("CMOS_2D", level_restorers="off"), aos)


def test_cmos_all_feol(tiles):
    for s in tiles["CMOS_2D"].subcircuits:
        assert s.tier == "FEOL"
        assert all(d.dev.tier_class == "FEOL" for d in s.devices)
        assert s.miv_count == 0 and not s.rc


def test_full_routing_pass_gates_are_aos(tiles):
    for s in tiles["M3D_FULL"].subcircuits:
        if s.block in ("SB_MUX", "CB_MUX"):
            assert s.tier == "BEOL_PG"
            for d in s.devices:
                if d.role == "pass":
                    assert d.dev.polarity == "n" and d.dev.tier_class == "BEOL"
        elif s.block not in ("SRAM_BIT",):
            assert s.tier == "FEOL"
            assert all(d.dev.tier_class == "FEOL" for d in s.devices)


def _beol_devices(tile):
    return sum(s.device_count() for s in tile.subcircuits
               if s.tier.startswith("BEOL"))


def test_sram_only_moves_cells(tiles):
    total = count_config_bits(tiles["M3D_SRAM_ONLY"])["total"]
    assert _beol_devices(tiles["CMOS_2D"]) == 0
    assert _beol_devices(tiles["M3D_SRAM_ONLY"]) == 6 * total
    assert tiles["M3D_SRAM_ONLY"].device_count() == tiles["CMOS_2D"].device_count()


def test_tier_blocks_known(tiles):
    for tile in tiles.values():
        for s in tile.subcircuits:
            assert s.block in BLOCKS


def test_cmos_mivs_noop(tech, spec):
    t = assign_tiers(build_tile(spec, tech), ImplStyle("CMOS_2D"), tech)
    assert format_netlist(insert_mivs(t, tech)) == format_netlist(t)


def test_mivs_need_tiers(tech, spec):
    with pytest.raises(ConfigurationError):
        insert_mivs(build_tile(spec, tech), tech)


def test_mivs_on_crossings(tiles, tech):
    full = tiles["M3D_FULL"]
    sb = full.sub("sb.mux")
    # BEOL_PG -> FEOL buffer is one crossing
    assert sb.miv_count >= 1
    assert all(r == tech.miv_r and c == tech.miv_c for _, r, c in sb.rc)
    for s in full.subcircuits:
        if s.block == "SRAM_BIT":
            assert s.miv_count >= 4


def test_missing_beol_devices(tech, spec):
    bare = dataclasses.replace(tech, cells={k: v for k, v in tech.cells.items() if k != "aos_6t"})
    t = build_tile(spec, bare)
    with pytest.raises(ConfigurationError):
        assign_tiers(t, ImplStyle("M3D_SRAM_ONLY"), bare)


def test_deterministic(tech, spec):
    st = ImplStyle("M3D_FULL", v_sram_scb=1.2)
    assert format_netlist(generate_tile(spec, tech, st)) == format_netlist(generate_tile(spec, tech, st))


@pytest.mark.parametrize("field,lo,hi", [("k", 4, 6), ("n", 8, 10), ("i", 30, 40), ("w", 100, 150)])
def test_monotone_in_params(tech, field, lo, hi):
    a = generate_tile(TileSpec(**{field: lo}), tech)
    b = generate_tile(TileSpec(**{field: hi}), tech)
    assert b.device_count() > a.device_count()
    assert count_config_bits(b)["total"] > count_config_bits(a)["total"]


@pytest.mark.parametrize("kw", [{"k": 1}, {"n": 0}, {"w": 1}, {"fs": 2}, {"fc_in": 0.0}, {"fc_out": 1.5}])
def test_spec_validation(kw):
    with pytest.raises(TileSpecError):
        TileSpec(**kw)


def test_style_validation():
    with pytest.raises(TileSpecError):
        ImplStyle("FINFET_3D")
    with pytest.raises(TileSpecError):
        ImplStyle(v_sram=0)
    with pytest.raises(TileSpecError):
        ImplStyle(level_restorers="maybe")


def test_spec_round_trip():
    sp = TileSpec(k=5, w=120, fc_in=0.2, style=ImplStyle("M3D_FULL", v_sram_scb=1.1))
    text = format_tile_spec(sp)
    assert parse_tile_spec(text) == sp
    assert format_tile_spec(parse_tile_spec(text)) == text


def test_default_spec_file():
    sp = load_tile_spec()
    assert (sp.k, sp.n, sp.i, sp.w, sp.l, sp.fs) == (6, 10, 40, 150, 8, 3)


@pytest.mark.parametrize("text", [
    "[chip]\nk = 6\n",
    "k = 6\n",
    "[tile]\nq = 1\n",
    "[tile]\nk = six\n",
    "[style]\nvariant = NOPE\n",
    "[style]\ncolor = red\n",
])
def test_spec_parse_errors(text):
    with pytest.raises(TileSpecError):
        parse_tile_spec(text)


def test_sizing_changes_widths_only(tiles):
    t = tiles["CMOS_2D"]
    t2 = t.with_sizing({"sb_pass": 4.0})
    assert t2.device_count() == t.device_count()
    assert t2.sub("sb.mux").devices[0].w(t2.sizing) == pytest.approx(4.0 * t.sub("sb.mux").devices[0].dev.w_min)
