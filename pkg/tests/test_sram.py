import dataclasses
import math

import numpy as np
import pytest

from m3dfpga.devices import AreaRules, DeviceParams, DomainError, drain_current, effective_resistance
from m3dfpga.sram import (
    WRITE_FEEDBACK_FACTOR, NumericalError, SramCellSpec, UnwritableError, bitcell_area, butterfly_lobes,
    cell_from_tech, cell_vtc, hold_snm, inverter_vtc, sram_static_power, storage_node_capacitance,
    switching_threshold, write_delay,
)


@pytest.fixture(scope="module")
def si(tech):
    return cell_from_tech(tech, "si_6t")


@pytest.fixture(scope="module")
def aos(tech):
    return cell_from_tech(tech, "aos_6t")


def _enumerate_static(cell, v, bit):
    """Hold state by hand: each device's terminals, then sum |I * Vds|."""
    q = v if bit else 0.0
    qb = v - q
    total = 0.0
    for node, other in ((q, qb), (qb, q)):
        # pull-up: gate = other node, source = v, drain = node
        total += abs(drain_current(cell.pu_dev, other - v, node - v, cell.w_pu) * (node - v))
        # pull-down: gate = other node, source = 0, drain = node
        total += abs(drain_current(cell.pd_dev, other, node, cell.w_pd) * node)
        # access: word line low, bit line precharged to v, storage node on the other side
        total += abs(drain_current(cell.pg_dev, 0.0 - node, v - node, cell.w_pg) * (v - node))
    return total


@pytest.mark.parametrize("name", ["si_6t", "aos_6t"])
@pytest.mark.parametrize("v", [0.6, 0.8, 1.0, 1.2])
def test_static_power_enumeration_oracle(tech, name, v):
    cell = cell_from_tech(tech, name)
    for bit in (0, 1):
        assert sram_static_power(cell, v, bit) == pytest.approx(_enumerate_static(cell, v, bit), rel=1e-12)
    assert sram_static_power(cell, v, 0) == pytest.approx(sram_static_power(cell, v, 1), rel=1e-12)


def test_static_power_monotone_in_rail(si, aos):
    for cell in (si, aos):
        p = [sram_static_power(cell, v) for v in np.linspace(0.5, 1.2, 8)]
        assert all(b > a for a, b in zip(p, p[1:]))


def test_static_power_zero_leakage():
    n = DeviceParams("n0", "n", 2.0, 2.0, 1e-4, 3.0, 1.0, 0.0, 1e-15, 1e-15, 0.05, "BEOL")
    p = DeviceParams("p0", "p", -2.0, 2.0, 1e-4, 3.0, 1.0, 0.0, 1e-15, 1e-15, 0.05, "BEOL")
    cell = SramCellSpec(p, n, n, 0.05, 0.05, 0.05)
    assert sram_static_power(cell, 0.8) == 0.0


def test_static_power_domain(si):
    with pytest.raises(DomainError):
        sram_static_power(si, 0.0)


def test_aos_static_power_reduction(si, aos):
    red = 1 - sram_static_power(aos, 0.8) / sram_static_power(si, 0.8)
    assert abs(red - 0.601) <= 0.10


def _symmetric_pair(tech):
    n = tech.device("si_n")
    return (n.mirrored("p_sym"), 0.1), (n, 0.1)


def test_vtc_symmetric_pair_midpoint(tech):
    pu, pd = _symmetric_pair(tech)
    vtc = inverter_vtc(pu, pd, 0.8, n_points=201)
    assert vtc(0.4) == pytest.approx(0.4, abs=1e-3)


def test_vtc_shape_and_endpoints(si):
    vtc = cell_vtc(si, 0.8)
    assert np.all(np.diff(vtc.v_in) > 0)
    assert np.all(np.diff(vtc.v_out) <= 1e-12)
    assert vtc.v_out[0] >= 0.8 - 5e-3


def test_vtc_current_balance_residual(si, aos):
    for cell, v in ((si, 0.8), (aos, 1.0)):
        vtc = cell_vtc(cell, v, n_points=64)
        for vi, vo in vtc.samples:
            i_pd = drain_current(cell.pd_dev, vi, vo, cell.w_pd)
            i_pu = drain_current(cell.pu_dev, vi - v, vo - v, cell.w_pu)
            assert abs(i_pd + i_pu) < 1e-12


def test_vtc_needs_enough_points(si):
    with pytest.raises(DomainError):
        cell_vtc(si, 0.8, n_points=10)


def test_vtc_no_crossing_raises():
    # devices that never conduct leave the output undetermined
    n = DeviceParams("n0", "n", 2.0, 2.0, 1e-4, 3.0, 1.0, 0.0, 1e-15, 1e-15, 0.05, "BEOL")
    p = DeviceParams("p0", "p", -2.0, 2.0, 1e-4, 3.0, 1.0, 0.0, 1e-15, 1e-15, 0.05, "BEOL")
    with pytest.raises(NumericalError, match="v_in="):
        inverter_vtc((p, 0.1), (n, 0.1), 0.8, n_points=64)


def test_aos_metastable_point_shifts_left(aos):
    vm = switching_threshold((aos.pu_dev, aos.w_pu), (aos.pd_dev, aos.w_pd), 1.0)
    assert vm < 0.5


def test_hold_snm_calibration(si, aos):
    assert abs(hold_snm(aos, 1.0) - 0.226) <= 0.025
    assert abs(hold_snm(si, 0.8) - 0.339) <= 0.025


def test_snm_lobes_equal_for_symmetric_cell(si, aos):
    for cell, v in ((si, 0.8), (aos, 1.0)):
        vtc = cell_vtc(cell, v)
        a, b = butterfly_lobes(vtc, vtc, v)
        assert abs(a - b) <= 1e-3


def test_butterfly_reflection(si):
    vtc = cell_vtc(si, 0.8)
    # the second curve is the first mirrored about y = x: (f(x), x)
    xs = vtc.v_out
    ys = vtc.v_in
    order = np.argsort(xs)
    back = np.interp(vtc.v_in, xs[order], ys[order])
    fwd = vtc(back)
    assert np.allclose(fwd[5:-5], vtc.v_in[5:-5], atol=2e-3)


def _grid_snm(vtc, v, n=2001):
    """Largest axis-aligned square inside each butterfly lobe on an n x n grid."""
    g = np.linspace(0.0, v, n)
    h = g[1] - g[0]
    X, Y = np.meshgrid(g, g, indexing="xy")  # X = Q, Y = QB
    fx = vtc(X)  # curve 1: QB = f(Q)
    fy = vtc(Y)  # curve 2: Q = f(QB)
    lobes = [(Y <= fx) & (X >= fy) & (Y >= X), (Y >= fx) & (X <= fy) & (Y <= X)]
    sides = []
    for mask in lobes:
        ps = np.zeros((n + 1, n + 1))
        ps[1:, 1:] = np.cumsum(np.cumsum(mask, 0), 1)
        lo, hi = 0, n
        while lo < hi:
            k = (lo + hi + 1) // 2
            win = ps[k:, k:] - ps[:-k, k:] - ps[k:, :-k] + ps[:-k, :-k]
            if (win >= k * k).any():
                lo = k
            else:
                hi = k - 1
        sides.append((lo - 1) * h)
    return min(sides)


def test_snm_matches_dense_grid_oracle(tech):
    rng = np.random.default_rng(5)
    base = cell_from_tech(tech, "si_6t")
    for _ in range(5):
        cell = dataclasses.replace(base, w_pu=base.w_pu * rng.uniform(1, 2.5),
                                   w_pd=base.w_pd * rng.uniform(1, 2.5), w_pg=base.w_pg)
        v = float(rng.uniform(0.6, 1.0))
        vtc = cell_vtc(cell, v)
        assert min(butterfly_lobes(vtc, vtc, v)) == pytest.approx(_grid_snm(vtc, v), abs=1e-3)


def test_write_delay_calibration(si, aos):
    t_si = write_delay(si, 0.7, 0.7, v_sram=0.8)
    t_aos = write_delay(aos, 0.7, 0.7, v_sram=0.8)
    assert abs(t_aos / t_si / 26 - 1) <= 0.30


def test_write_delay_rc_oracle(si):
    v_cross = switching_threshold((si.pu_dev, si.w_pu), (si.pd_dev, si.w_pd), 0.8)
    v_final = min(0.7, 0.7 - si.pg_dev.vth)
    r = effective_resistance(si.pg_dev, 0.7, si.w_pg)
    c = (si.pu_dev.c_parasitic + si.pu_dev.c_gate) * si.w_pu + (si.pd_dev.c_parasitic + si.pd_dev.c_gate) * si.w_pd \
        + si.c_node
    assert storage_node_capacitance(si) == pytest.approx(c, rel=1e-14)
    expected = WRITE_FEEDBACK_FACTOR * r * c * math.log(v_final / (v_final - v_cross))
    assert write_delay(si, 0.7, 0.7, v_sram=0.8) == pytest.approx(expected, rel=1e-12)


def test_write_delay_monotone_in_wordline(si, aos):
    for cell in (si, aos):
        t = [write_delay(cell, v, 0.7, v_sram=0.8) for v in (0.8, 0.9, 1.0, 1.1, 1.2)]
        assert all(b < a for a, b in zip(t, t[1:]))


def test_write_delay_wide_pass_gate_limit(si):
    t = [write_delay(dataclasses.replace(si, w_pg=w), 0.7, 0.7) for w in (0.054, 5.4, 540.0)]
    assert t[2] < t[1] < t[0]
    assert t[2] < 1e-3 * t[0]


def test_write_delay_errors(aos):
    with pytest.raises(UnwritableError) as exc:
        write_delay(aos, 0.5, 0.7, v_sram=0.8)
    assert exc.value.limiting_voltage == pytest.approx(0.5 - aos.pg_dev.vth)
    with pytest.raises(DomainError):
        write_delay(aos, 1.6, 0.7)


def test_cell_invariants(tech):
    si = cell_from_tech(tech, "si_6t")
    with pytest.raises(DomainError):
        dataclasses.replace(si, w_pg=0.01)
    with pytest.raises(DomainError):
        dataclasses.replace(si, layout_style="BEOL_two_tier")


def test_bitcell_area(tech, si, aos):
    rules = AreaRules(0.02, 1.0)
    planar = bitcell_area(si, rules)
    assert planar["per_tier"] == [pytest.approx(6 * 0.02)]
    wide = dataclasses.replace(si, w_pu=2 * si.w_pu, w_pd=2 * si.w_pd, w_pg=2 * si.w_pg)
    assert bitcell_area(wide, rules)["footprint"] == pytest.approx(2 * planar["footprint"])
    # same devices stacked on two tiers beat the planar layout
    flat = dataclasses.replace(aos, layout_style="FEOL_planar")
    assert bitcell_area(aos, tech.area_rules)["footprint"] < bitcell_area(flat, tech.area_rules)["footprint"]
    two = bitcell_area(aos, tech.area_rules)
    assert len(two["per_tier"]) == 2 and two["footprint"] == max(two["per_tier"])
