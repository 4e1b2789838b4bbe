"""Six-transistor configuration SRAM: leakage, butterfly/hold SNM, write time, area."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .devices import (
    AreaRules, DeviceParams, DomainError, device_caps, drain_current,
    effective_resistance, transistor_area,
)

WRITE_FEEDBACK_FACTOR = 1.5
WRITE_MAX_VOLTAGE = 1.5
VTC_MIN_POINTS = 64


class NumericalError(ArithmeticError):
    pass


class UnwritableError(NumericalError):
    def __init__(self, message: str, limiting_voltage: float):
        super().__init__(message)
        self.limiting_voltage = limiting_voltage


@dataclass(frozen=True)
class SramCellSpec:
    pu_dev: DeviceParams
    pd_dev: DeviceParams
    pg_dev: DeviceParams
    w_pu: float
    w_pd: float
    w_pg: float
    layout_style: str = "FEOL_planar"  # or "BEOL_two_tier"
    miv_pairs: int = 0
    c_node: float = 0.0  # extra storage-node load (configured gate + local wire), F
    miv_c: float = 0.0  # capacitance per MIV on the storage node path, F

    def __post_init__(self):
        for dev, w, role in ((self.pu_dev, self.w_pu, "pull-up"),
                             (self.pd_dev, self.w_pd, "pull-down"),
                             (self.pg_dev, self.w_pg, "pass-gate")):
            if w < dev.w_min * (1 - 1e-9):
                raise DomainError(f"{role} width {w} um below w_min {dev.w_min} um")
        if self.pu_dev.polarity != "p" or self.pd_dev.polarity != "n":
            raise DomainError("pull-up must be p-type and pull-down n-type")
        if self.layout_style not in ("FEOL_planar", "BEOL_two_tier"):
            raise DomainError(f"unknown layout style {self.layout_style!r}")
        if self.layout_style == "BEOL_two_tier":
            if any(d.tier_class != "BEOL" for d in (self.pu_dev, self.pd_dev, self.pg_dev)):
                raise DomainError("BEOL_two_tier cells need BEOL devices only")
        if self.miv_pairs < 0:
            raise DomainError("negative MIV count")

    @property
    def symmetric(self) -> bool:
        return True


@dataclass(frozen=True)
class VtcCurve:
    v_in: np.ndarray
    v_out: np.ndarray

    @property
    def samples(self):
        return list(zip(self.v_in.tolist(), self.v_out.tolist()))

    def __call__(self, x):
        return np.interp(x, self.v_in, self.v_out)


def _cell_devices(cell: SramCellSpec, bit: int, v: float):
    """(device, width, vg, vd, vs) for the six devices in hold state.

    Bitlines are precharged to ``v``; the word line is low.
    """
    q, qb = (v, 0.0) if bit else (0.0, v)
    bl = blb = v
    return [
        (cell.pu_dev, cell.w_pu, qb, q, v),   # PU on the Q side
        (cell.pd_dev, cell.w_pd, qb, q, 0.0),
        (cell.pg_dev, cell.w_pg, 0.0, bl, q),
        (cell.pu_dev, cell.w_pu, q, qb, v),   # PU on the QB side
        (cell.pd_dev, cell.w_pd, q, qb, 0.0),
        (cell.pg_dev, cell.w_pg, 0.0, blb, qb),
    ]


def sram_static_power(cell: SramCellSpec, v_sram: float, bit: int = 1) -> float:
    """Hold-state power in watts (sum of |I * Vds| over the six devices)."""
    if v_sram <= 0:
        raise DomainError(f"v_sram must be > 0, got {v_sram}")
    total = 0.0
    for dev, w, vg, vd, vs in _cell_devices(cell, bit, v_sram):
        vds = vd - vs
        total += abs(drain_current(dev, vg - vs, vds, w) * vds)
    return total


def _balance(pu, pd, v_dd, v_in, v_out):
    i_pd = drain_current(pd[0], v_in, v_out, pd[1])
    i_pu = drain_current(pu[0], v_in - v_dd, v_out - v_dd, pu[1])
    return i_pd + i_pu


def _solve_vout(pu, pd, v_dd, v_in):
    lo, hi = 0.0, v_dd
    r_lo = _balance(pu, pd, v_dd, v_in, lo)
    r_hi = _balance(pu, pd, v_dd, v_in, hi)
    if r_lo > 0 or r_hi < 0 or (r_lo == 0 and r_hi == 0):
        raise NumericalError(f"inverter has no output crossing at v_in={v_in:.6f} V")
    if r_lo == 0:
        return lo
    if r_hi == 0:
        return hi
    # bisect to floating-point resolution; this is well below the 0.1 mV target
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        r = _balance(pu, pd, v_dd, v_in, mid)
        if r > 0:
            hi = mid
        elif r < 0:
            lo = mid
        else:
            return mid
    return 0.5 * (lo + hi)


def inverter_vtc(pu: tuple, pd: tuple, v_dd: float, n_points: int = 201) -> VtcCurve:
    """Voltage-transfer curve of an inverter; ``pu``/``pd`` are (device, width)."""
    if n_points < VTC_MIN_POINTS:
        raise DomainError(f"n_points must be >= {VTC_MIN_POINTS}")
    v_in = np.linspace(0.0, v_dd, n_points)
    v_out = np.array([_solve_vout(pu, pd, v_dd, float(x)) for x in v_in])
    return VtcCurve(v_in, v_out)


def switching_threshold(pu: tuple, pd: tuple, v_dd: float) -> float:
    """Input voltage where v_out == v_in (the metastable point)."""
    lo, hi = 0.0, v_dd
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _solve_vout(pu, pd, v_dd, mid) > mid:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return 0.5 * (lo + hi)


def _largest_side(h, s_hi, iters=60):
    """Vectorised bisection for the largest s with h(s) >= 0 (h decreasing)."""
    lo = np.zeros_like(s_hi)
    hi = s_hi.copy()
    ok0 = h(lo) >= 0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        good = h(mid) >= 0
        lo = np.where(good, mid, lo)
        hi = np.where(good, hi, mid)
    return np.where(ok0, lo, 0.0)


def _lobe(fa, fb, v_dd, n_scan=4001):
    """Largest square with bottom-left on x = fb(y) and top-right under y = fa(x)."""
    def side_at(y0):
        x0 = fb(y0)
        return _largest_side(lambda s: fa(x0 + s) - (y0 + s), np.full_like(y0, v_dd))

    y0 = np.linspace(0.0, v_dd, n_scan)
    sides = side_at(y0)
    k = int(np.argmax(sides))
    # local refinement between neighbouring scan points
    step = v_dd / (n_scan - 1)
    fine = np.linspace(max(0.0, y0[k] - step), min(v_dd, y0[k] + step), 201)
    return float(max(sides[k], side_at(fine).max()))


def butterfly_lobes(vtc_a: VtcCurve, vtc_b: VtcCurve, v_dd: float) -> tuple:
    """Inscribed-square sides of both butterfly lobes.

    ``vtc_a`` maps Q -> QB, ``vtc_b`` maps QB -> Q.  Lobe 1 is the upper-left
    region {QB <= a(Q), Q >= b(QB)}; lobe 2 is the lower-right mirror.
    """
    fa, fb = vtc_a, vtc_b
    lobe1 = _lobe(fa, fb, v_dd)
    lobe2 = _lobe(fb, fa, v_dd)
    return lobe1, lobe2


def cell_vtc(cell: SramCellSpec, v_sram: float, n_points: int = 201) -> VtcCurve:
    return inverter_vtc((cell.pu_dev, cell.w_pu), (cell.pd_dev, cell.w_pd), v_sram, n_points)


def hold_snm(cell: SramCellSpec, v_sram: float, n_points: int = 201) -> float:
    """Hold static noise margin (word line low), min over both lobes, volts."""
    vtc = cell_vtc(cell, v_sram, n_points)
    return min(butterfly_lobes(vtc, vtc, v_sram))


def storage_node_capacitance(cell: SramCellSpec) -> float:
    """Storage-node load: own inverter drains, opposite inverter gates, MIVs, extra load.

    The access device's own diffusion is not counted so that an ideal
    (infinitely wide) pass gate gives zero write time.
    """
    pu = device_caps(cell.pu_dev, cell.w_pu)
    pd = device_caps(cell.pd_dev, cell.w_pd)
    c = pu["c_parasitic"] + pd["c_parasitic"] + pu["c_gate"] + pd["c_gate"] + cell.c_node
    if cell.layout_style == "BEOL_two_tier":
        # one inter-tier via on the output net and one on the feedback gate net,
        # plus the storage-node via to the FEOL
        c += 3 * cell.miv_c
    return c


def write_delay(cell: SramCellSpec, v_wl: float, v_bl: float, v_sram: float = 0.8) -> float:
    """Single-pole estimate of the time to flip the cell through one pass gate.

    The storage node charges from 0 toward ``v_final = min(v_bl, v_wl - vth)``
    (an n-type gate cannot pass more than ``v_wl - vth``) and must cross the
    opposite inverter's switching threshold, after which the cross-coupled
    feedback completes the write.  The RC time is scaled by
    ``WRITE_FEEDBACK_FACTOR``.
    """
    if v_wl > WRITE_MAX_VOLTAGE or v_bl > WRITE_MAX_VOLTAGE:
        raise DomainError(f"pulse above {WRITE_MAX_VOLTAGE} V model limit")
    if v_wl <= 0 or v_bl <= 0:
        raise DomainError("pulses must be positive")
    v_cross = switching_threshold((cell.pu_dev, cell.w_pu), (cell.pd_dev, cell.w_pd), v_sram)
    v_final = v_bl
    if cell.pg_dev.polarity == "n":
        v_final = min(v_bl, v_wl - cell.pg_dev.vth)
    if v_final <= v_cross:
        raise UnwritableError(
            f"pass gate limits the storage node to {v_final:.4f} V, below the "
            f"switching threshold {v_cross:.4f} V", v_final)
    r = effective_resistance(cell.pg_dev, v_wl, cell.w_pg)
    c = storage_node_capacitance(cell)
    return WRITE_FEEDBACK_FACTOR * r * c * math.log(v_final / (v_final - v_cross))


def bitcell_area(cell: SramCellSpec, rules: AreaRules) -> dict:
    pu = transistor_area(cell.pu_dev, cell.w_pu, rules)
    pd = transistor_area(cell.pd_dev, cell.w_pd, rules)
    pg = transistor_area(cell.pg_dev, cell.w_pg, rules)
    if cell.layout_style == "FEOL_planar":
        a = 2 * (pu + pd + pg)
        return {"per_tier": [a], "footprint": a}
    keep = rules.miv_keepout
    n_mivs = 2 * cell.miv_pairs
    n_tier = 2 * (pd + pg) + keep * (n_mivs + 1)  # storage via lands on the lower tier
    p_tier = 2 * pu + keep * n_mivs
    return {"per_tier": [n_tier, p_tier], "footprint": max(n_tier, p_tier)}


def cell_from_tech(tech, name: str) -> SramCellSpec:
    """Build a named ``[cell]`` record of a technology library."""
    try:
        rec = tech.cells[name]
    except KeyError:
        raise DomainError(f"cell {name!r} not in technology library "
                          f"(have {sorted(tech.cells)})") from None
    return SramCellSpec(
        tech.device(rec["pu"]), tech.device(rec["pd"]), tech.device(rec["pg"]),
        rec["w_pu"], rec["w_pd"], rec["w_pg"],
        layout_style=rec.get("layout_style", "FEOL_planar"),
        miv_pairs=rec.get("miv_pairs", 0), c_node=rec.get("c_node", 0.0),
        miv_c=tech.miv_c)
