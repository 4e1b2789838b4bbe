"""Analytic transistor models and the technology library.

The drain current is an alpha-power law in an effective overdrive that
smoothly enters an exponential subthreshold region::

    s      = alpha * SS / ln(10)
    v_ov   = s * log(1 + exp((vgs - vth + eta * vds) / s))
    I      = K * W * v_ov**alpha * sat(vds)
    sat    = 1 - (1 - min(vds / vdsat, 1))**2,   vdsat = alpha/2 * v_ov + 2 kT/q

``K`` normalises the current so that ``I(v_ref, v_ref) = i_on_ref * W``.
Raising the softplus to ``alpha`` gives exactly ``SS`` mV/decade below
threshold.  ``eta`` (drain-induced threshold lowering) is not a free
parameter: it is solved once so that ``I(0, v_ref) = i_off_ref * W``.
A zero ``i_off_ref`` pins ``eta`` to 0.

p-type devices mirror the n-type equations: ``I_p(vgs, vds) = -I_n'(-vgs, -vds)``
with ``vth' = -vth``.  Currents are signed, positive into the drain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from scipy.optimize import brentq

THERMAL_VOLTAGE = 0.025852  # kT/q at 300 K
K_R = 2.0  # switching-resistance divisor, see effective_resistance

ETA_BOUNDS = (-0.3, 0.6)


class DomainError(ValueError):
    """Argument outside the physical domain of a model."""


class TechFileError(ValueError):
    pass


def _softplus(x: float) -> float:
    if x > 40.0:
        return x
    return math.log1p(math.exp(x))


@dataclass(frozen=True)
class DeviceParams:
    name: str
    polarity: str  # "n" or "p"
    vth: float
    alpha: float
    i_on_ref: float  # A/um at vgs = vds = v_ref
    v_ref: float
    ss: float  # mV/decade
    i_off_ref: float  # A/um at vgs = 0, vds = v_ref
    c_gate: float  # F/um
    c_parasitic: float  # F/um
    w_min: float  # um
    tier_class: str  # "FEOL" or "BEOL"
    eta: float = field(init=False, default=0.0, compare=False)
    _k: float = field(init=False, default=0.0, repr=False, compare=False)

    def __post_init__(self):
        if self.polarity not in ("n", "p"):
            raise DomainError(f"{self.name}: polarity must be 'n' or 'p'")
        if self.tier_class not in ("FEOL", "BEOL"):
            raise DomainError(f"{self.name}: tier_class must be FEOL or BEOL")
        if self.i_on_ref <= 0:
            raise DomainError(f"{self.name}: i_on_ref must be > 0")
        if self.i_off_ref < 0:
            raise DomainError(f"{self.name}: i_off_ref must be >= 0")
        if self.tier_class == "FEOL" and self.ss < 60.0:
            raise DomainError(f"{self.name}: FEOL subthreshold swing below 60 mV/dec")
        if self.ss <= 0:
            raise DomainError(f"{self.name}: ss must be > 0")
        if self.w_min <= 0:
            raise DomainError(f"{self.name}: w_min must be > 0")
        if not 1.0 <= self.alpha <= 2.0:
            raise DomainError(f"{self.name}: alpha must lie in [1, 2]")
        if self.c_gate < 0 or self.c_parasitic < 0:
            raise DomainError(f"{self.name}: capacitances must be >= 0")
        if self.v_ref <= 0:
            raise DomainError(f"{self.name}: v_ref must be > 0")
        object.__setattr__(self, "_k", 1.0)
        eta = 0.0
        if self.i_off_ref > 0:
            eta = self._solve_eta()
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "_k", self._norm(eta))

    # -- internal n-type frame -------------------------------------------
    @property
    def _vth_n(self) -> float:
        return self.vth if self.polarity == "n" else -self.vth

    @property
    def _s(self) -> float:
        return self.alpha * self.ss * 1e-3 / math.log(10.0)

    def _shape(self, vgs: float, vds: float, eta: float) -> float:
        """Un-normalised current for vds >= 0 in the n-type frame."""
        s = self._s
        vov = s * _softplus((vgs - self._vth_n + eta * vds) / s)
        vdsat = 0.5 * self.alpha * vov + 2.0 * THERMAL_VOLTAGE
        x = min(vds / vdsat, 1.0)
        return vov ** self.alpha * (1.0 - (1.0 - x) ** 2)

    def _norm(self, eta: float) -> float:
        return self.i_on_ref / self._shape(self.v_ref, self.v_ref, eta)

    def _solve_eta(self) -> float:
        def off_error(eta):
            ratio = self._shape(0.0, self.v_ref, eta) / self._shape(self.v_ref, self.v_ref, eta)
            return math.log(ratio * self.i_on_ref) - math.log(self.i_off_ref)

        lo, hi = ETA_BOUNDS
        f_lo, f_hi = off_error(lo), off_error(hi)
        if f_lo > 0 or f_hi < 0:
            raise DomainError(
                f"{self.name}: i_off_ref={self.i_off_ref:.3e} A/um is not reachable with a "
                f"drain-induced shift in {ETA_BOUNDS}; adjust vth or ss"
            )
        return brentq(off_error, lo, hi, xtol=1e-14, rtol=1e-14)

    def _current_n(self, vgs: float, vds: float) -> float:
        if vds < 0:
            # source and drain swap; gate is referenced to the new source
            return -self._current_n(vgs - vds, -vds)
        return self._k * self._shape(vgs, vds, self.eta)

    def mirrored(self, name: str | None = None) -> "DeviceParams":
        """Same device with opposite polarity and mirrored threshold."""
        return DeviceParams(
            name=name or f"{self.name}_mirror",
            polarity="p" if self.polarity == "n" else "n",
            vth=-self.vth,
            alpha=self.alpha,
            i_on_ref=self.i_on_ref,
            v_ref=self.v_ref,
            ss=self.ss,
            i_off_ref=self.i_off_ref,
            c_gate=self.c_gate,
            c_parasitic=self.c_parasitic,
            w_min=self.w_min,
            tier_class=self.tier_class,
        )


def drain_current(dev: DeviceParams, vgs: float, vds: float, width: float) -> float:
    """Signed drain current in amps for a device of ``width`` um."""
    if width < 0:
        raise DomainError(f"negative width {width} um")
    if width == 0 or vds == 0:
        return 0.0
    if dev.polarity == "n":
        return width * dev._current_n(vgs, vds)
    return -width * dev._current_n(-vgs, -vds)


def effective_resistance(dev: DeviceParams, v_sw: float, width: float, v_ds: float | None = None) -> float:
    """Switching resistance ``v_ds / (K_R * |I(v_sw, v_ds)|)``.

    ``v_sw`` is the gate drive magnitude; for pass gates this is the voltage
    of the configuration bit driving the gate.  ``v_ds`` is the transition
    amplitude across the channel and defaults to ``v_sw`` (an inverter); a
    pass gate switches a logic-level signal, so callers pass the logic rail.
    """
    if width <= 0:
        raise DomainError(f"width must be > 0, got {width}")
    if v_sw <= 0:
        raise DomainError(f"switching voltage must be > 0, got {v_sw}")
    v_ds = v_sw if v_ds is None else v_ds
    if v_ds <= 0:
        raise DomainError(f"drain swing must be > 0, got {v_ds}")
    sign = 1.0 if dev.polarity == "n" else -1.0
    i = abs(drain_current(dev, sign * v_sw, sign * v_ds, width))
    if i == 0.0:
        raise ZeroDivisionError(f"{dev.name}: zero on-current, resistance is infinite")
    return v_ds / (K_R * i)


def device_caps(dev: DeviceParams, width: float) -> dict:
    if width < 0:
        raise DomainError(f"negative width {width} um")
    return {"c_gate": dev.c_gate * width, "c_parasitic": dev.c_parasitic * width}


def off_current(dev: DeviceParams, width: float, v_dd: float) -> float:
    """Magnitude of the off-state current at vgs = 0, |vds| = v_dd."""
    sign = 1.0 if dev.polarity == "n" else -1.0
    return abs(drain_current(dev, 0.0, sign * v_dd, width))


class SizingError(ValueError):
    pass


def transistor_area(dev: DeviceParams, width: float, rules: "AreaRules") -> float:
    """Minimum-width-transistor-area model, um^2."""
    if width < dev.w_min * (1 - 1e-9):
        raise SizingError(f"{dev.name}: width {width} um below w_min {dev.w_min} um")
    mult = width / dev.w_min
    return rules.min_width_transistor_area * (1.0 + rules.width_area_slope * (mult - 1.0))


def leakage_power(dev: DeviceParams, width: float, v_dd: float) -> float:
    if v_dd < 0:
        raise DomainError(f"negative supply {v_dd}")
    if width < 0:
        raise DomainError(f"negative width {width} um")
    return v_dd * off_current(dev, width, v_dd)


# -- technology library ------------------------------------------------------

@dataclass(frozen=True)
class MetalLayer:
    name: str
    r_per_um: float
    c_per_um: float


@dataclass(frozen=True)
class AreaRules:
    min_width_transistor_area: float  # um^2
    width_area_slope: float
    whitespace: float = 1.0  # FEOL inter-block whitespace multiplier
    miv_keepout: float = 0.0  # um^2 per MIV on device tiers


@dataclass(frozen=True)
class TechnologyLibrary:
    devices: dict
    v_dd: float
    metal_layers: dict
    miv_r: float
    miv_c: float
    area_rules: AreaRules
    ff_leakage: float = 0.0  # W per flip-flop
    ff_area: float = 0.0  # in minimum-width transistor areas
    local_layer: str = "m3"
    routing_layer: str = "m3"
    cells: dict = field(default_factory=dict)  # SRAM cell records, see sram.cell_from_tech

    def __post_init__(self):
        polarities = {(d.polarity, d.tier_class) for d in self.devices.values()}
        if ("n", "FEOL") not in polarities or ("p", "FEOL") not in polarities:
            raise TechFileError("library needs at least one n-type and one p-type FEOL device")
        for m in self.metal_layers.values():
            if m.r_per_um < 0 or m.c_per_um < 0:
                raise TechFileError(f"metal {m.name}: negative parasitics")
        if self.miv_r < 0 or self.miv_c < 0:
            raise TechFileError("negative MIV parasitics")
        for layer in (self.local_layer, self.routing_layer):
            if layer not in self.metal_layers:
                raise TechFileError(f"unknown metal layer {layer!r}")
        for cname, rec in self.cells.items():
            for role in ("pu", "pd", "pg"):
                if rec[role] not in self.devices:
                    raise TechFileError(f"cell {cname}: unknown device {rec[role]!r}")

    def device(self, name: str) -> DeviceParams:
        try:
            return self.devices[name]
        except KeyError:
            raise TechFileError(f"device {name!r} not in technology library") from None

    @property
    def local_metal(self) -> MetalLayer:
        return self.metal_layers[self.local_layer]

    @property
    def routing_metal(self) -> MetalLayer:
        return self.metal_layers[self.routing_layer]


_DEVICE_KEYS = {
    "polarity": str, "vth": float, "alpha": float, "i_on_ref": float, "v_ref": float,
    "ss": float, "i_off_ref": float, "c_gate": float, "c_parasitic": float,
    "w_min": float, "tier_class": str,
}
_LIBRARY_KEYS = {
    "v_dd": float, "ff_leakage": float, "ff_area": float,
    "local_layer": str, "routing_layer": str,
}
_METAL_KEYS = {"r_per_um": float, "c_per_um": float}
_MIV_KEYS = {"r": float, "c": float}
_CELL_KEYS = {
    "pu": str, "pd": str, "pg": str, "w_pu": float, "w_pd": float, "w_pg": float,
    "layout_style": str, "miv_pairs": int, "c_node": float,
}
_AREA_KEYS = {
    "min_width_transistor_area": float, "width_area_slope": float,
    "whitespace": float, "miv_keepout": float,
}


def _strip_units(value: str) -> str:
    # values may carry a trailing unit annotation: "131.2  # ohm/um"
    return value.split("#", 1)[0].strip()


def parse_tech(text: str, source: str = "<tech>") -> TechnologyLibrary:
    """Parse the sectioned key=value technology format."""
    sections: list[tuple[str, str, dict, int]] = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            head = line[1:-1].split()
            kind = head[0]
            name = head[1] if len(head) > 1 else ""
            if kind not in ("library", "device", "metal", "cell", "miv", "area_rules"):
                raise TechFileError(f"{source}:{lineno}: unknown section [{kind}]")
            if kind in ("device", "metal", "cell") and not name:
                raise TechFileError(f"{source}:{lineno}: [{kind}] needs a name")
            current = (kind, name, {}, lineno)
            sections.append(current)
            continue
        if current is None or "=" not in line:
            raise TechFileError(f"{source}:{lineno}: expected 'key = value' inside a section")
        key, value = (p.strip() for p in line.split("=", 1))
        current[2][key] = (_strip_units(value), lineno)

    def convert(kind, fields, schema, required):
        out = {}
        for key, (value, lineno) in fields.items():
            if key not in schema:
                raise TechFileError(f"{source}:{lineno}: unknown key {key!r} in [{kind}]")
            try:
                out[key] = schema[key](value)
            except ValueError:
                raise TechFileError(f"{source}:{lineno}: bad value {value!r} for {key}") from None
        missing = [k for k in required if k not in out]
        if missing:
            raise TechFileError(f"{source}: [{kind}] missing keys {missing}")
        return out

    devices, metals, cells = {}, {}, {}
    lib, miv, area = {}, None, None
    for kind, name, fields, lineno in sections:
        if kind == "device":
            vals = convert(kind, fields, _DEVICE_KEYS, list(_DEVICE_KEYS))
            try:
                devices[name] = DeviceParams(name=name, **vals)
            except DomainError as exc:
                raise TechFileError(f"{source}:{lineno}: {exc}") from None
        elif kind == "metal":
            vals = convert(kind, fields, _METAL_KEYS, list(_METAL_KEYS))
            metals[name] = MetalLayer(name, **vals)
        elif kind == "cell":
            cells[name] = convert(kind, fields, _CELL_KEYS, ["pu", "pd", "pg", "w_pu", "w_pd", "w_pg"])
        elif kind == "miv":
            miv = convert(kind, fields, _MIV_KEYS, list(_MIV_KEYS))
        elif kind == "area_rules":
            area = AreaRules(**convert(kind, fields, _AREA_KEYS,
                                       ["min_width_transistor_area", "width_area_slope"]))
        else:
            lib = convert(kind, fields, _LIBRARY_KEYS, ["v_dd"])
    if miv is None or area is None:
        raise TechFileError(f"{source}: [miv] and [area_rules] sections are required")
    return TechnologyLibrary(devices=devices, metal_layers=metals, miv_r=miv["r"],
                             miv_c=miv["c"], area_rules=area, cells=cells, **lib)


def load_tech(path=None) -> TechnologyLibrary:
    """Load a technology file; ``None`` loads the shipped 7 nm calibration."""
    if path is None:
        path = Path(__file__).parent / "data" / "tech_7nm.tech"
    path = Path(path)
    return parse_tech(path.read_text(), str(path))
