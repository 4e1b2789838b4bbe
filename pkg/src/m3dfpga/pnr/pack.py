"""Greedy seed-based cluster packing.

A BLE is a LUT, optionally paired with the latch it feeds.  A latch whose
input is not a single-fanout LUT output gets its own BLE (the LUT acts as a
wire).  Clusters are grown from the unpacked BLE with the most inputs; the
next BLE is the one sharing the most nets with the cluster, lowest index on
ties, subject to <= N BLEs and <= I distinct external inputs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .blif import LogicNetlist


class PackError(ValueError):
    pass


@dataclass(frozen=True)
class Ble:
    lut: str | None
    latch: str | None
    inputs: tuple  # nets consumed
    outputs: tuple  # nets produced and visible outside the BLE

    @property
    def name(self) -> str:
        return self.lut or self.latch


@dataclass
class Cluster:
    index: int
    bles: list = field(default_factory=list)

    def produced(self) -> set:
        return {o for b in self.bles for o in b.outputs} | {b.lut for b in self.bles if b.lut}

    def external_inputs(self) -> list:
        made = self.produced()
        seen = {}
        for b in self.bles:
            for i in b.inputs:
                if i not in made:
                    seen.setdefault(i, None)
        return list(seen)


def form_bles(nl: LogicNetlist, k: int) -> list:
    for lut in nl.luts.values():
        if len(lut.inputs) > k:
            raise PackError(f"unmappable: LUT {lut.name!r} has {len(lut.inputs)} inputs > K={k}")
    fo = nl.fanout()
    absorbed = {}
    for la in nl.latches.values():
        src = la.input
        if src in nl.luts and len(fo[src]) == 1 and src not in absorbed:
            absorbed[src] = la.name
    bles = []
    for lut in nl.luts.values():
        la = absorbed.get(lut.name)
        if la is not None:
            bles.append(Ble(lut.name, la, lut.inputs, (la,)))
        else:
            bles.append(Ble(lut.name, None, lut.inputs, (lut.name,)))
    done = set(absorbed.values())
    for la in nl.latches.values():
        if la.name not in done:
            bles.append(Ble(None, la.name, (la.input,), (la.name,)))
    return bles


def pack_netlist(nl: LogicNetlist, spec) -> list:
    """Return a list of Clusters covering every LUT and latch exactly once."""
    bles = form_bles(nl, spec.k)
    n_max, i_max = spec.n, spec.i
    for b in bles:
        if len(set(b.inputs)) > i_max:
            raise PackError(f"BLE {b.name!r} needs more than I={i_max} inputs")
    unpacked = list(range(len(bles)))
    clusters = []
    while unpacked:
        seed = max(unpacked, key=lambda j: (len(set(bles[j].inputs)), -j))
        cl = Cluster(len(clusters), [bles[seed]])
        unpacked.remove(seed)
        while len(cl.bles) < n_max:
            nets = set(cl.external_inputs()) | cl.produced()
            best, best_gain = None, -1
            for j in unpacked:
                b = bles[j]
                gain = len((set(b.inputs) | set(b.outputs) | ({b.lut} if b.lut else set())) & nets)
                if gain > best_gain:
                    trial = Cluster(cl.index, cl.bles + [b])
                    if len(trial.external_inputs()) <= i_max:
                        best, best_gain = j, gain
            if best is None:
                break
            cl.bles.append(bles[best])
            unpacked.remove(best)
        clusters.append(cl)
    return clusters


def check_packing(nl: LogicNetlist, clusters: list, spec) -> list:
    """Independent legality check; returns a list of violations (empty if legal)."""
    problems = []
    luts, latches = [], []
    for cl in clusters:
        if len(cl.bles) > spec.n:
            problems.append(f"cluster {cl.index}: {len(cl.bles)} BLEs > N={spec.n}")
        made = set()
        for b in cl.bles:
            if b.lut:
                luts.append(b.lut)
                made.add(b.lut)
            if b.latch:
                latches.append(b.latch)
                made.add(b.latch)
        ext = set()
        for b in cl.bles:
            if b.lut:
                ext |= set(nl.luts[b.lut].inputs) - made
            if b.latch and not b.lut:
                ext |= {nl.latches[b.latch].input} - made
        if len(ext) > spec.i:
            problems.append(f"cluster {cl.index}: {len(ext)} inputs > I={spec.i}")
    if sorted(luts) != sorted(nl.luts):
        problems.append("LUT assignment is not one-to-one")
    if sorted(latches) != sorted(nl.latches):
        problems.append("latch assignment is not one-to-one")
    return problems
