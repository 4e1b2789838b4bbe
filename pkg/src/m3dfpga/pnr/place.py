"""Simulated-annealing placement on an island grid.

Cost is the sum over nets of bounding-box half-perimeter times the net's
weight.  Moves swap a block with whatever occupies a random slot of the
same type inside a range window.  Schedule: T0 = 20 x stddev of the cost
over one round of unconditional random moves, geometric cooling by 0.9,
10 * blocks^(4/3) moves per temperature, stop when fewer than 0.5% of
moves are accepted (or T drops below 0.005 x cost per net), then one
zero-temperature quench.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels

CLB, IO = 0, 1


class PlacementError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    io_capacity: int = 8

    def slots(self) -> list:
        """(type, x, y, sub) in a fixed order: CLBs column-major, then the IO ring."""
        out = [(CLB, x, y, 0) for x in range(1, self.nx + 1) for y in range(1, self.ny + 1)]
        ring = [(0, y) for y in range(1, self.ny + 1)] + [(self.nx + 1, y) for y in range(1, self.ny + 1)]
        ring += [(x, 0) for x in range(1, self.nx + 1)] + [(x, self.ny + 1) for x in range(1, self.nx + 1)]
        out += [(IO, x, y, s) for x, y in sorted(ring) for s in range(self.io_capacity)]
        return out

    def capacity(self, kind: int) -> int:
        return self.nx * self.ny if kind == CLB else 2 * (self.nx + self.ny) * self.io_capacity


def fit_grid(n_clb: int, n_io: int, io_capacity: int = 8) -> Grid:
    """Smallest square grid holding the clusters and pads."""
    n = max(1, math.ceil(math.sqrt(n_clb)))
    while 4 * n * io_capacity < n_io:
        n += 1
    return Grid(n, n, io_capacity)


@dataclass
class PlaceSchedule:
    cooling: float = 0.9
    moves_scale: float = 10.0
    exit_rate: float = 0.005
    t0_scale: float = 20.0
    max_temps: int = 400


@dataclass
class Placement:
    grid: Grid
    locs: list  # block -> (x, y, sub)
    cost: float
    temps: int = 0
    trace: list = field(default_factory=list)  # cost at the end of each temperature


def placement_cost(locs, nets, weights=None) -> float:
    total = 0.0
    for j, net in enumerate(nets):
        if not net:
            continue
        xs = [locs[b][0] for b in net]
        ys = [locs[b][1] for b in net]
        w = 1.0 if weights is None else weights[j]
        total += w * ((max(xs) - min(xs)) + (max(ys) - min(ys)))
    return total


def place_sa(block_types, nets, grid: Grid, seed: int = 0, weights=None,
             schedule: PlaceSchedule | None = None) -> Placement:
    """Place blocks (type CLB or IO) so as to minimise weighted HPWL.

    ``nets`` are lists of block indices; ``weights`` default to 1.
    """
    sch = schedule or PlaceSchedule()
    nb = len(block_types)
    slots = grid.slots()
    for kind in (CLB, IO):
        need = sum(1 for t in block_types if t == kind)
        if need > grid.capacity(kind):
            raise PlacementError(f"grid {grid.nx}x{grid.ny} holds {grid.capacity(kind)} "
                                 f"{'CLB' if kind == CLB else 'IO'} blocks, need {need}")
    rng = np.random.default_rng(seed)
    slot_type = kernels.ints([s[0] for s in slots])
    slot_x = kernels.ints([s[1] for s in slots])
    slot_y = kernels.ints([s[2] for s in slots])
    nx2, ny2 = grid.nx + 2, grid.ny + 2
    by_loc = [[] for _ in range(nx2 * ny2)]
    for i, s in enumerate(slots):
        by_loc[s[1] * ny2 + s[2]].append(i)
    loc_ptr = kernels.ints(np.cumsum([0] + [len(v) for v in by_loc]))
    loc_slots = kernels.ints([i for v in by_loc for i in v])

    # random initial placement
    block_slot = np.full(nb, -1, dtype=np.int64)
    slot_block = np.full(len(slots), -1, dtype=np.int64)
    for kind in (CLB, IO):
        cand = np.flatnonzero(slot_type == kind)
        cand = cand[rng.permutation(len(cand))]
        blocks = [b for b in range(nb) if block_types[b] == kind]
        for b, s in zip(blocks, cand):
            block_slot[b] = s
            slot_block[s] = b
    block_type = kernels.ints(block_types)

    nets = [sorted(set(n)) for n in nets]
    live = [j for j, n in enumerate(nets) if len(n) > 1]
    net_ptr = kernels.ints(np.cumsum([0] + [len(nets[j]) for j in live]))
    net_pins = kernels.ints([b for j in live for b in nets[j]])
    net_w = kernels.floats([1.0 if weights is None else weights[j] for j in live])
    per_block = [[] for _ in range(nb)]
    for idx, j in enumerate(live):
        for b in nets[j]:
            per_block[b].append(idx)
    bn_ptr = kernels.ints(np.cumsum([0] + [len(v) for v in per_block]))
    bn_nets = kernels.ints([j for v in per_block for j in v])
    net_cost = kernels.floats([kernels.net_hpwl(i, block_slot, slot_x, slot_y, net_ptr, net_pins, net_w)
                               for i in range(len(live))])
    cost = float(sum(net_cost.tolist()))

    def locs():
        return [tuple(slots[s][1:]) for s in block_slot.tolist()]

    if nb < 2 or not live:
        return Placement(grid, locs(), cost)

    rlim = max(nx2, ny2)

    def run(n, temperature, rl, cost):
        r_block = rng.integers(0, nb, n).astype(np.int64)
        r_dx, r_dy, r_sub, r_acc = (rng.random(n) for _ in range(4))
        trace = np.zeros(n)
        acc, cost = kernels.anneal(block_slot, slot_block, slot_x, slot_y, slot_type, loc_ptr, loc_slots,
                                   nx2, ny2, block_type, net_ptr, net_pins, net_w, bn_ptr, bn_nets,
                                   net_cost, r_block, r_dx, r_dy, r_sub, r_acc, temperature, rl, cost, trace)
        return acc, cost, trace

    _, cost, trace = run(nb, math.inf, rlim, cost)
    std = float(np.std(trace))
    temperature = sch.t0_scale * std if std > 0 else 1e-9
    moves = max(1, int(sch.moves_scale * nb ** (4.0 / 3.0)))
    history = []
    temps = 0
    while temps < sch.max_temps:
        acc, cost, _ = run(moves, temperature, rlim, cost)
        temps += 1
        rate = acc / moves
        history.append(cost)
        # zero-delta moves into empty slots keep the rate up at low T, so the
        # classic temperature floor also ends the anneal
        if rate < sch.exit_rate or temperature < sch.exit_rate * cost / len(live):
            break
        temperature *= sch.cooling
        rlim = int(min(max(nx2, ny2), max(1, round(rlim * (1.0 - 0.44 + rate)))))
    _, cost, _ = run(moves, 1e-300, 1, cost)
    final = locs()
    exact = placement_cost(final, nets, weights)
    history.append(exact)
    return Placement(grid, final, exact, temps, history)
