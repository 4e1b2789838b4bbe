"""Pure-Python reference kernels.

The Cython module ``_kernels`` mirrors these functions operation for
operation, so both back ends give bit-identical results for the same
inputs.  Random numbers are drawn by the caller and passed in as arrays.
"""
from __future__ import annotations

import heapq
import math

import numpy as np


def net_hpwl(net, block_slot, slot_x, slot_y, net_ptr, net_pins, net_w) -> float:
    lo, hi = net_ptr[net], net_ptr[net + 1]
    s = block_slot[net_pins[lo]]
    xmin = xmax = slot_x[s]
    ymin = ymax = slot_y[s]
    for k in range(lo + 1, hi):
        s = block_slot[net_pins[k]]
        x, y = slot_x[s], slot_y[s]
        if x < xmin:
            xmin = x
        if x > xmax:
            xmax = x
        if y < ymin:
            ymin = y
        if y > ymax:
            ymax = y
    return float(net_w[net]) * float((xmax - xmin) + (ymax - ymin))


def anneal(block_slot, slot_block, slot_x, slot_y, slot_type, loc_ptr, loc_slots, nx2: int, ny2: int,
           block_type, net_ptr, net_pins, net_w, bn_ptr, bn_nets, net_cost,
           r_block, r_dx, r_dy, r_sub, r_acc, temperature: float, rlim: int, cost: float, trace):
    """One temperature of swap moves; arrays are updated in place.

    Returns (accepted moves, running cost).
    """
    bs = block_slot.tolist()
    sb = slot_block.tolist()
    sx = slot_x.tolist()
    sy = slot_y.tolist()
    st = slot_type.tolist()
    lp = loc_ptr.tolist()
    ls = loc_slots.tolist()
    bt = block_type.tolist()
    npt = net_ptr.tolist()
    npins = net_pins.tolist()
    nw = net_w.tolist()
    bnp = bn_ptr.tolist()
    bnn = bn_nets.tolist()
    nc = net_cost.tolist()
    accepted = 0
    span = 2 * rlim + 1
    for i in range(len(r_block)):
        b = int(r_block[i])
        s = bs[b]
        tx = sx[s] + int(r_dx[i] * span) - rlim
        ty = sy[s] + int(r_dy[i] * span) - rlim
        if tx < 0 or tx >= nx2 or ty < 0 or ty >= ny2:
            trace[i] = cost
            continue
        loc = tx * ny2 + ty
        count = 0
        for k in range(lp[loc], lp[loc + 1]):
            if st[ls[k]] == bt[b]:
                count += 1
        if count == 0:
            trace[i] = cost
            continue
        pick = int(r_sub[i] * count)
        t = -1
        for k in range(lp[loc], lp[loc + 1]):
            if st[ls[k]] == bt[b]:
                if pick == 0:
                    t = ls[k]
                    break
                pick -= 1
        if t == s:
            trace[i] = cost
            continue
        b2 = sb[t]
        bs[b] = t
        sb[t] = b
        sb[s] = b2
        if b2 >= 0:
            bs[b2] = s
        affected = []
        for k in range(bnp[b], bnp[b + 1]):
            affected.append(bnn[k])
        if b2 >= 0:
            for k in range(bnp[b2], bnp[b2 + 1]):
                if bnn[k] not in affected:
                    affected.append(bnn[k])
        delta = 0.0
        new_cost = []
        for net in affected:
            v = net_hpwl(net, bs, sx, sy, npt, npins, nw)
            new_cost.append(v)
            delta += v - nc[net]
        if delta <= 0.0 or r_acc[i] < math.exp(-delta / temperature):
            for j, net in enumerate(affected):
                nc[net] = new_cost[j]
            cost += delta
            accepted += 1
        else:
            bs[b] = s
            sb[s] = b
            sb[t] = b2
            if b2 >= 0:
                bs[b2] = t
        trace[i] = cost
    block_slot[:] = bs
    slot_block[:] = sb
    net_cost[:] = nc
    return accepted, cost


def route_search(ptr, dst, base, occ, cap, hist, pres_fac: float, dterm,
                 xlo, xhi, ylo, yhi, bx0: int, bx1: int, by0: int, by1: int, tree, target: int):
    """Label-setting search from every tree node (cost 0) to ``target``.

    Entering node v costs base*(1 + pres_fac*overuse)*hist + dterm, where
    overuse counts the extra occupant this net would add.  Nodes outside
    the bounding box are not expanded.  Heap ties break on lowest node id.
    Returns the path as an int array starting at the tree node it leaves
    from; empty if the target is unreachable.
    """
    dist = {}
    prev = {}
    heap = []
    for n in tree:
        n = int(n)
        if n not in dist:
            dist[n] = 0.0
            prev[n] = -1
            heap.append((0.0, n))
    heapq.heapify(heap)
    found = False
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if u == target:
            found = True
            break
        for k in range(ptr[u], ptr[u + 1]):
            v = int(dst[k])
            if xhi[v] < bx0 or xlo[v] > bx1 or yhi[v] < by0 or ylo[v] > by1:
                continue
            over = occ[v] + 1 - cap[v]
            pen = 1.0 + pres_fac * over if over > 0 else 1.0
            nd = d + (base[v] * pen * hist[v] + dterm[v])
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    if not found:
        return np.zeros(0, dtype=np.int64)
    path = []
    u = target
    while prev[u] != -1:
        path.append(u)
        u = prev[u]
    path.append(u)
    path.reverse()
    return np.asarray(path, dtype=np.int64)
