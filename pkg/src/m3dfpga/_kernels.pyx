# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled placement and routing kernels (see _kernels_py for the reference)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline double _hpwl(long net, long[::1] bs, long[::1] sx, long[::1] sy,
                         long[::1] npt, long[::1] npins, double[::1] nw) nogil:
    cdef long lo = npt[net], hi = npt[net + 1], k, s, x, y
    s = bs[npins[lo]]
    cdef long xmin = sx[s], xmax = sx[s], ymin = sy[s], ymax = sy[s]
    for k in range(lo + 1, hi):
        s = bs[npins[k]]
        x = sx[s]
        y = sy[s]
        if x < xmin:
            xmin = x
        if x > xmax:
            xmax = x
        if y < ymin:
            ymin = y
        if y > ymax:
            ymax = y
    return nw[net] * <double>((xmax - xmin) + (ymax - ymin))


def net_hpwl(long net, block_slot, slot_x, slot_y, net_ptr, net_pins, net_w):
    return _hpwl(net, np.ascontiguousarray(block_slot, dtype=np.int64),
                 np.ascontiguousarray(slot_x, dtype=np.int64), np.ascontiguousarray(slot_y, dtype=np.int64),
                 np.ascontiguousarray(net_ptr, dtype=np.int64), np.ascontiguousarray(net_pins, dtype=np.int64),
                 np.ascontiguousarray(net_w, dtype=np.float64))


def anneal(long[::1] block_slot, long[::1] slot_block, long[::1] slot_x, long[::1] slot_y,
           long[::1] slot_type, long[::1] loc_ptr, long[::1] loc_slots, long nx2, long ny2,
           long[::1] block_type, long[::1] net_ptr, long[::1] net_pins, double[::1] net_w,
           long[::1] bn_ptr, long[::1] bn_nets, double[::1] net_cost,
           long[::1] r_block, double[::1] r_dx, double[::1] r_dy, double[::1] r_sub, double[::1] r_acc,
           double temperature, long rlim, double cost, double[::1] trace):
    cdef long nmoves = r_block.shape[0], i, b, s, t, b2, tx, ty, loc, k, count, pick, j, net
    cdef long accepted = 0, span = 2 * rlim + 1, naff, maxdeg = 0
    cdef double delta, v
    cdef long nblocks = block_slot.shape[0]
    for b in range(nblocks):
        if bn_ptr[b + 1] - bn_ptr[b] > maxdeg:
            maxdeg = bn_ptr[b + 1] - bn_ptr[b]
    cdef long *aff = <long *> malloc((2 * maxdeg + 1) * sizeof(long))
    cdef double *newc = <double *> malloc((2 * maxdeg + 1) * sizeof(double))
    cdef bint dup
    try:
        for i in range(nmoves):
            b = r_block[i]
            s = block_slot[b]
            tx = slot_x[s] + <long>(r_dx[i] * span) - rlim
            ty = slot_y[s] + <long>(r_dy[i] * span) - rlim
            if tx < 0 or tx >= nx2 or ty < 0 or ty >= ny2:
                trace[i] = cost
                continue
            loc = tx * ny2 + ty
            count = 0
            for k in range(loc_ptr[loc], loc_ptr[loc + 1]):
                if slot_type[loc_slots[k]] == block_type[b]:
                    count += 1
            if count == 0:
                trace[i] = cost
                continue
            pick = <long>(r_sub[i] * count)
            t = -1
            for k in range(loc_ptr[loc], loc_ptr[loc + 1]):
                if slot_type[loc_slots[k]] == block_type[b]:
                    if pick == 0:
                        t = loc_slots[k]
                        break
                    pick -= 1
            if t == s:
                trace[i] = cost
                continue
            b2 = slot_block[t]
            block_slot[b] = t
            slot_block[t] = b
            slot_block[s] = b2
            if b2 >= 0:
                block_slot[b2] = s
            naff = 0
            for k in range(bn_ptr[b], bn_ptr[b + 1]):
                aff[naff] = bn_nets[k]
                naff += 1
            if b2 >= 0:
                for k in range(bn_ptr[b2], bn_ptr[b2 + 1]):
                    dup = False
                    for j in range(naff):
                        if aff[j] == bn_nets[k]:
                            dup = True
                            break
                    if not dup:
                        aff[naff] = bn_nets[k]
                        naff += 1
            delta = 0.0
            for j in range(naff):
                v = _hpwl(aff[j], block_slot, slot_x, slot_y, net_ptr, net_pins, net_w)
                newc[j] = v
                delta += v - net_cost[aff[j]]
            if delta <= 0.0 or r_acc[i] < exp(-delta / temperature):
                for j in range(naff):
                    net_cost[aff[j]] = newc[j]
                cost += delta
                accepted += 1
            else:
                block_slot[b] = s
                slot_block[s] = b
                slot_block[t] = b2
                if b2 >= 0:
                    block_slot[b2] = t
            trace[i] = cost
    finally:
        free(aff)
        free(newc)
    return accepted, cost


# binary min-heap on (key, node), ties on lowest node id
cdef inline bint _less(double ka, long na, double kb, long nb) nogil:
    return ka < kb or (ka == kb and na < nb)


cdef struct Heap:
    double *key
    long *node
    long size
    long capacity


cdef int _push(Heap *h, double key, long node) nogil:
    cdef long i, p
    cdef double *nk
    cdef long *nn
    if h.size == h.capacity:
        h.capacity *= 2
        nk = <double *> malloc(h.capacity * sizeof(double))
        nn = <long *> malloc(h.capacity * sizeof(long))
        for i in range(h.size):
            nk[i] = h.key[i]
            nn[i] = h.node[i]
        free(h.key)
        free(h.node)
        h.key = nk
        h.node = nn
    i = h.size
    h.size += 1
    while i > 0:
        p = (i - 1) // 2
        if _less(key, node, h.key[p], h.node[p]):
            h.key[i] = h.key[p]
            h.node[i] = h.node[p]
            i = p
        else:
            break
    h.key[i] = key
    h.node[i] = node
    return 0


cdef void _pop(Heap *h, double *key, long *node) nogil:
    cdef long i = 0, c, n
    cdef double lk
    cdef long ln
    key[0] = h.key[0]
    node[0] = h.node[0]
    h.size -= 1
    n = h.size
    if n == 0:
        return
    lk = h.key[n]
    ln = h.node[n]
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and _less(h.key[c + 1], h.node[c + 1], h.key[c], h.node[c]):
            c += 1
        if _less(h.key[c], h.node[c], lk, ln):
            h.key[i] = h.key[c]
            h.node[i] = h.node[c]
            i = c
        else:
            break
    h.key[i] = lk
    h.node[i] = ln


def route_search(long[::1] ptr, long[::1] dst, double[::1] base, long[::1] occ, long[::1] cap,
                 double[::1] hist, double pres_fac, double[::1] dterm,
                 long[::1] xlo, long[::1] xhi, long[::1] ylo, long[::1] yhi,
                 long bx0, long bx1, long by0, long by1, long[::1] tree, long target):
    cdef long nnodes = ptr.shape[0] - 1, i, k, u, v, over, ntree = tree.shape[0]
    cdef double d, nd, pen
    cdef bint found = False
    dist_arr = np.full(nnodes, np.inf)
    prev_arr = np.full(nnodes, -2, dtype=np.int64)
    cdef double[::1] dist = dist_arr
    cdef long[::1] prev = prev_arr
    cdef Heap h
    h.capacity = 64 if ntree < 32 else 2 * ntree
    h.size = 0
    h.key = <double *> malloc(h.capacity * sizeof(double))
    h.node = <long *> malloc(h.capacity * sizeof(long))
    try:
        for i in range(ntree):
            u = tree[i]
            if prev[u] == -2:
                dist[u] = 0.0
                prev[u] = -1
                _push(&h, 0.0, u)
        while h.size > 0:
            _pop(&h, &d, &u)
            if d > dist[u]:
                continue
            if u == target:
                found = True
                break
            for k in range(ptr[u], ptr[u + 1]):
                v = dst[k]
                if xhi[v] < bx0 or xlo[v] > bx1 or yhi[v] < by0 or ylo[v] > by1:
                    continue
                over = occ[v] + 1 - cap[v]
                if over > 0:
                    pen = 1.0 + pres_fac * over
                else:
                    pen = 1.0
                nd = d + (base[v] * pen * hist[v] + dterm[v])
                if prev[v] == -2 or nd < dist[v]:
                    dist[v] = nd
                    prev[v] = u
                    _push(&h, nd, v)
    finally:
        free(h.key)
        free(h.node)
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
