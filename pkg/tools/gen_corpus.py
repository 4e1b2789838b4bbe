"""Generate the desk-scale BLIF corpus (pre-mapped to 6-input LUTs).

    python3 tools/gen_corpus.py [out_dir]

Output is deterministic.  Each circuit is a reduced stand-in for a
larger accelerator kernel: FFT butterfly, systolic GEMM slice, AES round
slice, Huffman tree-walk FSM, SpMV accumulator, CNN window MAC.
"""
from __future__ import annotations

import itertools
import sys
from pathlib import Path

import numpy as np

K = 6


class Builder:
    def __init__(self, name: str):
        self.name = name
        self.inputs: list = []
        self.outputs: list = []
        self.luts: list = []  # (out, ins, rows)
        self.latches: list = []  # (d, q)
        self._n = 0

    def net(self, prefix="n") -> str:
        self._n += 1
        return f"{prefix}{self._n}"

    def input_bus(self, name, width):
        bus = [f"{name}{i}" for i in range(width)]
        self.inputs += bus
        return bus

    def output_bus(self, bits):
        self.outputs += bits

    def lut(self, ins, fn) -> str:
        ins = list(dict.fromkeys(ins))
        if len(ins) > K:
            return self.lut_wide(ins, fn)
        out = self.net()
        rows = []
        for bits in itertools.product((0, 1), repeat=len(ins)):
            if fn(bits):
                rows.append("".join(map(str, bits)))
        if not rows:
            rows = None  # constant 0
        self.luts.append((out, ins, rows))
        return out

    def lut_wide(self, ins, fn) -> str:
        """Shannon split on the trailing inputs, then a mux LUT."""
        head, tail = ins[:-2], ins[-2:]
        cof = []
        for sel in itertools.product((0, 1), repeat=len(tail)):
            cof.append(self.lut(head, lambda b, s=sel: fn(tuple(b) + s)))
        n = len(tail)
        return self.lut(tail + cof, lambda b: b[n + int("".join(map(str, b[:n])), 2)])

    def xor(self, ins) -> str:
        ins = list(ins)
        while len(ins) > K:
            ins = [self.xor(ins[:K])] + ins[K:]
        return self.lut(ins, lambda b: sum(b) % 2)

    def reg(self, bits) -> list:
        qs = []
        for d in bits:
            q = self.net("q")
            self.latches.append((d, q))
            qs.append(q)
        return qs

    def adder(self, a, b, cin=None):
        s, c = [], cin
        for i in range(max(len(a), len(b))):
            ins = [x for x in (a[i] if i < len(a) else None, b[i] if i < len(b) else None, c) if x]
            s.append(self.lut(ins, lambda v: sum(v) % 2))
            c = self.lut(ins, lambda v: int(sum(v) >= 2))
        return s, c

    def mult(self, a, b):
        """Unsigned array multiplier."""
        acc = [self.lut([a[0], bj], lambda v: v[0] & v[1]) for bj in b]
        out = [acc[0]]
        acc = acc[1:]
        for i in range(1, len(a)):
            pp = [self.lut([a[i], bj], lambda v: v[0] & v[1]) for bj in b]
            s, c = self.adder(acc, pp)
            out.append(s[0])
            acc = s[1:] + [c]
        return out + acc

    def emit(self) -> str:
        lines = [f".model {self.name}", ".inputs " + " ".join(self.inputs),
                 ".outputs " + " ".join(self.outputs)]
        for d, q in self.latches:
            lines.append(f".latch {d} {q} re clk 0")
        for out, ins, rows in self.luts:
            lines.append(".names " + " ".join(ins + [out]))
            if rows is None:
                if ins:
                    lines.append("-" * len(ins) + " 0")
                else:
                    lines.append("0")
            else:
                lines += [f"{r} 1" if r else "1" for r in rows]
        lines.append(".end")
        return "\n".join(lines) + "\n"


def _butterfly(b, ar, ai, br, bi):
    # twiddle (1 - j)/2 by shift-and-add: t = ((br + bi) >> 1, (bi - br) >> 1)
    tr, _ = b.adder(br, bi)
    nbr = [b.lut([x], lambda v: 1 - v[0]) for x in br]
    ti, _ = b.adder(bi, nbr, b.lut([], lambda v: 1))
    tr, ti = tr[1:] + [tr[-1]], ti[1:] + [ti[-1]]
    outs = []
    for x, t in ((ar, tr), (ai, ti)):
        s, _ = b.adder(x, t)
        nt = [b.lut([v], lambda q: 1 - q[0]) for v in t]
        d, _ = b.adder(x, nt, b.lut([], lambda v: 1))
        outs += [s, d]
    return outs


def fft_butterfly():
    """Three radix-2 stages over eight points, registered between stages."""
    b = Builder("fft_butterfly")
    width, npts = 6, 8
    pts = [[b.reg(b.input_bus(f"x{p}{c}_", width)) for c in "ri"] for p in range(npts)]
    span = npts // 2
    while span >= 1:
        nxt = [None] * npts
        for p in range(npts):
            if p & span:
                continue
            q = p + span
            sr, dr, si, di = _butterfly(b, pts[p][0], pts[p][1], pts[q][0], pts[q][1])
            nxt[p], nxt[q] = [b.reg(sr[:width]), b.reg(si[:width])], [b.reg(dr[:width]), b.reg(di[:width])]
        pts = nxt
        span //= 2
    b.output_bus([x for p in pts for c in p for x in c])
    return b


def gemm_slice():
    """8x8 weight-stationary systolic array: 2-bit activations flow right,
    1-bit weights are shifted in from the top, 5-bit partial sums flow down."""
    b = Builder("gemm_slice")
    size, aw, pw = 8, 2, 5
    wload = b.input_bus("wl", size)
    acts = [b.input_bus(f"a{r}_", aw) for r in range(size)]
    psum = [[b.lut([], lambda v: 0)] * pw for _ in range(size)]
    wprev = wload
    for r in range(size):
        a = b.reg(acts[r])
        wq = b.reg(wprev)
        for c in range(size):
            addend = [b.lut([x, wq[c]], lambda v: v[0] & v[1]) for x in a]
            s, _ = b.adder(psum[c], addend)
            psum[c] = b.reg(s[:pw])
            a = b.reg(a)
        wprev = wq
    b.output_bus([x for col in psum for x in col])
    return b


def aes_round():
    """SubBytes on four key-mixed bytes, then a MixColumns-style XOR layer."""
    b = Builder("aes_round")
    rng = np.random.default_rng(7)
    nbytes = 8
    state = b.reg(b.input_bus("s", 8 * nbytes))
    key = b.input_bus("k", 8 * nbytes)
    sbox = rng.permutation(256)
    subs = []
    for byte in range(nbytes):
        x = [b.lut([state[8 * byte + i], key[8 * byte + i]], lambda v: v[0] ^ v[1]) for i in range(8)]
        for bit in range(8):
            subs.append(b.lut(x, lambda v, bit=bit: (int(sbox[int("".join(map(str, v)), 2)]) >> bit) & 1))
    n = len(subs)
    mixed = [b.xor([subs[i], subs[(i + 1) % n], subs[(i + 8) % n], subs[(i + 16) % n], key[i]])
             for i in range(n)]
    b.output_bus(b.reg(mixed))
    return b


def huffman_fsm():
    """Eight table-driven tree-walk decoders sharing one bit stream."""
    b = Builder("huffman_fsm")
    rng = np.random.default_rng(11)
    lanes = 8
    bits = b.input_bus("bit", lanes)
    en = b.input_bus("en", 1)
    outs = []
    for lane in range(lanes):
        st = [b.net("st") for _ in range(5)]
        tbl = rng.integers(0, 32, size=64)
        leaf = rng.integers(0, 2, size=32)
        sym = rng.integers(0, 256, size=32)
        for i, q in enumerate(st):
            d = b.lut(st + [bits[lane]] + en, lambda v, i=i, tbl=tbl: (
                (int(tbl[int("".join(map(str, v[:6])), 2)]) >> i) & 1 if v[6] else v[4 - i]))
            b.latches.append((d, q))
        valid = b.lut(st, lambda v, leaf=leaf: int(leaf[int("".join(map(str, v)), 2)]))
        syms = [b.lut(st, lambda v, j=j, sym=sym: (int(sym[int("".join(map(str, v)), 2)]) >> j) & 1)
                for j in range(8)]
        cnt = [b.net("cnt") for _ in range(8)]
        nxt, _ = b.adder(cnt, [valid], None)
        for d, q in zip(nxt, cnt):
            b.latches.append((d, q))
        outs += b.reg(syms + [valid]) + cnt
    b.output_bus(outs)
    return b


def spmv_acc():
    """Eight multiply-accumulate lanes that clear on a shared row-change flag."""
    b = Builder("spmv_acc")
    row = b.input_bus("row", 4)
    last = b.reg(row)
    same = b.lut(row + last[:2], lambda v: int(v[0] == v[4] and v[1] == v[5]))
    same2 = b.lut([same] + row[2:] + last[2:], lambda v: int(v[0] and v[1] == v[3] and v[2] == v[4]))
    outs = []
    for lane in range(8):
        p = b.mult(b.reg(b.input_bus(f"v{lane}_", 5)), b.reg(b.input_bus(f"x{lane}_", 5)))
        acc = [b.net("acc") for _ in range(14)]
        gated = [b.lut([a, same2], lambda v: v[0] & v[1]) for a in acc]
        s, _ = b.adder(gated, p)
        for d, q in zip(s, acc):
            b.latches.append((d, q))
        outs += acc
    b.output_bus(outs + [same2])
    return b


def cnn_mac():
    """3x3 window multiply-accumulate for two filters sharing the pixel
    registers: pipelined adder tree, accumulator and ReLU output stage."""
    b = Builder("cnn_mac")
    pix = [b.reg(b.input_bus(f"p{i}_", 4)) for i in range(9)]
    outs = []
    for f in range(2):
        wts = [b.input_bus(f"w{f}_{i}_", 3) for i in range(9)]
        terms = [b.reg(b.mult(p, w)) for p, w in zip(pix, wts)]
        while len(terms) > 1:
            nxt = []
            for x, y in zip(terms[::2], terms[1::2]):
                s, c = b.adder(x, y)
                nxt.append(b.reg(s + [c]))
            if len(terms) % 2:
                nxt.append(b.reg(terms[-1]))
            terms = nxt
        acc = [b.net("acc") for _ in range(12)]
        s, _ = b.adder(acc, terms[0])
        for d, q in zip(s, acc):
            b.latches.append((d, q))
        outs += b.reg([b.lut([a, acc[-1]], lambda v: v[0] & (1 - v[1])) for a in acc[:-1]])
    b.output_bus(outs)
    return b


CIRCUITS = (fft_butterfly, gemm_slice, aes_round, huffman_fsm, spmv_acc, cnn_mac)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    out = Path(argv[0]) if argv else Path(__file__).resolve().parents[1] / "src/m3dfpga/data/benchmarks"
    out.mkdir(parents=True, exist_ok=True)
    for make in CIRCUITS:
        b = make()
        (out / f"{b.name}.blif").write_text(b.emit())
        print(f"{b.name}: {len(b.luts)} LUTs, {len(b.latches)} latches, "
              f"{len(b.inputs)} inputs, {len(b.outputs)} outputs")


if __name__ == "__main__":
    main()
