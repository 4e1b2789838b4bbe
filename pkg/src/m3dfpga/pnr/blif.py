"""BLIF subset reader and writer.

Accepted directives: .model, .inputs, .outputs, .names, .latch, .end.
Everything else is rejected with a line-numbered diagnostic.
"""
from __future__ import annotations

from dataclasses import dataclass, field


class BlifError(ValueError):
    pass


@dataclass(frozen=True)
class Lut:
    name: str  # output net
    inputs: tuple
    cover: tuple  # ((input pattern, output bit), ...)


@dataclass(frozen=True)
class Latch:
    name: str  # output net
    input: str
    clock: str | None = None
    init: int = 3


@dataclass
class LogicNetlist:
    name: str = "top"
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    luts: dict = field(default_factory=dict)
    latches: dict = field(default_factory=dict)

    def driver(self, net: str) -> str:
        if net in self.luts:
            return "lut"
        if net in self.latches:
            return "latch"
        if net in self.inputs:
            return "input"
        raise KeyError(net)

    def nets(self) -> list:
        seen = dict.fromkeys(self.inputs)
        seen.update(dict.fromkeys(self.luts))
        seen.update(dict.fromkeys(self.latches))
        return list(seen)

    def fanout(self) -> dict:
        """net -> list of (kind, consumer) in netlist order."""
        out = {n: [] for n in self.nets()}
        for lut in self.luts.values():
            for i in lut.inputs:
                out[i].append(("lut", lut.name))
        for la in self.latches.values():
            out[la.input].append(("latch", la.name))
        for o in self.outputs:
            out[o].append(("output", o))
        return out


def _logical_lines(text: str):
    buf, start = "", None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if start is None:
            start = lineno
        if line.endswith("\\"):
            buf += line[:-1] + " "
            continue
        buf += line
        if buf.strip():
            yield start, buf.split()
        buf, start = "", None
    if buf.strip():
        yield start, buf.split()


def parse_blif(text: str, source: str = "<blif>") -> LogicNetlist:
    nl = LogicNetlist()
    seen_model = False
    ended = False
    names_cur = None  # (lineno, inputs, output, rows)

    def err(lineno, msg):
        raise BlifError(f"{source}:{lineno}: {msg}")

    def define(lineno, net):
        if net in nl.luts or net in nl.latches or net in nl.inputs:
            err(lineno, f"duplicate driver for net {net!r}")

    def close_names():
        nonlocal names_cur
        if names_cur is None:
            return
        lineno, ins, out, rows = names_cur
        define(lineno, out)
        nl.luts[out] = Lut(out, tuple(ins), tuple(rows))
        names_cur = None

    for lineno, tok in _logical_lines(text):
        head = tok[0]
        if ended:
            err(lineno, "content after .end")
        if head.startswith("."):
            close_names()
            if head == ".model":
                if seen_model:
                    err(lineno, "multiple .model blocks are not supported")
                seen_model = True
                nl.name = tok[1] if len(tok) > 1 else "top"
            elif not seen_model:
                err(lineno, f"{head} before .model")
            elif head == ".inputs":
                for n in tok[1:]:
                    define(lineno, n)
                    nl.inputs.append(n)
            elif head == ".outputs":
                nl.outputs.extend(tok[1:])
            elif head == ".names":
                if len(tok) < 2:
                    err(lineno, ".names needs an output")
                names_cur = (lineno, tok[1:-1], tok[-1], [])
            elif head == ".latch":
                if len(tok) < 3:
                    err(lineno, ".latch needs input and output")
                clock = None
                init = 3
                rest = tok[3:]
                if rest and rest[0] in ("fe", "re", "ah", "al", "as"):
                    clock = rest[1] if len(rest) > 1 else None
                    rest = rest[2:]
                if rest:
                    try:
                        init = int(rest[0])
                    except ValueError:
                        err(lineno, f"bad latch init value {rest[0]!r}")
                define(lineno, tok[2])
                nl.latches[tok[2]] = Latch(tok[2], tok[1], clock, init)
            elif head == ".end":
                ended = True
            else:
                err(lineno, f"unsupported directive {head}")
        else:
            if names_cur is None:
                err(lineno, "cover row outside .names")
            _, ins, _, rows = names_cur
            if len(ins) == 0:
                if len(tok) != 1 or tok[0] not in ("0", "1"):
                    err(lineno, "constant cover must be a single 0 or 1")
                rows.append(("", int(tok[0])))
            else:
                if len(tok) != 2 or len(tok[0]) != len(ins) or set(tok[0]) - set("01-") \
                        or tok[1] not in ("0", "1"):
                    err(lineno, f"malformed cover row {' '.join(tok)!r}")
                rows.append((tok[0], int(tok[1])))
    close_names()
    if not seen_model:
        raise BlifError(f"{source}: no .model found")
    _check_declared(nl, source)
    return nl


def _check_declared(nl: LogicNetlist, source: str):
    known = set(nl.inputs) | set(nl.luts) | set(nl.latches)
    for lut in nl.luts.values():
        for i in lut.inputs:
            if i not in known:
                raise BlifError(f"{source}: undeclared signal {i!r} used by {lut.name!r}")
    for la in nl.latches.values():
        if la.input not in known:
            raise BlifError(f"{source}: undeclared signal {la.input!r} used by latch {la.name!r}")
    for o in nl.outputs:
        if o not in known:
            raise BlifError(f"{source}: output {o!r} has no driver")


def emit_blif(nl: LogicNetlist) -> str:
    lines = [f".model {nl.name}"]
    lines.append(" ".join([".inputs", *nl.inputs]))
    lines.append(" ".join([".outputs", *nl.outputs]))
    for la in nl.latches.values():
        parts = [".latch", la.input, la.name]
        if la.clock is not None:
            parts += ["re", la.clock]
        parts.append(str(la.init))
        lines.append(" ".join(parts))
    for lut in nl.luts.values():
        lines.append(" ".join([".names", *lut.inputs, lut.name]))
        for pat, bit in lut.cover:
            lines.append(f"{pat} {bit}" if pat else str(bit))
    lines.append(".end")
    return "\n".join(lines) + "\n"


def truth_table(lut: Lut) -> dict:
    """Full truth table {input bits string: output} from the cover."""
    k = len(lut.inputs)
    on = [p for p, b in lut.cover if b == 1]
    off_cover = any(b == 0 for _, b in lut.cover)
    table = {}
    for m in range(2 ** k):
        bits = format(m, f"0{k}b") if k else ""
        hit = any(all(c == "-" or c == b for c, b in zip(p, bits)) for p in
                  (on if not off_cover else [p for p, b in lut.cover if b == 0]))
        table[bits] = int(hit) if not off_cover else int(not hit)
    return table
