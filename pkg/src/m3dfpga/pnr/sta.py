"""Longest-path static timing over a timing DAG."""
from __future__ import annotations

from dataclasses import dataclass, field


class CombinationalCycleError(ValueError):
    def __init__(self, cycle):
        super().__init__("combinational cycle: " + " -> ".join(map(str, cycle)))
        self.cycle = cycle


@dataclass
class TimingGraph:
    node_delay: dict = field(default_factory=dict)  # node -> delay through it
    edges: list = field(default_factory=list)  # (u, v, delay)

    def add_node(self, name, delay: float = 0.0):
        self.node_delay[name] = delay

    def add_edge(self, u, v, delay: float = 0.0):
        self.edges.append((u, v, delay))


@dataclass
class StaResult:
    cpd: float
    f_max: float
    arrival: dict
    critical_path: list


def _find_cycle(nodes, succ):
    colour = {n: 0 for n in nodes}
    stack_path = []

    def dfs(u):
        colour[u] = 1
        stack_path.append(u)
        for v, _ in succ.get(u, ()):
            if v not in colour:
                continue
            if colour[v] == 1:
                return stack_path[stack_path.index(v):] + [v]
            if colour[v] == 0:
                found = dfs(v)
                if found:
                    return found
        colour[u] = 2
        stack_path.pop()
        return None

    for n in nodes:
        if colour[n] == 0:
            found = dfs(n)
            if found:
                return found
    return list(nodes)[:1]


def longest_path(tg: TimingGraph) -> StaResult:
    """Arrival(v) = delay(v) + max over fan-in (arrival(u) + edge delay).

    Nodes are processed in Kahn order with ties in insertion order.
    """
    succ: dict = {}
    indeg = {n: 0 for n in tg.node_delay}
    for u, v, d in tg.edges:
        succ.setdefault(u, []).append((v, d))
        indeg[v] += 1
    arrival = {}
    best_in = {}
    ready = [n for n, k in indeg.items() if k == 0]
    for n in ready:
        arrival[n] = tg.node_delay[n]
        best_in[n] = None
    head = 0
    fanin_best = {}
    while head < len(ready):
        u = ready[head]
        head += 1
        if u not in arrival:
            cand = fanin_best.get(u)
            arrival[u] = tg.node_delay[u] + (cand[0] if cand else 0.0)
            best_in[u] = cand[1] if cand else None
        for v, d in succ.get(u, ()):
            t = arrival[u] + d
            cur = fanin_best.get(v)
            if cur is None or t > cur[0]:
                fanin_best[v] = (t, u)
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    if len(arrival) != len(tg.node_delay):
        left = [n for n in tg.node_delay if n not in arrival]
        raise CombinationalCycleError(_find_cycle(left, succ))
    if not arrival:
        return StaResult(0.0, 0.0, {}, [])
    end = max(arrival, key=lambda n: arrival[n])
    cpd = arrival[end]
    path = [end]
    while best_in.get(path[-1]) is not None:
        path.append(best_in[path[-1]])
    path.reverse()
    return StaResult(cpd, 1.0 / cpd if cpd > 0 else 0.0, arrival, path)
