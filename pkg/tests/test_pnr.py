import itertools
import math

import numpy as np
import pytest

from m3dfpga.pnr import (
    BlifError,
    CombinationalCycleError,
    PackError,
    RouterConfig,
    TimingGraph,
    UnroutableError,
    check_packing,
    check_routing,
    design_metrics,
    emit_blif,
    longest_path,
    pack_netlist,
    parse_blif,
    route_pathfinder,
    run_flow,
)
from m3dfpga.pnr.blif import truth_table
from m3dfpga.pnr.flow import build_timing_graph, congestion_csv, metrics_csv, metrics_rows
from m3dfpga.pnr.place import CLB, IO, Grid, PlacementError, fit_grid, place_sa, placement_cost
from m3dfpga.pnr.route import RouteRequest
from m3dfpga.pnr.rrgraph import (
    CHANX, CHANY, IPIN, SW_SB, build_rr_graph, chan_node_count, custom_graph, track_types,
)
from m3dfpga.tile import TileSpec

# ---------------------------------------------------------------------------
# BLIF


def test_empty_model():
    nl = parse_blif(".model empty\n.end\n")
    assert nl.name == "empty" and not nl.luts and not nl.inputs


def test_and_gate():
    nl = parse_blif(".model g\n.inputs a b\n.outputs y\n.names a b y\n11 1\n.end\n")
    assert truth_table(nl.luts["y"]) == {"00": 0, "01": 0, "10": 0, "11": 1}


def test_off_set_cover():
    nl = parse_blif(".model g\n.inputs a b\n.outputs y\n.names a b y\n00 0\n.end\n")
    assert truth_table(nl.luts["y"]) == {"00": 0, "01": 1, "10": 1, "11": 1}


def test_continuation_and_comments():
    nl = parse_blif(".model g # top\n.inputs a \\\n b\n.outputs y\n.names a b y\n1- 1\n.end\n")
    assert nl.inputs == ["a", "b"]


def _random_netlist(rng, n_in=8, n_luts=50, k=4):
    lines = [".model rnd", ".inputs " + " ".join(f"i{j}" for j in range(n_in))]
    nets = [f"i{j}" for j in range(n_in)]
    body = []
    for j in range(n_luts):
        ins = list(rng.choice(nets, size=min(k, len(nets)), replace=False))
        body.append(".names " + " ".join(ins) + f" n{j}")
        for m in range(2 ** len(ins)):
            if rng.random() < 0.5:
                body.append(format(m, f"0{len(ins)}b") + " 1")
        nets.append(f"n{j}")
    lines.append(".outputs " + " ".join(f"n{j}" for j in range(n_luts - 4, n_luts)))
    return "\n".join(lines + body + [".end"]) + "\n"


def test_round_trip_isomorphic():
    rng = np.random.default_rng(50)
    a = parse_blif(_random_netlist(rng))
    b = parse_blif(emit_blif(a))
    assert a.inputs == b.inputs and a.outputs == b.outputs
    assert a.luts.keys() == b.luts.keys()
    for name in a.luts:
        assert a.luts[name].inputs == b.luts[name].inputs
        assert truth_table(a.luts[name]) == truth_table(b.luts[name])
    assert emit_blif(b) == emit_blif(a)


def test_corpus_round_trip(corpus):
    for nl in corpus.values():
        assert emit_blif(parse_blif(emit_blif(nl))) == emit_blif(nl)


@pytest.mark.parametrize("text", [
    ".inputs a\n",
    ".model a\n.model b\n",
    ".model a\n.inputs a a\n",
    ".model a\n.subckt foo\n",
    ".model a\n11 1\n",
    ".model a\n.inputs x\n.names x y\n2 1\n",
    ".model a\n.names q y\n1 1\n",
    ".model a\n.outputs z\n",
    ".model a\n.end\n.names y\n",
    "",
])
def test_blif_errors(text):
    with pytest.raises(BlifError):
        parse_blif(text)


# ---------------------------------------------------------------------------
# packing


def _chain(n, name="c"):
    lines = [f".model {name}", ".inputs a", f".outputs n{n - 1}"]
    prev = "a"
    for j in range(n):
        lines += [f".names {prev} n{j}", "0 1"]
        prev = f"n{j}"
    return parse_blif("\n".join(lines + [".end"]) + "\n")


def test_pack_capacity():
    clusters = pack_netlist(_chain(25), TileSpec())
    assert len(clusters) >= 3
    assert check_packing(_chain(25), clusters, TileSpec()) == []


def test_chain_fills_clusters():
    clusters = pack_netlist(_chain(10), TileSpec())
    assert len(clusters) == 1


def test_pack_legal_on_corpus(corpus):
    spec = TileSpec()
    for nl in corpus.values():
        clusters = pack_netlist(nl, spec)
        assert check_packing(nl, clusters, spec) == []
        assert len(clusters) >= math.ceil((len(nl.luts)) / spec.n)


def test_pack_input_limit():
    rng = np.random.default_rng(4)
    nl = parse_blif(_random_netlist(rng, n_in=30, n_luts=40, k=6))
    spec = TileSpec(i=12)
    assert check_packing(nl, pack_netlist(nl, spec), spec) == []


def test_pack_unmappable():
    nl = parse_blif(".model w\n.inputs a b c d e f g\n.outputs y\n.names a b c d e f g y\n1111111 1\n.end\n")
    with pytest.raises(PackError):
        pack_netlist(nl, TileSpec())


def test_latch_absorbed():
    nl = parse_blif(".model r\n.inputs a\n.outputs q\n.names a d\n1 1\n.latch d q re clk 0\n.end\n")
    (cl,) = pack_netlist(nl, TileSpec())
    assert len(cl.bles) == 1 and cl.bles[0].lut == "d" and cl.bles[0].latch == "q"


def test_check_packing_detects_loss():
    nl = _chain(12)
    clusters = pack_netlist(nl, TileSpec())
    clusters[0].bles.pop()
    assert check_packing(nl, clusters, TileSpec())


# ---------------------------------------------------------------------------
# placement


def test_place_single_clb():
    p = place_sa([CLB, IO], [[0, 1]], Grid(1, 1), seed=3)
    assert p.locs[0] == (1, 1, 0)
    assert p.cost == placement_cost(p.locs, [[0, 1]])


def test_place_pair_adjacent():
    p = place_sa([CLB, CLB], [[0, 1]], Grid(1, 2), seed=1)
    assert p.cost == 1.0
    assert {p.locs[0][:2], p.locs[1][:2]} == {(1, 1), (1, 2)}


def test_place_vs_exhaustive_2x2():
    rng = np.random.default_rng(9)
    grid = Grid(2, 2)
    cells = [(x, y, 0) for x in (1, 2) for y in (1, 2)]
    for trial in range(5):
        nets = [list(rng.choice(4, size=int(rng.integers(2, 4)), replace=False)) for _ in range(6)]
        weights = list(rng.uniform(0.5, 2.0, len(nets)))
        best = min(placement_cost(list(perm), nets, weights) for perm in itertools.permutations(cells))
        p = place_sa([CLB] * 4, nets, grid, seed=trial, weights=weights)
        assert p.cost <= 1.1 * best + 1e-12


def test_place_deterministic():
    rng = np.random.default_rng(1)
    types = [CLB] * 12 + [IO] * 6
    nets = [list(rng.choice(18, size=3, replace=False)) for _ in range(20)]
    grid = fit_grid(12, 6)
    a = place_sa(types, nets, grid, seed=7)
    b = place_sa(types, nets, grid, seed=7)
    assert a.locs == b.locs and a.cost == b.cost
    assert a.cost == placement_cost(a.locs, nets)


def test_place_legal():
    rng = np.random.default_rng(2)
    types = [CLB] * 9 + [IO] * 20
    nets = [list(rng.choice(29, size=4, replace=False)) for _ in range(30)]
    p = place_sa(types, nets, fit_grid(9, 20), seed=2)
    assert len(set(p.locs)) == len(p.locs)
    slots = {s[1:]: s[0] for s in p.grid.slots()}
    assert all(slots[loc] == t for loc, t in zip(p.locs, types))


def test_place_capacity_error():
    with pytest.raises(PlacementError):
        place_sa([CLB] * 5, [], Grid(2, 2))


# ---------------------------------------------------------------------------
# routing-resource graph


def _wires(rr):
    return np.flatnonzero((rr.kind == CHANX) | (rr.kind == CHANY))


def test_rr_recount_l1():
    spec = TileSpec(w=4, l=1)
    rr = build_rr_graph(None, spec, Grid(2, 2))
    # 3 channel rows x 2 tiles x 4 tracks, same for columns
    assert len(_wires(rr)) == 48 == chan_node_count(4, 1, 2, 2)


@pytest.mark.parametrize("w,l,n", [(4, 2, 3), (10, 4, 5), (6, 3, 4)])
def test_rr_recount_mixed(w, l, n):
    spec = TileSpec(w=w, l=l)
    rr = build_rr_graph(None, spec, Grid(n, n), long_fraction=0.5)
    assert len(_wires(rr)) == chan_node_count(w, l, n, n, 0.5)
    # every tile position of every channel is covered exactly once per track
    for t in range(w):
        sel = _wires(rr)[rr.track[_wires(rr)] == t]
        span = sum(int(rr.xhi[i] - rr.xlo[i] + 1 + rr.yhi[i] - rr.ylo[i]) for i in sel)
        assert span == 2 * (n + 1) * n
    longs = sum(1 for length, _ in track_types(w, l, 0.5) if length == l)
    assert longs == w // 2


def test_sb_disjoint_bidirectional():
    spec = TileSpec(w=6, l=2)
    rr = build_rr_graph(None, spec, Grid(3, 3))
    wires = set(_wires(rr).tolist())
    for u in wires:
        for v in rr.out_edges(u).tolist():
            if v in wires:
                assert rr.track[u] == rr.track[v]
                assert rr.has_edge(v, u)


def test_fs_bound_l1():
    spec = TileSpec(w=4, l=1)
    rr = build_rr_graph(None, spec, Grid(3, 3))
    wires = set(_wires(rr).tolist())
    for u in wires:
        nb = [v for v in rr.out_edges(u).tolist() if v in wires]
        assert len(nb) <= 2 * spec.fs


def test_fc_in_full():
    spec = TileSpec(w=8, l=1, fc_in=1.0)
    rr = build_rr_graph(None, spec, Grid(2, 2))
    ipins = np.flatnonzero(rr.kind == IPIN)
    fanin = {int(i): 0 for i in ipins}
    for u in _wires(rr).tolist():
        for v in rr.out_edges(u).tolist():
            if v in fanin:
                fanin[v] += 1
    assert set(fanin.values()) == {8}


# ---------------------------------------------------------------------------
# routing


def _bellman_ford(n, edges, cost, src):
    d = [math.inf] * n
    d[src] = 0.0
    for _ in range(n):
        changed = False
        for u, v in edges:
            if d[u] + cost[v] < d[v]:
                d[v] = d[u] + cost[v]
                changed = True
        if not changed:
            break
    return d


def _path_cost(tree, sink, cost):
    total, node = 0.0, sink
    while tree[node] != -1:
        total += cost[node]
        node = tree[node]
    return total


def test_single_net_vs_oracle():
    rng = np.random.default_rng(17)
    for _ in range(30):
        n = int(rng.integers(6, 30))
        edges = {(int(a), int(b)) for a, b in rng.integers(0, n, size=(4 * n, 2)) if a != b}
        edges |= {(j, j + 1) for j in range(n - 1)}
        base = rng.uniform(0.5, 3.0, n)
        delay = rng.uniform(0.0, 2.0, n)
        rr = custom_graph(n, sorted(edges), base=base, delay=delay)
        cfg = RouterConfig(timing_weight=0.7)
        cost = base + cfg.timing_weight * delay / delay.mean()
        routing = route_pathfinder(rr, [RouteRequest("a", 0, (n - 1,))], cfg)
        oracle = _bellman_ford(n, sorted(edges), cost, 0)
        assert _path_cost(routing.trees["a"], n - 1, cost) == pytest.approx(oracle[n - 1], rel=1e-12)


def test_adjacent_route():
    rr = custom_graph(2, [(0, 1)])
    routing = route_pathfinder(rr, [RouteRequest("a", 0, (1,))])
    assert routing.trees["a"] == {0: -1, 1: 0}
    assert routing.iterations == 1


def test_congestion_detour():
    # both nets prefer node 2; one must take the longer branch through 3 and 4
    edges = [(0, 2), (1, 2), (2, 5), (2, 6), (0, 3), (3, 4), (4, 5), (1, 7), (7, 8), (8, 6)]
    rr = custom_graph(9, edges)
    reqs = [RouteRequest("a", 0, (5,)), RouteRequest("b", 1, (6,))]
    routing = route_pathfinder(rr, reqs)
    assert routing.converged and routing.iterations > 1
    assert check_routing(rr, reqs, routing) == []
    assert int(routing.occ.max()) == 1


def test_unroutable():
    edges = [(0, 2), (1, 2), (2, 3), (2, 4)]
    rr = custom_graph(5, edges)
    reqs = [RouteRequest("a", 0, (3,)), RouteRequest("b", 1, (4,))]
    with pytest.raises(UnroutableError) as info:
        route_pathfinder(rr, reqs, RouterConfig(max_iters=5))
    assert 2 in info.value.overuse
    with pytest.raises(UnroutableError):
        route_pathfinder(custom_graph(3, [(0, 1)]), [RouteRequest("a", 0, (2,))])


def test_check_routing_catches_errors():
    rr = custom_graph(3, [(0, 1), (1, 2)])
    reqs = [RouteRequest("a", 0, (2,))]
    routing = route_pathfinder(rr, reqs)
    routing.trees["a"] = {0: -1, 2: 0}
    assert any("no edge" in p for p in check_routing(rr, reqs, routing))


def test_corpus_routing_legal(routed):
    for d in routed.values():
        assert d.routing.converged
        assert check_routing(d.rr, d.requests, d.routing) == []


# ---------------------------------------------------------------------------
# timing


def _oracle_longest(tg):
    """Longest path by repeated relaxation until a fixed point."""
    arr = dict(tg.node_delay)
    for _ in range(len(arr) + 1):
        changed = False
        for u, v, d in tg.edges:
            t = arr[u] + d + tg.node_delay[v]
            if t > arr[v]:
                arr[v] = t
                changed = True
        if not changed:
            return arr
    raise AssertionError("cycle")


def test_series_luts():
    tg = TimingGraph()
    for j in range(4):
        tg.add_node(j, 1.0)
    for j in range(3):
        tg.add_edge(j, j + 1, 0.5)
    res = longest_path(tg)
    assert res.cpd == pytest.approx(5.5)
    assert res.critical_path == [0, 1, 2, 3]
    assert res.f_max == pytest.approx(1 / 5.5)


def test_random_dag_vs_oracle():
    rng = np.random.default_rng(21)
    for _ in range(20):
        n = int(rng.integers(2, 60))
        tg = TimingGraph()
        for j in range(n):
            tg.add_node(j, float(rng.uniform(0, 2)))
        for _ in range(3 * n):
            a, b = sorted(rng.choice(n, 2, replace=False))
            tg.add_edge(int(a), int(b), float(rng.uniform(0, 1)))
        res = longest_path(tg)
        oracle = _oracle_longest(tg)
        assert res.cpd == pytest.approx(max(oracle.values()), rel=1e-12)
        for k, v in oracle.items():
            assert res.arrival[k] == pytest.approx(v, rel=1e-12)


def test_cycle_error():
    tg = TimingGraph()
    for j in "abc":
        tg.add_node(j, 1.0)
    tg.add_edge("a", "b")
    tg.add_edge("b", "c")
    tg.add_edge("c", "b")
    with pytest.raises(CombinationalCycleError) as info:
        longest_path(tg)
    assert set(info.value.cycle) == {"b", "c"}


def test_empty_timing_graph():
    assert longest_path(TimingGraph()).cpd == 0.0


def test_corpus_sta_vs_oracle(routed):
    for d in routed.values():
        tg = build_timing_graph(d)
        oracle = _oracle_longest(tg)
        assert longest_path(tg).cpd == pytest.approx(max(oracle.values()), rel=1e-12)


# ---------------------------------------------------------------------------
# metrics


def test_metric_identities(routed):
    for d in routed.values():
        m = design_metrics(d)
        assert m.at2 == pytest.approx(m.a_tot * m.cpd ** 2, rel=1e-12)
        assert m.f_max == pytest.approx(1 / m.cpd, rel=1e-12)
        assert m.a_tot == pytest.approx(len(d.clusters) * d.arch.tile["footprint"])
        used = [n for n in d.routing.used_nodes() if d.rr.kind[n] in (CHANX, CHANY)]
        assert sum(m.occupancy.values()) == len(used)
        assert 0.0 <= m.long_fraction() <= 1.0


def test_empty_design(archs):
    m = design_metrics(run_flow(parse_blif(".model e\n.end\n"), archs["CMOS_2D"]))
    assert (m.cpd, m.f_max, m.a_tot, m.at2) == (0.0, 0.0, 0.0, 0.0)


def test_flow_deterministic(corpus, archs):
    nl = corpus["huffman_fsm"]
    a = design_metrics(run_flow(nl, archs["M3D_FULL"], seed=2))
    b = design_metrics(run_flow(nl, archs["M3D_FULL"], seed=2))
    assert a == b


def test_metrics_csv(routed):
    m = design_metrics(routed["aes_round"])
    text = metrics_csv(metrics_rows("aes_round", "CMOS_2D", m))
    lines = text.strip().splitlines()
    assert lines[0].startswith("benchmark,variant,cpd_s")
    assert len(lines) == 1 + len(m.occupancy)
    assert congestion_csv(m).splitlines()[0]
