import csv
import io
import math

import pytest

from m3dfpga import experiments as ex
from m3dfpga.pnr import UnroutableError
from m3dfpga.sram import cell_from_tech


@pytest.fixture(scope="module")
def small(corpus):
    return {k: corpus[k] for k in ("aes_round", "huffman_fsm")}


@pytest.fixture(scope="module")
def report(small, archs):
    return ex.compare_architectures(small, archs["CMOS_2D"], archs["M3D_FULL"], seeds=(1, 2))


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_identity_comparison(small, archs):
    rep = ex.compare_architectures(small, archs["CMOS_2D"], archs["CMOS_2D"], seeds=(1,))
    for r in rep.rows:
        assert r.ok and r.delta_cpd == 0.0 and r.delta_area == 0.0 and r.delta_at2 == 0.0
    assert rep.geomean_delta_at2 == pytest.approx(0.0, abs=1e-15)


def test_at2_delta():
    assert ex.at2_delta(0.0, 0.0) == 0.0
    assert ex.at2_delta(-0.5, -0.5) == pytest.approx(0.5 * 0.25 - 1)
    assert ex.at2_delta(1.0, 0.0) == pytest.approx(1.0)


def test_report_consistent(report):
    for r in report.rows:
        assert r.at2_a == pytest.approx(r.a_tot_a * r.cpd_a ** 2, rel=1e-12)
        assert r.at2_b / r.at2_a - 1 == pytest.approx(r.delta_at2, rel=1e-9)
        per_seed = [report.metrics[(r.benchmark, "a", s)].cpd for s in report.seeds]
        assert min(per_seed) <= r.cpd_a <= max(per_seed)
        assert r.cpd_a == pytest.approx(math.prod(per_seed) ** (1 / len(per_seed)), rel=1e-12)
    ratios = [r.cpd_b / r.cpd_a - 1 for r in report.rows]
    assert min(ratios) - 1e-12 <= report.geomean_delta_cpd <= max(ratios) + 1e-12
    assert report.geomean_delta_at2 == pytest.approx(
        ex.at2_delta(report.geomean_delta_area, report.geomean_delta_cpd))


def test_comparison_csv(report):
    text = ex.comparison_csv(report)
    rows = _rows(text)
    assert tuple(rows[0]) == ex.COMPARE_COLUMNS
    assert [r["benchmark"] for r in rows] == ["aes_round", "huffman_fsm", "geomean"]
    for row, r in zip(rows, report.rows):
        assert float(row["delta_cpd"]) == pytest.approx(r.delta_cpd, rel=1e-8)
    assert ex.comparison_csv(report) == text


def test_occupancy(report):
    rows = ex.occupancy_rows(report)
    for bench in ("aes_round", "huffman_fsm"):
        for variant in ("CMOS_2D", "M3D_FULL"):
            fr = [f for b, v, _, _, f in rows if b == bench and v == variant]
            assert sum(fr) == pytest.approx(1.0)
    lf = ex.long_fraction_by_benchmark(report)
    assert set(lf) == {"aes_round", "huffman_fsm"}
    assert all(0 <= x <= 1 for pair in lf.values() for x in pair)


def test_unroutable_row_excluded(small, archs, monkeypatch):
    real = ex.run_flow

    def flaky(nl, arch, seed=0, **kw):
        if nl.name == "huffman_fsm" and seed == 2:
            raise UnroutableError("forced", {})
        return real(nl, arch, seed=seed, **kw)

    monkeypatch.setattr(ex, "run_flow", flaky)
    rep = ex.compare_architectures(small, archs["CMOS_2D"], archs["M3D_FULL"], seeds=(1, 2))
    bad = [r for r in rep.rows if not r.ok]
    assert [r.benchmark for r in bad] == ["huffman_fsm"]
    assert rep.warnings and "huffman_fsm" in rep.warnings[0]
    good = rep.ok_rows()[0]
    assert rep.geomean_delta_cpd == pytest.approx(good.cpd_b / good.cpd_a - 1, rel=1e-12)
    assert "failed" in ex.comparison_csv(rep)


def test_comparison_errors(archs):
    with pytest.raises(ex.ExperimentError):
        ex.compare_architectures({}, archs["CMOS_2D"], archs["M3D_FULL"])
    with pytest.raises(ex.ExperimentError):
        ex.compare_architectures({"x": None}, archs["CMOS_2D"], archs["M3D_FULL"], seeds=())


def test_retarget_identity():
    out = ex.retarget_estimate(ex.RetargetInput(100.0, 2.0, 1.0, 1.0))
    assert out["area"] == 100.0 and out["delay"] == 2.0
    assert out["deltas"] == {"area": 0.0, "delay": 0.0, "at2": 0.0}


def test_retarget_values():
    out = ex.retarget_estimate(ex.RetargetInput(10.0, 4.0, 0.5, 0.5))
    assert out["at2"] == pytest.approx(10.0 * 0.5 * (4.0 * 0.5) ** 2)
    assert out["deltas"]["at2"] == pytest.approx(ex.at2_delta(-0.5, -0.5))


@pytest.mark.parametrize("bad", [(0, 1, 1, 1), (1, -1, 1, 1), (1, 1, 0, 1), (1, 1, 1, float("nan"))])
def test_retarget_validation(bad):
    with pytest.raises(ex.ExperimentError):
        ex.RetargetInput(*bad)


def test_retarget_csv_round_trip():
    inp = ex.RetargetInput(1000.0, 3.0, 0.4, 0.9)
    rows = _rows(ex.retarget_csv(inp, ex.retarget_estimate(inp)))
    assert [r["quantity"] for r in rows] == ["area_mm2", "delay_ns", "at2_mm2ns2"]
    assert float(rows[0]["estimate"]) == pytest.approx(400.0)


def test_figure_5a_shares(tech, spec):
    rows = _rows(ex.reproduce_figure("5a", tech, spec))
    for variant in ("CMOS_2D", "M3D_SRAM_ONLY", "M3D_FULL"):
        assert sum(float(r["share"]) for r in rows if r["variant"] == variant) == pytest.approx(1.0)


def test_figure_csvs_deterministic(tech, spec):
    for fig in ("3c", "3d", "6b"):
        assert ex.reproduce_figure(fig, tech, spec) == ex.reproduce_figure(fig, tech, spec)


def test_figure_3d_shape(tech, spec):
    rows = _rows(ex.reproduce_figure("3d", tech, spec))
    m3d = [float(r["m3d_cpd_s"]) for r in rows]
    assert len(rows) == 5 and all(b < a for a, b in zip(m3d, m3d[1:]))


def test_figure_8_matches_report(small, tech, spec, report):
    text = ex.reproduce_figure("8", tech, spec, corpus=small, seeds=(1, 2))
    assert text == ex.comparison_csv(report)


def test_unknown_figure():
    with pytest.raises(ex.ExperimentError):
        ex.reproduce_figure("7z")


def test_analyze_sram_csv(tech):
    rows = _rows(ex.analyze_sram_csv(cell_from_tech(tech, "aos_6t"), [0.8, 1.0]))
    assert [float(r["v_sram"]) for r in rows] == [0.8, 1.0]
    assert all(float(r["static_power_w"]) > 0 and float(r["hsnm_v"]) > 0 for r in rows)


def test_load_corpus(tmp_path):
    (tmp_path / "a.blif").write_text(".model a\n.inputs x\n.outputs y\n.names x y\n1 1\n.end\n")
    assert list(ex.load_corpus([tmp_path])) == ["a"]
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(ex.ExperimentError):
        ex.load_corpus([empty])
    with pytest.raises(OSError):
        ex.load_corpus([tmp_path / "missing.blif"])
