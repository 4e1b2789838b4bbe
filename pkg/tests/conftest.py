import pytest

from m3dfpga.devices import load_tech
from m3dfpga.tile import ImplStyle, TileSpec, generate_tile


@pytest.fixture(scope="session")
def tech():
    return load_tech()


@pytest.fixture(scope="session")
def spec():
    return TileSpec()


@pytest.fixture(scope="session")
def tiles(tech, spec):
    """Default-spec tiles at the reference operating points."""
    styles = {
        "CMOS_2D": ImplStyle("CMOS_2D"),
        "M3D_SRAM_ONLY": ImplStyle("M3D_SRAM_ONLY"),
        "M3D_FULL": ImplStyle("M3D_FULL", v_sram_scb=1.2),
    }
    return {v: generate_tile(spec, tech, st) for v, st in styles.items()}


@pytest.fixture(scope="session")
def archs(tech, spec):
    """Sized architecture models of the two compared variants."""
    from m3dfpga.experiments import build_arch

    return {v: build_arch(v, spec, tech) for v in ("CMOS_2D", "M3D_FULL")}


@pytest.fixture(scope="session")
def corpus():
    from m3dfpga.experiments import load_corpus

    return load_corpus()


@pytest.fixture(scope="session")
def routed(corpus, archs):
    """Every shipped circuit run through the flow on the sized CMOS arch, seed 1."""
    from m3dfpga.pnr import run_flow

    return {name: run_flow(nl, archs["CMOS_2D"], seed=1) for name, nl in corpus.items()}
