import os
import subprocess
import sys

import numpy as np
import pytest

from m3dfpga import kernels
from m3dfpga.pnr import design_metrics, parse_blif, run_flow

from test_pnr import _random_netlist

try:
    from m3dfpga import _kernels  # noqa: F401
    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False


@pytest.fixture
def restore_backend():
    before = kernels.BACKEND
    yield
    kernels.use_backend(before)


def test_env_forces_python():
    env = dict(os.environ, M3DFPGA_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import m3dfpga.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernels not built")
def test_backends_identical(archs, restore_backend):
    rng = np.random.default_rng(33)
    nl = parse_blif(_random_netlist(rng, n_in=12, n_luts=60, k=5))
    out = {}
    for name in ("python", "cython"):
        kernels.use_backend(name)
        d = run_flow(nl, archs["M3D_FULL"], seed=4)
        out[name] = (d.placement.locs, d.placement.cost, d.routing.trees, d.routing.occ.tolist(),
                     design_metrics(d))
    assert out["python"] == out["cython"]
