"""The compiled kernels and their interpreted twins must agree."""

import json
import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from oligopoly import _kernels, dynamics
from oligopoly._accel import NUMBA_ENABLED

needs_numba = pytest.mark.skipif(not NUMBA_ENABLED, reason="numba backend not active")


def py(fn):
    return getattr(fn, "py_func", fn)


@needs_numba
def test_step_kernel_matches_python():
    rng = np.random.default_rng(1)
    for name in dynamics.PRESET_ORDER:
        model = dynamics.preset(name, 1.7, 0.3, 0.9)
        for _ in range(50):
            x = rng.uniform(0.01, 2, size=model.dim)
            a, b = np.empty_like(x), np.empty_like(x)
            assert _kernels.step_into(*model.kernel_args(), x, a) == py(_kernels.step_into)(*model.kernel_args(), x, b)
            np.testing.assert_allclose(a, b, rtol=1e-15, atol=0)


@needs_numba
def test_classify_kernel_matches_numpy_twin():
    from oligopoly.stability import char_poly_coefficients, classify_values, schur_cohn_values

    rng = np.random.default_rng(2)
    for n in (2, 3, 4):
        J = rng.uniform(-0.8, 0.8, size=(500, n, n))
        got = _kernels.classify_batch(J, 1e-12)
        rows = [[J[:, i, j] for j in range(n)] for i in range(n)]
        want = classify_values(schur_cohn_values(char_poly_coefficients(rows)), 1e-12)
        assert np.array_equal(got, want)


SCRIPT = textwrap.dedent("""
    import json, math
    import numpy as np
    from oligopoly import dynamics, region, backend_name
    m = dynamics.gbal(2.6, 0.4, 1.0)
    E = dynamics.interior_equilibrium(m)
    tr = dynamics.simulate(m, 1.02 * E, 3000)
    g = region.GridDef(ksqrtc_steps=40, l_steps=20)
    csv = region.export_region(region.scan_all(g), "csv")
    print(json.dumps({"backend": backend_name(), "label": tr.label, "steps": tr.steps_used,
                      "final": [float(v) for v in tr.final], "csv": csv}))
""")


def run_backend(flag):
    env = dict(os.environ, OLIGOPOLY_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def test_backends_agree_end_to_end():
    plain = run_backend("0")
    assert plain["backend"] == "numpy"
    if not NUMBA_ENABLED:
        pytest.skip("numba unavailable")
    fast = run_backend("1")
    assert fast["backend"] == "numba"
    assert fast["label"] == plain["label"] and fast["steps"] == plain["steps"]
    np.testing.assert_allclose(fast["final"], plain["final"], rtol=1e-12)
    assert fast["csv"] == plain["csv"]
