"""Backend equivalence for the numeric kernels.

The compiled extension and the pure-NumPy reference implement the same
four entry points; everything downstream assumes they are
interchangeable, so these tests diff them directly on random batches and
on crafted degenerate rows.  When the extension is not built the
equivalence tests skip and only the dispatch machinery is checked.
"""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from polyforge import kernels
from polyforge.kernels import _numpy

try:
    from polyforge.kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled extension not built")


def _pyramid_batch(rng, n):
    """Random well-posed (ell, rad, altitude) batches from actual pyramids."""
    base = np.zeros((n, 3, 2))
    base[:, 1, 0] = rng.uniform(0.7, 2.5, n)
    base[:, 2, 0] = rng.uniform(-1.0, 3.0, n)
    base[:, 2, 1] = rng.uniform(0.4, 2.5, n)
    apex = np.stack(
        [
            rng.uniform(-1.0, 3.0, n),
            rng.uniform(-1.0, 3.0, n),
            rng.uniform(0.3, 2.0, n),
        ],
        axis=1,
    )
    ell = np.empty((n, 3))
    for s in range(3):
        ell[:, s] = np.linalg.norm(base[:, (s + 1) % 3] - base[:, (s + 2) % 3], axis=1)
    rad = np.empty((n, 3))
    for c in range(3):
        diff = apex[:, :2] - base[:, c]
        rad[:, c] = np.sqrt(np.sum(diff * diff, axis=1) + apex[:, 2] ** 2)
    return ell, rad, apex[:, 2]


@needs_core
def test_backend_constants_match():
    assert _core.BACKEND == "compiled"
    assert _numpy.BACKEND == "numpy"
    assert _core.REFINE_REL == _numpy.REFINE_REL == 1e-8


@needs_core
def test_tri_angles_backends_agree():
    rng = np.random.default_rng(7)
    a = rng.uniform(0.5, 2.0, 300)
    b = rng.uniform(0.5, 2.0, 300)
    # Mix of valid triangles and rows violating the triangle inequality.
    c = np.where(rng.random(300) < 0.8, rng.uniform(0.2, 1.0, 300) * (a + b), a + b + 0.5)
    ell = np.stack([a, b, c], axis=1)
    out_np = _numpy.tri_angles(ell)
    out_c = _core.tri_angles(ell)
    assert np.array_equal(np.isnan(out_np), np.isnan(out_c))
    good = ~np.isnan(out_np)
    np.testing.assert_allclose(out_c[good], out_np[good], rtol=1e-13, atol=1e-13)
    # Valid rows sum to pi; spot-check against the law of cosines.
    full = ~np.isnan(out_np).any(axis=1)
    np.testing.assert_allclose(out_np[full].sum(axis=1), math.pi, atol=1e-10)
    i = np.flatnonzero(full)[0]
    expect = math.acos((b[i] ** 2 + c[i] ** 2 - a[i] ** 2) / (2 * b[i] * c[i]))
    assert out_np[i, 0] == pytest.approx(expect, abs=1e-12)


@needs_core
def test_face_pyramids_backends_agree():
    rng = np.random.default_rng(11)
    ell, rad, alt = _pyramid_batch(rng, 400)
    out_np = _numpy.face_pyramids(ell, rad)
    out_c = _core.face_pyramids(ell, rad)
    assert np.array_equal(out_np["ok"], out_c["ok"])
    assert np.all(out_np["ok"] == 1)
    np.testing.assert_allclose(out_np["alt2"], alt * alt, rtol=1e-8)
    for key in ("alt2", "gamma", "rho_t", "rho_h", "phi", "alpha", "omega"):
        np.testing.assert_allclose(out_c[key], out_np[key], rtol=1e-11, atol=1e-11)


@needs_core
def test_face_pyramid_flags_agree_on_degenerate_rows():
    circ = 1.0 / math.sqrt(3.0)  # circumradius of the unit equilateral base
    ell = np.array(
        [
            [1.0, 1.0, 1.0],  # healthy
            [1.0, 1.0, 1.0],  # apex grazing the base plane -> refine
            [1.0, 1.0, 1.0],  # apex strictly below any pyramid -> dead
            [1.0, 1.0, 2.0],  # collinear base -> refine
        ]
    )
    rad = np.array(
        [
            [1.0, 1.0, 1.0],
            [math.sqrt(circ**2 + 1e-10)] * 3,
            [0.45, 0.45, 0.45],
            [1.5, 1.5, 1.5],
        ]
    )
    out_np = _numpy.face_pyramids(ell, rad)
    out_c = _core.face_pyramids(ell, rad)
    assert out_np["ok"].tolist() == [1, 0, -1, 0]
    assert np.array_equal(out_np["ok"], out_c["ok"])
    assert out_c["alt2"][0] == pytest.approx(out_np["alt2"][0], rel=1e-12)


def _quad_batch(rng, n):
    d = rng.uniform(0.5, 2.0, n)
    xk = rng.uniform(0.1, 0.9, n) * d
    yk = rng.uniform(0.1, 1.5, n)
    xl = rng.uniform(0.1, 0.9, n) * d
    yl = -rng.uniform(0.1, 1.5, n)
    l_ik = np.hypot(xk, yk)
    l_jk = np.hypot(d - xk, yk)
    l_il = np.hypot(xl, yl)
    l_jl = np.hypot(d - xl, yl)
    return d, l_ik, l_jk, l_il, l_jl


@needs_core
def test_edge_badness_backends_agree():
    rng = np.random.default_rng(23)
    n = 500
    d, l_ik, l_jk, l_il, l_jl = _quad_batch(rng, n)
    # Poison a handful of rows: k collapses onto the axis extension, which
    # makes the quadrilateral unresolvable in the fast path.
    dead = rng.choice(n, 12, replace=False)
    l_ik[dead] = 0.3
    l_jk[dead] = d[dead] + 5.0
    q = rng.uniform(0.0, 1.0, (4, n))
    out_np = _numpy.edge_badness(d, l_ik, l_jk, l_il, l_jl, *q)
    out_c = _core.edge_badness(d, l_ik, l_jk, l_il, l_jl, *q)
    assert np.array_equal(np.isnan(out_np), np.isnan(out_c))
    assert np.isnan(out_np[dead]).all()
    good = ~np.isnan(out_np)
    assert good.sum() == n - len(dead)
    np.testing.assert_allclose(out_c[good], out_np[good], rtol=1e-11, atol=1e-12)


@needs_core
def test_scatter_add_backends_agree():
    rng = np.random.default_rng(3)
    n = 7
    rows = rng.integers(0, n, 60)
    cols = rng.integers(0, n, 60)
    vals = rng.normal(size=60)
    out_np = _numpy.scatter_add(n, rows, cols, vals)
    out_c = _core.scatter_add(n, rows, cols, vals)
    dense = np.zeros((n, n))
    for r, c, v in zip(rows, cols, vals):
        dense[r, c] += v
    np.testing.assert_allclose(out_np, dense, atol=1e-14)
    np.testing.assert_allclose(out_c, out_np, atol=1e-14)


def test_dispatch_exports_selected_backend():
    assert kernels.BACKEND in ("compiled", "numpy")
    if kernels.BACKEND == "numpy":
        assert kernels.face_pyramids is _numpy.face_pyramids
    else:
        assert _core is not None
        assert kernels.face_pyramids is _core.face_pyramids
    assert kernels.REFINE_REL == _numpy.REFINE_REL


def _probe_backend(value):
    env = dict(os.environ)
    if value is None:
        env.pop("POLYFORGE_KERNELS", None)
    else:
        env["POLYFORGE_KERNELS"] = value
    return subprocess.run(
        [sys.executable, "-c", "import polyforge.kernels as k; print(k.BACKEND)"],
        capture_output=True,
        text=True,
        env=env,
    )


def test_env_var_forces_python_backend():
    proc = _probe_backend("python")
    assert proc.returncode == 0
    assert proc.stdout.strip() == "numpy"


@needs_core
def test_env_var_forces_compiled_backend():
    proc = _probe_backend("compiled")
    assert proc.returncode == 0
    assert proc.stdout.strip() == "compiled"


def test_env_var_rejects_unknown_value():
    proc = _probe_backend("turbo")
    assert proc.returncode != 0
    assert "unknown POLYFORGE_KERNELS" in proc.stderr
