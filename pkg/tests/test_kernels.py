"""The numba kernels and their numpy twins must agree bit-for-bit in structure."""

import os
import subprocess
import sys

import numpy as np
import pytest

from thinwires import _kernels as K

needs_numba = pytest.mark.skipif(K.numba is None, reason="numba not installed")


@pytest.fixture(scope="module")
def mesh(wire):
    from thinwires.mesh_fem import build_mesh

    return build_mesh(wire, h=0.05)


@needs_numba
def test_geometry_twins(mesh):
    a = K.np_p1_geometry(mesh.nodes, mesh.tris)
    b = K.nb_p1_geometry(mesh.nodes, mesh.tris)
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-14, atol=1e-14)


@needs_numba
def test_stiffness_twins(mesh):
    np.testing.assert_allclose(K.np_p1_stiffness(mesh.nodes, mesh.tris),
                               K.nb_p1_stiffness(mesh.nodes, mesh.tris), rtol=1e-13, atol=1e-12)


@needs_numba
def test_gradient_twins(mesh):
    u = np.sin(3 * mesh.nodes[:, 0]) + mesh.nodes[:, 1] ** 2
    np.testing.assert_allclose(K.np_tri_gradients(mesh.nodes, mesh.tris, u),
                               K.nb_tri_gradients(mesh.nodes, mesh.tris, u), rtol=1e-13, atol=1e-12)


@needs_numba
def test_locate_twins(mesh):
    rng = np.random.default_rng(0)
    pts = rng.random((500, 2))
    nb = 32
    start, items, origin, inv = K.build_buckets(mesh.nodes, mesh.tris, nb)
    t1, l1 = K.np_locate(mesh.nodes, mesh.tris, start, items, origin, inv, nb, pts)
    t2, l2 = K.nb_locate(mesh.nodes, mesh.tris, start, items, origin, inv, nb, pts)
    np.testing.assert_array_equal(t1, t2)
    np.testing.assert_allclose(l1, l2, atol=1e-13)
    inside = t1 >= 0
    # every point outside the hole is found; points found have valid barycentrics
    d = np.hypot(pts[:, 0] - 0.5, pts[:, 1] - 0.5)
    assert inside[d > 0.051].all()
    assert np.all(l1[inside] > -1e-9)


def test_stiffness_rows_sum_to_zero(mesh):
    k = K.p1_stiffness(mesh.nodes, mesh.tris)
    np.testing.assert_allclose(k.sum(axis=2), 0.0, atol=1e-12)


def test_env_var_selects_numpy():
    env = dict(os.environ, THINWIRES_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from thinwires import _kernels as K; print(K.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_numpy_backend_solves_the_same_problem(tmp_path):
    code = (
        "import math, warnings; warnings.simplefilter('ignore');"
        "from thinwires import cell2d, mesh_fem as mf; from thinwires.geometry import make_wire;"
        "s = make_wire((0.5, 0.5), 0.05, 0.25); v = cell2d.solve_v_r(s, 0.04);"
        "print(repr(mf.ring_mean(v, 0.05)))"
    )
    vals = []
    for flag in ("1", "0"):
        env = dict(os.environ, THINWIRES_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        vals.append(float(out.stdout))
    assert vals[0] == pytest.approx(vals[1], rel=1e-10)
