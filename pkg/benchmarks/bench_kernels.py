"""Time the numba kernels against their numpy twins on a graded cell mesh.

Usage::

    python benchmarks/bench_kernels.py [--h 0.01] [--repeat 5]

Each kernel is called once before timing so JIT compilation is excluded.
Results are also checked for agreement.
"""

import argparse
import time
import warnings

import numpy as np

from thinwires import _kernels as K
from thinwires.geometry import make_wire
from thinwires.mesh_fem import build_mesh


def best_of(fn, repeat):
    fn()
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=0.01)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--points", type=int, default=200_000)
    args = ap.parse_args(argv)
    if K.numba is None:
        raise SystemExit("numba is not installed; nothing to compare")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        mesh = build_mesh(make_wire((0.5, 0.5), 0.01, 0.25), h=args.h)
    nodes, tris = mesh.nodes, mesh.tris
    u = np.sin(4 * nodes[:, 0]) * nodes[:, 1]
    nb = 64
    start, items, origin, inv = K.build_buckets(nodes, tris, nb)
    pts = np.random.default_rng(0).random((args.points, 2))

    cases = {
        "p1_geometry": (K.np_p1_geometry, K.nb_p1_geometry, (nodes, tris)),
        "p1_stiffness": (K.np_p1_stiffness, K.nb_p1_stiffness, (nodes, tris)),
        "tri_gradients": (K.np_tri_gradients, K.nb_tri_gradients, (nodes, tris, u)),
        "locate": (K.np_locate, K.nb_locate, (nodes, tris, start, items, origin, inv, nb, pts)),
    }
    print(f"mesh: {mesh.n_nodes} nodes, {mesh.n_tris} triangles; locate: {len(pts)} points")
    print(f"{'kernel':<15}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}  agree")
    for name, (f_np, f_nb, a) in cases.items():
        t_np = best_of(lambda: f_np(*a), args.repeat)
        t_nb = best_of(lambda: f_nb(*a), args.repeat)
        r_np, r_nb = f_np(*a), f_nb(*a)
        if isinstance(r_np, tuple):
            agree = all(np.allclose(x, y, atol=1e-12) for x, y in zip(r_np, r_nb))
        else:
            agree = np.allclose(r_np, r_nb, atol=1e-12)
        print(f"{name:<15}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>9.1f}x  {agree}")


if __name__ == "__main__":
    main()
