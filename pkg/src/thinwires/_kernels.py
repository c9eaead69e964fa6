"""Hot loops for P1 assembly and point location.

Every kernel exists twice: a numba ``@njit`` version and a vectorised numpy
twin with the same signature.  The module-level names dispatch to one of the
two.  Set ``THINWIRES_DISABLE_NUMBA=1`` to force the numpy path (useful for
debugging and for platforms without numba).
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and os.environ.get("THINWIRES_DISABLE_NUMBA", "0") not in ("1", "true", "yes")

BARY_TOL = 1e-10


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def np_p1_geometry(nodes, tris):
    """Signed areas and constant basis gradients of P1 triangles.

    Returns ``areas (nt,)`` and ``grads (nt, 3, 2)`` where ``grads[t, k]`` is
    the gradient of the hat function of local vertex ``k``.
    """
    p0 = nodes[tris[:, 0]]
    p1 = nodes[tris[:, 1]]
    p2 = nodes[tris[:, 2]]
    det = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1])
    areas = 0.5 * det
    grads = np.empty((tris.shape[0], 3, 2))
    # gradient of lambda_k is rot90 of the opposite edge / (2A)
    grads[:, 0, 0] = (p1[:, 1] - p2[:, 1]) / det
    grads[:, 0, 1] = (p2[:, 0] - p1[:, 0]) / det
    grads[:, 1, 0] = (p2[:, 1] - p0[:, 1]) / det
    grads[:, 1, 1] = (p0[:, 0] - p2[:, 0]) / det
    grads[:, 2, 0] = (p0[:, 1] - p1[:, 1]) / det
    grads[:, 2, 1] = (p1[:, 0] - p0[:, 0]) / det
    return areas, grads


def np_p1_stiffness(nodes, tris):
    """Local stiffness matrices ``(nt, 3, 3)`` of the Laplacian."""
    areas, grads = np_p1_geometry(nodes, tris)
    return areas[:, None, None] * np.einsum("tid,tjd->tij", grads, grads)


def np_tri_gradients(nodes, tris, u):
    _, grads = np_p1_geometry(nodes, tris)
    return np.einsum("tk,tkd->td", u[tris], grads)


def np_locate(nodes, tris, bucket_start, bucket_tris, origin, inv_cell, nb, pts):
    """Find the containing triangle and barycentric weights of each point.

    Points outside the triangulation get triangle index ``-1``.
    """
    npts = pts.shape[0]
    found = np.full(npts, -1, dtype=np.int64)
    bary = np.zeros((npts, 3))
    ix = np.clip(((pts[:, 0] - origin[0]) * inv_cell).astype(np.int64), 0, nb - 1)
    iy = np.clip(((pts[:, 1] - origin[1]) * inv_cell).astype(np.int64), 0, nb - 1)
    cell = iy * nb + ix
    start = bucket_start[cell]
    count = bucket_start[cell + 1] - start
    pending = np.arange(npts)
    k = 0
    while pending.size:
        alive = pending[count[pending] > k]
        if alive.size == 0:
            break
        t = bucket_tris[start[alive] + k]
        a = nodes[tris[t, 0]]
        b = nodes[tris[t, 1]]
        c = nodes[tris[t, 2]]
        p = pts[alive]
        det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1])
        l1 = ((p[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (p[:, 1] - a[:, 1])) / det
        l2 = ((b[:, 0] - a[:, 0]) * (p[:, 1] - a[:, 1]) - (p[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1])) / det
        l0 = 1.0 - l1 - l2
        hit = (l0 >= -BARY_TOL) & (l1 >= -BARY_TOL) & (l2 >= -BARY_TOL)
        idx = alive[hit]
        found[idx] = t[hit]
        bary[idx, 0] = l0[hit]
        bary[idx, 1] = l1[hit]
        bary[idx, 2] = l2[hit]
        pending = alive[~hit]
        k += 1
    return found, bary


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def nb_p1_geometry(nodes, tris):
        nt = tris.shape[0]
        areas = np.empty(nt)
        grads = np.empty((nt, 3, 2))
        for t in range(nt):
            x0, y0 = nodes[tris[t, 0], 0], nodes[tris[t, 0], 1]
            x1, y1 = nodes[tris[t, 1], 0], nodes[tris[t, 1], 1]
            x2, y2 = nodes[tris[t, 2], 0], nodes[tris[t, 2], 1]
            det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
            areas[t] = 0.5 * det
            grads[t, 0, 0] = (y1 - y2) / det
            grads[t, 0, 1] = (x2 - x1) / det
            grads[t, 1, 0] = (y2 - y0) / det
            grads[t, 1, 1] = (x0 - x2) / det
            grads[t, 2, 0] = (y0 - y1) / det
            grads[t, 2, 1] = (x1 - x0) / det
        return areas, grads

    @numba.njit(cache=True, nogil=True)
    def nb_p1_stiffness(nodes, tris):
        areas, grads = nb_p1_geometry(nodes, tris)
        nt = tris.shape[0]
        out = np.empty((nt, 3, 3))
        for t in range(nt):
            for i in range(3):
                for j in range(3):
                    out[t, i, j] = areas[t] * (grads[t, i, 0] * grads[t, j, 0] + grads[t, i, 1] * grads[t, j, 1])
        return out

    @numba.njit(cache=True, nogil=True)
    def nb_tri_gradients(nodes, tris, u):
        _, grads = nb_p1_geometry(nodes, tris)
        nt = tris.shape[0]
        out = np.zeros((nt, 2))
        for t in range(nt):
            for k in range(3):
                uk = u[tris[t, k]]
                out[t, 0] += uk * grads[t, k, 0]
                out[t, 1] += uk * grads[t, k, 1]
        return out

    @numba.njit(cache=True, nogil=True)
    def nb_locate(nodes, tris, bucket_start, bucket_tris, origin, inv_cell, nb, pts):
        npts = pts.shape[0]
        found = np.full(npts, -1, dtype=np.int64)
        bary = np.zeros((npts, 3))
        for n in range(npts):
            px, py = pts[n, 0], pts[n, 1]
            ix = int((px - origin[0]) * inv_cell)
            iy = int((py - origin[1]) * inv_cell)
            ix = min(max(ix, 0), nb - 1)
            iy = min(max(iy, 0), nb - 1)
            cell = iy * nb + ix
            for q in range(bucket_start[cell], bucket_start[cell + 1]):
                t = bucket_tris[q]
                ax, ay = nodes[tris[t, 0], 0], nodes[tris[t, 0], 1]
                bx, by = nodes[tris[t, 1], 0], nodes[tris[t, 1], 1]
                cx, cy = nodes[tris[t, 2], 0], nodes[tris[t, 2], 1]
                det = (bx - ax) * (cy - ay) - (cx - ax) * (by - ay)
                l1 = ((px - ax) * (cy - ay) - (cx - ax) * (py - ay)) / det
                l2 = ((bx - ax) * (py - ay) - (px - ax) * (by - ay)) / det
                l0 = 1.0 - l1 - l2
                if l0 >= -BARY_TOL and l1 >= -BARY_TOL and l2 >= -BARY_TOL:
                    found[n] = t
                    bary[n, 0] = l0
                    bary[n, 1] = l1
                    bary[n, 2] = l2
                    break
        return found, bary


if USE_NUMBA:
    p1_geometry = nb_p1_geometry
    p1_stiffness = nb_p1_stiffness
    tri_gradients = nb_tri_gradients
    locate = nb_locate
else:
    p1_geometry = np_p1_geometry
    p1_stiffness = np_p1_stiffness
    tri_gradients = np_tri_gradients
    locate = np_locate


def backend():
    return "numba" if USE_NUMBA else "numpy"


def build_buckets(nodes, tris, nb):
    """Uniform bucket grid over the bounding box, CSR list of overlapping triangles."""
    lo = nodes.min(axis=0)
    hi = nodes.max(axis=0)
    size = float(max(hi - lo)) * (1.0 + 1e-9)
    inv_cell = nb / size
    tri_pts = nodes[tris]
    tmin = np.clip(((tri_pts.min(axis=1) - lo) * inv_cell - 1e-9).astype(np.int64), 0, nb - 1)
    tmax = np.clip(((tri_pts.max(axis=1) - lo) * inv_cell + 1e-9).astype(np.int64), 0, nb - 1)
    spans_x = tmax[:, 0] - tmin[:, 0] + 1
    spans_y = tmax[:, 1] - tmin[:, 1] + 1
    counts = spans_x * spans_y
    owner = np.repeat(np.arange(tris.shape[0]), counts)
    local = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    cx = tmin[owner, 0] + local % spans_x[owner]
    cy = tmin[owner, 1] + local // spans_x[owner]
    cell = cy * nb + cx
    order = np.argsort(cell, kind="stable")
    bucket_tris = owner[order].astype(np.int64)
    bucket_start = np.zeros(nb * nb + 1, dtype=np.int64)
    np.add.at(bucket_start, cell + 1, 1)
    bucket_start = np.cumsum(bucket_start)
    return bucket_start, bucket_tris, lo.astype(np.float64), inv_cell
