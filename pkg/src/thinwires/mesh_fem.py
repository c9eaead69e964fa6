"""P1 finite elements on the punctured, ``e1``-periodic unit square.

The domain is ``V_s = (0,1)^2`` minus the closed disk ``B_s(z0)``.  The left
and right edges are identified; top, bottom and the hole carry Neumann data.
Meshes are built from staggered concentric rings around the hole, graded
from a fine hole spacing out to the bulk size ``h``, and a triangular lattice
filling the rest of the square.  The union is triangulated with Delaunay.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg
from scipy.spatial import Delaunay

from . import _kernels as K

log = logging.getLogger(__name__)

__all__ = [
    "TAGS",
    "Mesh2",
    "ScalarField2",
    "VecField2",
    "MeshError",
    "SolverError",
    "IncompatibleData",
    "build_mesh",
    "build_disk_mesh",
    "solve_poisson",
    "rotated_gradient",
    "l2_norm_sq",
    "ring_mean",
    "circle_flux",
    "weak_curl",
    "boundary_flux",
    "mesh_quality",
    "export_mesh",
    "interpolate",
]

TAGS = {"bottom": 0, "top": 1, "left": 2, "right": 3, "hole": 4, "disk": 5}
RING_SAMPLES = 256


class MeshError(RuntimeError):
    pass


class SolverError(RuntimeError):
    pass


class IncompatibleData(ValueError):
    pass


def _freeze(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mesh2:
    """Triangulation of a (possibly punctured) periodic unit square.

    Attributes
    ----------
    nodes : (nn, 2) float array
    tris : (nt, 3) int array, counter-clockwise
    bedges : (nb, 2) int array of boundary edges
    btags : (nb,) int array, values from :data:`TAGS`
    dof : (nn,) int array mapping nodes to periodic degrees of freedom
    center, hole_radius : the removed disk (``hole_radius = 0`` for none)
    guard_radius : radius of the normalization circle
    h, grading : requested bulk size and hole refinement factor
    """

    nodes: np.ndarray
    tris: np.ndarray
    bedges: np.ndarray
    btags: np.ndarray
    dof: np.ndarray
    center: tuple[float, float]
    hole_radius: float
    guard_radius: float
    h: float
    grading: float
    periodic: bool = True

    def __post_init__(self):
        for name in ("nodes", "tris", "bedges", "btags", "dof"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_tris(self) -> int:
        return self.tris.shape[0]

    @cached_property
    def ndof(self) -> int:
        return int(self.dof.max()) + 1

    @cached_property
    def geometry(self):
        areas, grads = K.p1_geometry(self.nodes, self.tris)
        return _freeze(areas), _freeze(grads)

    @property
    def areas(self) -> np.ndarray:
        return self.geometry[0]

    @cached_property
    def centroids(self) -> np.ndarray:
        return _freeze(self.nodes[self.tris].mean(axis=1))

    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        """Global stiffness matrix in periodic degree-of-freedom numbering."""
        loc = K.p1_stiffness(self.nodes, self.tris)
        d = self.dof[self.tris]
        rows = np.repeat(d, 3, axis=1).ravel()
        cols = np.tile(d, (1, 3)).ravel()
        A = sp.coo_matrix((loc.ravel(), (rows, cols)), shape=(self.ndof, self.ndof)).tocsr()
        A.sum_duplicates()
        return A

    def edges_with_tag(self, tag: str) -> np.ndarray:
        return self.bedges[self.btags == TAGS[tag]]

    def nodes_with_tag(self, tag: str) -> np.ndarray:
        return np.unique(self.edges_with_tag(tag))

    def boundary_length(self, tag: str) -> float:
        e = self.edges_with_tag(tag)
        if e.size == 0:
            return 0.0
        return float(np.linalg.norm(self.nodes[e[:, 1]] - self.nodes[e[:, 0]], axis=1).sum())

    @cached_property
    def _buckets(self):
        nb = max(4, int(math.sqrt(self.n_tris / 2)))
        return K.build_buckets(self.nodes, self.tris, nb) + (nb,)

    def locate(self, pts) -> tuple[np.ndarray, np.ndarray]:
        """Containing triangle (or -1) and barycentric weights of ``pts``."""
        start, btri, lo, inv_cell, nb = self._buckets
        pts = np.ascontiguousarray(np.atleast_2d(pts), dtype=float)
        return K.locate(self.nodes, self.tris, start, btri, lo, inv_cell, nb, pts)


@dataclass(frozen=True, eq=False)
class ScalarField2:
    """Nodal P1 field.  Periodic partner nodes always carry equal values."""

    mesh: Mesh2
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.mesh.n_nodes,):
            raise ValueError("one value per mesh node required")
        if not np.all(np.isfinite(v)):
            raise ValueError("field has non-finite values")
        object.__setattr__(self, "values", _freeze(v))

    @classmethod
    def from_function(cls, mesh: Mesh2, fn: Callable[[np.ndarray], np.ndarray]) -> "ScalarField2":
        return cls(mesh, fn(mesh.nodes))

    def gradient(self) -> np.ndarray:
        return K.tri_gradients(self.mesh.nodes, self.mesh.tris, np.ascontiguousarray(self.values))


@dataclass(frozen=True, eq=False)
class VecField2:
    """Piecewise constant 2-vector field, one value per triangle."""

    mesh: Mesh2
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.mesh.n_tris, 2):
            raise ValueError("one 2-vector per triangle required")
        if not np.all(np.isfinite(v)):
            raise ValueError("field has non-finite values")
        object.__setattr__(self, "values", _freeze(v))

    def __sub__(self, other) -> "VecField2":
        if isinstance(other, VecField2):
            return VecField2(self.mesh, self.values - other.values)
        return VecField2(self.mesh, self.values - np.asarray(other, dtype=float))


# ---------------------------------------------------------------------------
# meshing
# ---------------------------------------------------------------------------


@dataclass
class _Rings:
    points: np.ndarray
    outer_radius: float
    n_hole: int
    s_hole: float


def _ring_points(center, r, h, grading, min_segments, d_max, scale=1.0) -> _Rings:
    """Staggered concentric rings from radius ``r`` outwards.

    The spacing grows linearly with the distance to the hole, at a slope
    capped at 0.15 so neighbouring rings stay close to equilateral, and
    raised if needed so the bulk size is reached before the cell edge.
    ``scale`` multiplies every size (hole spacing, slope and ``h``) and is
    how uniform refinement of the graded mesh is expressed.
    """
    s_hole = min(grading * h, r / 4.0, 2.0 * math.pi * r / min_segments)
    if d_max > r:
        lower = (h - s_hole) / (0.8 * (d_max - r))
    else:
        lower = math.inf
    slope = max(min((h - s_hole) / (2.0 * r), 0.15), min(lower, 0.5))
    s_hole *= scale
    slope *= scale
    h *= scale

    def size(rho):
        return min(h, s_hole + slope * (rho - r))

    cx, cy = center
    pts = []
    rho = r
    n = max(6, math.ceil(2.0 * math.pi * r / s_hole - 1e-9))
    n_hole = n
    offset = 0.0
    k = 0
    while True:
        th = offset + 2.0 * math.pi * np.arange(n) / n
        pts.append(np.column_stack([cx + rho * np.cos(th), cy + rho * np.sin(th)]))
        s = size(rho)
        if s >= h * (1.0 - 1e-9):
            break
        nxt = rho + 0.5 * math.sqrt(3.0) * s
        if nxt > d_max:
            break
        offset += math.pi / n
        rho = nxt
        n = max(6, math.ceil(2.0 * math.pi * rho / size(rho)))
        k += 1
    return _Rings(np.vstack(pts), rho, n_hole, s_hole)


def _lattice(h: float) -> np.ndarray:
    """Triangular lattice on the unit square with nodes on all four edges.

    Every row has a node at ``x = 0`` and ``x = 1`` so left and right edges
    carry identical node heights.
    """
    m = max(4, math.ceil(1.0 / h))
    ny = max(2, round(m / (0.5 * math.sqrt(3.0))))
    dx = 1.0 / m
    rows = []
    for j in range(ny + 1):
        y = j / ny
        if j % 2 == 0:
            x = np.arange(m + 1) * dx
        else:
            x = np.concatenate([[0.0], (np.arange(m) + 0.5) * dx, [1.0]])
        x[-1] = 1.0
        rows.append(np.column_stack([x, np.full(x.size, y)]))
    pts = np.vstack(rows)
    pts[:, 1] = np.where(np.isclose(pts[:, 1], 1.0, atol=1e-14), 1.0, pts[:, 1])
    return pts


def _tag_boundary(nodes, tris, center, radius):
    e = np.sort(np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]), axis=1)
    uniq, cnt = np.unique(e, axis=0, return_counts=True)
    bed = uniq[cnt == 1]
    p = nodes[bed]
    tags = np.full(bed.shape[0], -1, dtype=np.int64)
    tol = 1e-12
    tags[np.all(np.abs(p[:, :, 1]) < tol, axis=1)] = TAGS["bottom"]
    tags[np.all(np.abs(p[:, :, 1] - 1.0) < tol, axis=1)] = TAGS["top"]
    tags[np.all(np.abs(p[:, :, 0]) < tol, axis=1)] = TAGS["left"]
    tags[np.all(np.abs(p[:, :, 0] - 1.0) < tol, axis=1)] = TAGS["right"]
    if radius > 0:
        d = np.hypot(p[:, :, 0] - center[0], p[:, :, 1] - center[1])
        tags[np.all(np.abs(d - radius) < 1e-9 * max(1.0, radius) + 1e-14, axis=1) & (tags < 0)] = TAGS["hole"]
    if np.any(tags < 0):
        raise MeshError(f"{int(np.sum(tags < 0))} boundary edges could not be tagged (mesh is not conforming)")
    return bed, tags


def _periodic_dof(nodes):
    left = np.flatnonzero(nodes[:, 0] == 0.0)
    right = np.flatnonzero(nodes[:, 0] == 1.0)
    if left.size != right.size:
        raise MeshError(f"left/right node counts differ ({left.size} vs {right.size})")
    left = left[np.argsort(nodes[left, 1])]
    right = right[np.argsort(nodes[right, 1])]
    mismatch = np.abs(nodes[left, 1] - nodes[right, 1]).max()
    if mismatch > 1e-12:
        raise MeshError(f"periodic pairing mismatch {mismatch:.2e}")
    partner = np.arange(nodes.shape[0])
    partner[right] = left
    _, dof = np.unique(partner, return_inverse=True)
    return dof.astype(np.int64)


def _triangulate(points, center, hole_radius):
    if hole_radius > 0:
        points = np.vstack([points, np.asarray(center, dtype=float)[None, :]])
    tri = Delaunay(points)
    if len(tri.coplanar):
        raise MeshError(f"Delaunay dropped {len(tri.coplanar)} points (duplicate or near-duplicate nodes)")
    tris = tri.simplices.astype(np.int64)
    if hole_radius > 0:
        c = points[tris].mean(axis=1)
        keep = np.hypot(c[:, 0] - center[0], c[:, 1] - center[1]) > hole_radius
        tris = tris[keep]
        points = points[:-1]
        if np.any(tris == points.shape[0]):
            raise MeshError("a triangle outside the hole uses the hole centre")
    areas, _ = K.np_p1_geometry(points, tris)
    flip = areas < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    areas = np.abs(areas)
    if areas.min() <= 1e-14 * areas.max():
        raise MeshError(f"degenerate triangle, min area {areas.min():.3e}")
    return points, tris


def build_mesh(spec, h: float = 0.02, grading: float = 0.25, *, hole: str = "wire",
               min_segments: int = 32, refine: int = 0) -> Mesh2:
    """Mesh the periodic square with the disk of ``spec`` removed.

    Parameters
    ----------
    spec : WireSpec
        Supplies the centre, the wire radius and the guard radius.
    h : float
        Bulk element size.
    grading : float
        Element size at the hole relative to ``h``.  Capped so the hole
        spacing never exceeds a quarter of its radius.
    hole : {"wire", "guard"}
        Remove ``B_r`` (the wire) or ``B_R`` (the guard disk).
    min_segments : int
        Lower bound on the number of hole boundary segments.
    refine : int
        Uniform refinement level.  Level ``k`` divides every local element
        size of the level-0 mesh by ``2**k``, including the graded zone.
    """
    if h <= 0 or grading <= 0:
        raise ValueError("h and grading must be positive")
    radius = spec.r if hole == "wire" else spec.R
    if hole not in ("wire", "guard"):
        raise ValueError("hole must be 'wire' or 'guard'")
    if radius < 1e-6:
        raise MeshError(f"hole radius {radius:.3e} is below the meshable range")
    if grading * h > radius / 4.0:
        warnings.warn(f"element size {grading * h:.3g} at the hole exceeds r/4={radius / 4:.3g}; refining to r/4",
                      stacklevel=2)
    center = spec.z0
    edge = min(center[0], center[1], 1 - center[0], 1 - center[1])
    scale = 0.5 ** int(refine)
    hk = h * scale
    rings = _ring_points(center, radius, h, grading, min_segments, edge - 0.75 * hk, scale)
    lat = _lattice(hk)
    d = np.hypot(lat[:, 0] - center[0], lat[:, 1] - center[1])
    on_edge = (lat[:, 0] == 0.0) | (lat[:, 0] == 1.0) | (lat[:, 1] == 0.0) | (lat[:, 1] == 1.0)
    lat = lat[(d > rings.outer_radius + 0.6 * hk) | on_edge]
    nodes, tris = _triangulate(np.vstack([rings.points, lat]), center, radius)
    bed, tags = _tag_boundary(nodes, tris, center, radius)
    mesh = Mesh2(nodes, tris, bed, tags, _periodic_dof(nodes), center, radius, spec.R, hk, grading)
    log.debug("mesh: %d nodes, %d triangles, %d hole segments", mesh.n_nodes, mesh.n_tris, rings.n_hole)
    return mesh


def build_disk_mesh(center, radius: float, n_segments: int = 64) -> Mesh2:
    """Unstructured mesh of the closed disk ``B_radius(center)`` (not periodic).

    Used to integrate closed-form fields inside the wire cross-section.
    """
    s = 2.0 * math.pi * radius / n_segments
    pts = [np.asarray(center, dtype=float)[None, :]]
    rho = radius
    n = n_segments
    offset = 0.0
    while rho > 0.5 * s:
        th = offset + 2.0 * math.pi * np.arange(n) / n
        pts.append(np.column_stack([center[0] + rho * np.cos(th), center[1] + rho * np.sin(th)]))
        rho -= 0.5 * math.sqrt(3.0) * s
        offset += math.pi / n
        n = max(6, math.ceil(2.0 * math.pi * rho / s))
    nodes, tris = _triangulate(np.vstack(pts), center, 0.0)
    e = np.sort(np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]), axis=1)
    uniq, cnt = np.unique(e, axis=0, return_counts=True)
    bed = uniq[cnt == 1]
    tags = np.full(bed.shape[0], TAGS["disk"], dtype=np.int64)
    return Mesh2(nodes, tris, bed, tags, np.arange(nodes.shape[0]), tuple(center), 0.0, radius, s, 1.0,
                 periodic=False)


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------


def _load_vector(mesh: Mesh2, source: float, flux: Mapping[str, float]) -> np.ndarray:
    b = np.zeros(mesh.ndof)
    if source:
        np.add.at(b, mesh.dof[mesh.tris].ravel(), np.repeat(source * mesh.areas / 3.0, 3))
    for tag, g in flux.items():
        if tag not in TAGS:
            raise KeyError(f"unknown boundary tag {tag!r}")
        if not g:
            continue
        e = mesh.edges_with_tag(tag)
        if e.size == 0:
            raise IncompatibleData(f"flux given on tag {tag!r} but the mesh has no such edges")
        ln = np.linalg.norm(mesh.nodes[e[:, 1]] - mesh.nodes[e[:, 0]], axis=1)
        np.add.at(b, mesh.dof[e].ravel(), np.repeat(0.5 * g * ln, 2))
    return b


def solve_poisson(mesh: Mesh2, source: float = 0.0, flux: Mapping[str, float] | None = None,
                  normalization: str = "ring", *, pin: int = 0, rtol: float = 1e-12) -> ScalarField2:
    """P1 Galerkin solution of ``-Lap u = source`` with Neumann data.

    Parameters
    ----------
    mesh : Mesh2
    source : float
        Constant volumetric source.
    flux : dict
        Outward co-normal derivative ``du/dn`` per boundary tag.
    normalization : {"ring", "pin", "none"}
        ``"ring"`` makes the mean over the guard circle zero, ``"pin"`` sets
        node ``pin`` to zero, ``"none"`` returns the mean-zero solution.

    Raises
    ------
    IncompatibleData
        If source and fluxes do not integrate to zero.
    SolverError
        If conjugate gradients does not reach ``rtol``.
    """
    flux = dict(flux or {})
    b = _load_vector(mesh, source, flux)
    scale = np.abs(b).sum()
    if abs(b.sum()) > 1e-10 * max(scale, 1e-300):
        raise IncompatibleData(f"data integrate to {b.sum():.3e}, relative {b.sum() / scale:.3e}; "
                               "source and boundary flux must balance")
    if scale == 0.0:
        x = np.zeros(mesh.ndof)
    else:
        b = b - b.mean()
        A = mesh.stiffness
        diag = A.diagonal()
        M = sp.diags(1.0 / diag)
        x, info = cg(A, b, rtol=rtol, atol=0.0, M=M, maxiter=20 * mesh.ndof)
        x -= x.mean()
        res = np.linalg.norm(A @ x - b) / np.linalg.norm(b)
        if info != 0 or res > 100 * rtol:
            raise SolverError(f"conjugate gradients stopped with info={info}, relative residual {res:.3e} "
                              f"(target {rtol:.1e}, {mesh.ndof} unknowns)")
    u = ScalarField2(mesh, x[mesh.dof])
    if normalization == "ring":
        u = ScalarField2(mesh, u.values - ring_mean(u, mesh.guard_radius))
    elif normalization == "pin":
        u = ScalarField2(mesh, u.values - u.values[pin])
    elif normalization != "none":
        raise ValueError(f"unknown normalization {normalization!r}")
    return u


# ---------------------------------------------------------------------------
# post-processing
# ---------------------------------------------------------------------------


def rotated_gradient(u: ScalarField2) -> VecField2:
    """Per-triangle ``(-d2 u, d1 u)``."""
    g = u.gradient()
    return VecField2(u.mesh, np.column_stack([-g[:, 1], g[:, 0]]))


def _region_mask(mesh: Mesh2, region) -> np.ndarray:
    if region is None:
        return np.ones(mesh.n_tris, dtype=bool)
    if callable(region):
        return np.asarray(region(mesh.centroids), dtype=bool)
    return np.asarray(region, dtype=bool)


def l2_norm_sq(f, region=None) -> float:
    """Exact ``integral |f|^2`` over the triangles selected by ``region``.

    ``region`` is ``None`` (whole mesh), a boolean mask over triangles, or a
    predicate evaluated at triangle centroids.
    """
    mesh = f.mesh
    mask = _region_mask(mesh, region)
    if not mask.any():
        warnings.warn("empty integration region", stacklevel=2)
        return 0.0
    A = mesh.areas[mask]
    if isinstance(f, VecField2):
        return float(np.dot(A, np.einsum("td,td->t", f.values[mask], f.values[mask])))
    u = f.values[mesh.tris[mask]]
    return float(np.dot(A, (u * u).sum(axis=1) + u.sum(axis=1) ** 2) / 12.0)


def interpolate(u: ScalarField2, pts) -> np.ndarray:
    """Evaluate the P1 field at points; raises if any point is off-mesh."""
    t, w = u.mesh.locate(pts)
    if np.any(t < 0):
        raise ValueError(f"{int(np.sum(t < 0))} evaluation points lie outside the mesh")
    return np.einsum("nk,nk->n", u.values[u.mesh.tris[t]], w)


def _circle(mesh: Mesh2, s: float, n: int):
    if s < mesh.hole_radius * (1 - 1e-12):
        raise ValueError(f"circle of radius {s} intersects the hole (radius {mesh.hole_radius})")
    th = 2.0 * math.pi * (np.arange(n) + 0.5) / n
    c = mesh.center
    return np.column_stack([c[0] + s * np.cos(th), c[1] + s * np.sin(th)]), th


def ring_mean(u: ScalarField2, s: float, n: int = RING_SAMPLES) -> float:
    """Mean of ``u`` over the circle of radius ``s`` about the hole centre.

    The circle is sampled at ``n`` equispaced angles and ``u`` is
    interpolated there.  Interpolation weights sum to one, so subtracting the
    result from ``u`` makes the mean exactly zero.
    """
    pts, _ = _circle(u.mesh, s, n)
    return float(interpolate(u, pts).mean())


def circle_flux(u: ScalarField2, s: float, n: int = 4 * RING_SAMPLES) -> float:
    """``integral over |z - z0| = s`` of the outward radial derivative of ``u``."""
    mesh = u.mesh
    pts, th = _circle(mesh, s, n)
    t, _ = mesh.locate(pts)
    if np.any(t < 0):
        raise ValueError("circle leaves the mesh")
    g = u.gradient()[t]
    dn = g[:, 0] * np.cos(th) + g[:, 1] * np.sin(th)
    return float(dn.mean() * 2.0 * math.pi * s)


def weak_curl(f: VecField2) -> np.ndarray:
    """Weak 2D curl per degree of freedom.

    ``c_i = -sum_T |T| f_T . rot(grad w_i)``, which equals the integral of
    ``d1 f2 - d2 f1`` against the hat function ``w_i`` at interior nodes.
    """
    mesh = f.mesh
    _, grads = mesh.geometry
    rot = np.stack([-grads[:, :, 1], grads[:, :, 0]], axis=-1)
    loc = -mesh.areas[:, None] * np.einsum("td,tkd->tk", f.values, rot)
    c = np.zeros(mesh.ndof)
    np.add.at(c, mesh.dof[mesh.tris].ravel(), loc.ravel())
    return c


def interior_dofs(mesh: Mesh2) -> np.ndarray:
    """Degrees of freedom not on a Neumann boundary (periodic edges are interior)."""
    mask = np.ones(mesh.ndof, dtype=bool)
    for tag in ("top", "bottom", "hole", "disk"):
        mask[mesh.dof[mesh.nodes_with_tag(tag)]] = False
    return np.flatnonzero(mask)


def boundary_flux(u: ScalarField2, tag: str, source: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Variationally consistent outward flux ``du/dn`` at the nodes of ``tag``.

    The Galerkin residual ``K u - (source, w_i)`` is divided by the lumped
    boundary mass.  Returns ``(node_indices, flux_values)``.
    """
    mesh = u.mesh
    x = np.zeros(mesh.ndof)
    x[mesh.dof] = u.values
    r = mesh.stiffness @ x - _load_vector(mesh, source, {})
    e = mesh.edges_with_tag(tag)
    ln = np.linalg.norm(mesh.nodes[e[:, 1]] - mesh.nodes[e[:, 0]], axis=1)
    m = np.zeros(mesh.ndof)
    np.add.at(m, mesh.dof[e].ravel(), np.repeat(0.5 * ln, 2))
    nodes = np.unique(e)
    d = mesh.dof[nodes]
    return nodes, r[d] / m[d]


def mesh_quality(mesh: Mesh2) -> dict:
    """Angles, sizes, hole resolution and periodic pairing residual."""
    p = mesh.nodes[mesh.tris]
    ang = []
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        cosv = np.einsum("td,td->t", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        ang.append(np.degrees(np.arccos(np.clip(cosv, -1.0, 1.0))))
    ang = np.stack(ang, axis=1)
    out = {
        "n_nodes": mesh.n_nodes,
        "n_tris": mesh.n_tris,
        "min_angle": float(ang.min()),
        "max_angle": float(ang.max()),
        "min_area": float(mesh.areas.min()),
        "hole_segments": int(mesh.edges_with_tag("hole").shape[0]),
        "hole_distance": 0.0,
        "periodic_residual": 0.0,
    }
    hn = mesh.nodes_with_tag("hole")
    if hn.size:
        d = np.hypot(mesh.nodes[hn, 0] - mesh.center[0], mesh.nodes[hn, 1] - mesh.center[1])
        out["hole_distance"] = float(np.abs(d - mesh.hole_radius).max())
    if mesh.periodic:
        left = np.flatnonzero(mesh.nodes[:, 0] == 0.0)
        right = np.flatnonzero(mesh.nodes[:, 0] == 1.0)
        yl = np.sort(mesh.nodes[left, 1])
        yr = np.sort(mesh.nodes[right, 1])
        out["periodic_residual"] = float(np.abs(yl - yr).max())
    return out


def export_mesh(mesh: Mesh2, path, fields: Mapping[str, object] | None = None) -> None:
    """Write the mesh (and optional fields) as a plain-text table file.

    ``path`` may also be an open text stream.  Layout: a ``# nodes N``
    header followed by ``x y`` rows, ``# triangles`` with ``i j k`` rows,
    ``# edges`` with ``i j tag`` rows, and one ``# field NAME node|triangle``
    block per field.
    """
    if hasattr(path, "write"):
        _write_mesh(mesh, path, fields)
        return
    with open(path, "w", encoding="utf-8") as fh:
        _write_mesh(mesh, fh, fields)


def _write_mesh(mesh: Mesh2, fh, fields) -> None:
    inv = {v: k for k, v in TAGS.items()}
    fh.write(f"# nodes {mesh.n_nodes}\n")
    np.savetxt(fh, mesh.nodes, fmt="%.17g")
    fh.write(f"# triangles {mesh.n_tris}\n")
    np.savetxt(fh, mesh.tris, fmt="%d")
    fh.write(f"# edges {mesh.bedges.shape[0]}\n")
    for (i, j), t in zip(mesh.bedges, mesh.btags):
        fh.write(f"{i} {j} {inv[int(t)]}\n")
    for name, f in (fields or {}).items():
        if isinstance(f, ScalarField2):
            fh.write(f"# field {name} node\n")
            np.savetxt(fh, f.values, fmt="%.17g")
        else:
            fh.write(f"# field {name} triangle\n")
            np.savetxt(fh, f.values, fmt="%.17g")
