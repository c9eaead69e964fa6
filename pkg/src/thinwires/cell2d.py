"""Two-dimensional generators of the wire cell functions.

Five objects live here, all on the cross-section square ``V = (0,1)^2``:

* ``v_r`` - harmonic potential on ``V_r = V \\ B_r(z0)`` carrying a unit
  flux from the top edge into the hole (a FEM solve);
* ``u_r`` - the quadratic potential inside the hole, in closed form;
* ``psi_r`` - rotated gradient of ``u_r`` inside and ``v_r`` outside;
* ``phi`` - rotated gradient of a harmonic potential on ``V_R`` with unit
  tangential value on top and bottom, extended by zero into ``B_R``;
* ``phi_r`` - logarithmic radial profile vanishing on ``B_r``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import mesh_fem as mf
from .geometry import WireSpec, make_wire

__all__ = [
    "DEFAULT_H",
    "DEFAULT_GRADING",
    "DEFAULT_SEGMENTS",
    "ContinuityError",
    "URField",
    "Psi2D",
    "Phi2D",
    "PhiCrit2D",
    "solve_v_r",
    "eval_u_r",
    "assemble_psi_r",
    "solve_phi_ortho",
    "eval_phi_crit",
    "energy_ladder",
    "LadderRow",
    "fit_energy_constant",
]

DEFAULT_H = 0.02
DEFAULT_GRADING = 0.25
DEFAULT_SEGMENTS = 64
CONTINUITY_SAMPLES = 256

C2 = 1.0 / (8.0 * math.pi)


class ContinuityError(RuntimeError):
    """Tangential traces across the hole boundary disagree beyond tolerance."""


def _rot(g):
    return np.stack([-g[..., 1], g[..., 0]], axis=-1)


# ---------------------------------------------------------------------------
# v_r
# ---------------------------------------------------------------------------


def solve_v_r(spec: WireSpec, h: float = DEFAULT_H, grading: float = DEFAULT_GRADING, *,
              refine: int = 0, min_segments: int = DEFAULT_SEGMENTS) -> mf.ScalarField2:
    """Harmonic potential on ``V_r`` with unit flux from the top edge into the hole.

    Neumann data (outward normal derivative): ``-1`` on the top edge, ``0``
    on the bottom edge, ``1/|hole|`` on the hole boundary.  The hole length
    is the discrete perimeter so the discrete data balance exactly.  The
    additive constant is fixed by a zero mean over the guard circle.
    """
    mesh = mf.build_mesh(spec, h, grading, hole="wire", min_segments=min_segments, refine=refine)
    perimeter = mesh.boundary_length("hole")
    return mf.solve_poisson(mesh, 0.0, {"top": -1.0, "bottom": 0.0, "hole": 1.0 / perimeter}, "ring")


# ---------------------------------------------------------------------------
# u_r
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class URField:
    """Closed-form potential ``u_r(z) = -|z - z0|^2 / (4 pi r^2)`` on ``B_r(z0)``."""

    z0: tuple[float, float]
    r: float

    def value(self, z):
        z = np.asarray(z, dtype=float)
        d2 = (z[..., 0] - self.z0[0]) ** 2 + (z[..., 1] - self.z0[1]) ** 2
        return -d2 / (4.0 * math.pi * self.r**2)

    def grad(self, z):
        z = np.asarray(z, dtype=float)
        return -(z - np.asarray(self.z0)) / (2.0 * math.pi * self.r**2)

    def laplacian(self, z=None):
        val = -1.0 / (math.pi * self.r**2)
        if z is None:
            return val
        return np.full(np.asarray(z).shape[:-1], val)

    def rotated_grad(self, z):
        return _rot(self.grad(z))

    def conormal(self, theta):
        """Outward normal derivative on the circle ``|z - z0| = r`` at angle ``theta``."""
        th = np.asarray(theta, dtype=float)
        pts = np.stack([self.z0[0] + self.r * np.cos(th), self.z0[1] + self.r * np.sin(th)], axis=-1)
        g = self.grad(pts)
        return g[..., 0] * np.cos(th) + g[..., 1] * np.sin(th)

    def _polar(self, fn, n=16):
        # Gauss-Legendre in rho and the trapezoid rule in theta integrate the
        # polynomial integrands used here exactly.
        x, w = np.polynomial.legendre.leggauss(n)
        rho = 0.5 * self.r * (x + 1.0)
        wr = 0.5 * self.r * w * rho
        th = 2.0 * math.pi * np.arange(4 * n) / (4 * n)
        R, T = np.meshgrid(rho, th, indexing="ij")
        pts = np.stack([self.z0[0] + R * np.cos(T), self.z0[1] + R * np.sin(T)], axis=-1)
        return float(np.sum(wr[:, None] * fn(pts)) * 2.0 * math.pi / th.size)

    def grad_norm_sq(self) -> float:
        """``||grad u_r||^2`` over the disk, by exact polar quadrature."""
        return self._polar(lambda p: np.sum(self.grad(p) ** 2, axis=-1))

    def laplacian_norm_sq(self) -> float:
        return self._polar(lambda p: self.laplacian(p) ** 2)

    def mismatch_sq(self) -> float:
        """``||rot grad u_r - (1, 0)||^2`` over the disk."""
        return self._polar(lambda p: np.sum((self.rotated_grad(p) - np.array([1.0, 0.0])) ** 2, axis=-1))

    def fem_norms(self, n_segments: int = DEFAULT_SEGMENTS) -> dict:
        """Norms of the P1 interpolant of ``u_r`` on an unstructured disk mesh.

        The Laplacian is recovered weakly: stiffness residual plus the
        exact boundary flux, divided by the lumped mass.
        """
        mesh = mf.build_disk_mesh(self.z0, self.r, n_segments)
        u = mf.ScalarField2(mesh, self.value(mesh.nodes))
        grad_sq = mf.l2_norm_sq(mf.VecField2(mesh, u.gradient()))
        e = mesh.edges_with_tag("disk")
        ln = np.linalg.norm(mesh.nodes[e[:, 1]] - mesh.nodes[e[:, 0]], axis=1)
        g = np.zeros(mesh.n_nodes)
        np.add.at(g, e.ravel(), np.repeat(0.5 * ln * (-1.0 / (2.0 * math.pi * self.r)), 2))
        lumped = np.zeros(mesh.n_nodes)
        np.add.at(lumped, mesh.tris.ravel(), np.repeat(mesh.areas / 3.0, 3))
        lap = (g - mesh.stiffness @ u.values) / lumped
        lap_sq = mf.l2_norm_sq(mf.ScalarField2(mesh, lap))
        return {"grad_norm_sq": grad_sq, "laplacian_norm_sq": lap_sq, "n_nodes": mesh.n_nodes}


def eval_u_r(spec: WireSpec) -> URField:
    """The quadratic hole potential; flux ``-1/(2 pi r)`` matches ``v_r`` on the circle."""
    r = spec.r
    if r <= 0.0:
        raise ValueError("radius underflows; the hole potential is not representable")
    return URField(spec.z0, r)


# ---------------------------------------------------------------------------
# psi_r
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Psi2D:
    """The piecewise field ``rot grad u_r`` in ``B_r`` and ``rot grad v_r`` in ``V_r``.

    Norm attributes are squared ``L^2`` norms.  ``curl_*`` refer to the 2D
    curl ``d1 f2 - d2 f1``.
    """

    spec: WireSpec
    v: mf.ScalarField2
    u: URField
    outside: mf.VecField2
    outside_l2_sq: float
    outside_mismatch_sq: float
    inside_l2_sq: float
    inside_mismatch_sq: float
    curl_inside_sq: float
    curl_outside_residual: float
    continuity_error: float
    top_value_error: float
    bottom_value_error: float

    @property
    def mesh(self) -> mf.Mesh2:
        return self.v.mesh

    def evaluate(self, z) -> np.ndarray:
        """Point values; outside the hole the containing triangle's value."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        out = np.empty_like(z)
        d = np.hypot(z[:, 0] - self.spec.z0[0], z[:, 1] - self.spec.z0[1])
        ins = d <= self.spec.r
        out[ins] = self.u.rotated_grad(z[ins])
        if (~ins).any():
            t, _ = self.mesh.locate(z[~ins])
            if np.any(t < 0):
                # thin slivers between the circle and the inscribed polygon
                t = np.where(t < 0, _nearest_triangle(self.mesh, z[~ins]), t)
            out[~ins] = self.outside.values[t]
        return out


def _nearest_triangle(mesh: mf.Mesh2, pts) -> np.ndarray:
    c = mesh.centroids
    out = np.empty(len(pts), dtype=np.int64)
    for i, p in enumerate(pts):
        out[i] = int(np.argmin(np.sum((c - p) ** 2, axis=1)))
    return out


def _continuity(v: mf.ScalarField2, u: URField, n: int = CONTINUITY_SAMPLES) -> float:
    """Relative RMS mismatch of the tangential trace of psi across the hole.

    Tangential ``psi`` equals the radial derivative of the potential.  The
    outer trace is taken from the triangle just outside each sample angle.
    """
    mesh = v.mesh
    th = 2.0 * math.pi * (np.arange(n) + 0.5) / n
    s = u.r + 1e-9 * max(u.r, 1e-300) + 0.25 * (2.0 * math.pi * u.r / mesh.edges_with_tag("hole").shape[0])
    pts = np.column_stack([u.z0[0] + s * np.cos(th), u.z0[1] + s * np.sin(th)])
    t, _ = mesh.locate(pts)
    if np.any(t < 0):
        raise ContinuityError("trace samples fall outside the mesh")
    g = v.gradient()[t]
    outer = g[:, 0] * np.cos(th) + g[:, 1] * np.sin(th)
    inner = u.conormal(th)
    return float(np.sqrt(np.mean((outer - inner) ** 2)) / abs(inner[0]))


def assemble_psi_r(v: mf.ScalarField2, spec: WireSpec, *, continuity_tol: float = 0.1) -> Psi2D:
    """Glue ``v_r`` and ``u_r`` into ``psi_r`` and audit its invariants.

    Raises
    ------
    ContinuityError
        If the tangential traces across the hole disagree by more than
        ``continuity_tol`` (relative RMS), which signals a mesh too coarse
        for the hole.
    """
    mesh = v.mesh
    u = eval_u_r(spec)
    out = mf.rotated_gradient(v)
    cont = _continuity(v, u)
    if cont > continuity_tol:
        raise ContinuityError(f"tangential trace mismatch {cont:.3e} exceeds {continuity_tol:.3e}; refine the mesh")
    c = mf.weak_curl(out)
    interior = mf.interior_dofs(mesh)
    _, top = mf.boundary_flux(v, "top")
    _, bot = mf.boundary_flux(v, "bottom")
    return Psi2D(
        spec=spec,
        v=v,
        u=u,
        outside=out,
        outside_l2_sq=mf.l2_norm_sq(out),
        outside_mismatch_sq=mf.l2_norm_sq(out - np.array([1.0, 0.0])),
        inside_l2_sq=u.grad_norm_sq(),
        inside_mismatch_sq=u.mismatch_sq(),
        curl_inside_sq=u.laplacian_norm_sq(),
        curl_outside_residual=float(np.abs(c[interior]).max()) if interior.size else 0.0,
        continuity_error=cont,
        # psi . e1 = -d2 v: equals minus the outward flux on top, plus it on the bottom
        top_value_error=float(np.abs(-top - 1.0).max()),
        bottom_value_error=float(np.abs(bot).max()),
    )


# ---------------------------------------------------------------------------
# phi (orthogonal direction)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Phi2D:
    """``rot grad u_phi`` on ``V_R``, zero inside the guard disk ``B_R``."""

    z0: tuple[float, float]
    R: float
    u: mf.ScalarField2
    field: mf.VecField2
    mismatch_sq: float
    curl_residual: float
    top_value_error: float
    bottom_value_error: float

    @property
    def mesh(self) -> mf.Mesh2:
        return self.u.mesh

    def evaluate(self, z) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        out = np.zeros_like(z)
        d = np.hypot(z[:, 0] - self.z0[0], z[:, 1] - self.z0[1])
        outs = d > self.R
        if outs.any():
            t, _ = self.mesh.locate(z[outs])
            if np.any(t < 0):
                t = np.where(t < 0, _nearest_triangle(self.mesh, z[outs]), t)
            out[outs] = self.field.values[t]
        return out


@lru_cache(maxsize=16)
def _phi_ortho_cached(z0, R, h, grading, refine, min_segments) -> Phi2D:
    guard = make_wire(z0, R, R)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        mesh = mf.build_mesh(guard, h, grading, hole="guard", min_segments=min_segments, refine=refine)
    pin = int(np.argmin(np.hypot(mesh.nodes[:, 0], mesh.nodes[:, 1])))
    u = mf.solve_poisson(mesh, 0.0, {"top": -1.0, "bottom": 1.0, "hole": 0.0}, "pin", pin=pin)
    f = mf.rotated_gradient(u)
    c = mf.weak_curl(f)
    interior = mf.interior_dofs(mesh)
    _, top = mf.boundary_flux(u, "top")
    _, bot = mf.boundary_flux(u, "bottom")
    return Phi2D(
        z0=z0,
        R=R,
        u=u,
        field=f,
        mismatch_sq=mf.l2_norm_sq(f - np.array([1.0, 0.0])) + math.pi * R * R,
        curl_residual=float(np.abs(c[interior]).max()),
        top_value_error=float(np.abs(-top - 1.0).max()),
        bottom_value_error=float(np.abs(bot - 1.0).max()),
    )


def solve_phi_ortho(spec: WireSpec, h: float = DEFAULT_H, grading: float = DEFAULT_GRADING, *,
                    refine: int = 0, min_segments: int = DEFAULT_SEGMENTS) -> Phi2D:
    """Curl-free field with ``phi . e1 = 1`` on top and bottom, vanishing on ``B_R``.

    Depends on ``spec`` only through ``z0`` and ``R``; results are cached so
    specs that differ only in the wire radius share one object.
    ``mismatch_sq`` is ``||phi - (1, 0)||^2`` over the whole square.
    """
    return _phi_ortho_cached(tuple(spec.z0), float(spec.R), float(h), float(grading), int(refine), int(min_segments))


# ---------------------------------------------------------------------------
# phi_r (critical profile)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiCrit2D:
    """Radial profile ``(ln|z - z0| - ln r) / (ln R - ln r)`` clipped to ``[0, 1]``.

    The radius is carried as ``log_r`` so exponentially thin wires stay
    representable.
    """

    z0: tuple[float, float]
    log_r: float
    R: float

    @property
    def L(self) -> float:
        return math.log(self.R) - self.log_r

    def profile(self, rho):
        """Profile as a function of the distance; accepts complex ``rho``."""
        rho = np.asarray(rho)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (np.log(rho) - self.log_r) / self.L
        if np.iscomplexobj(t):
            re = t.real
            return np.where(re <= 0, 0.0, np.where(re >= 1, 1.0, t))
        return np.clip(t, 0.0, 1.0)

    def value(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        rho = np.hypot(z[..., 0] - self.z0[0], z[..., 1] - self.z0[1])
        with np.errstate(divide="ignore"):
            return self.profile(rho)

    def grad(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        d = z - np.asarray(self.z0)
        rho2 = np.sum(d * d, axis=-1)
        rho = np.sqrt(rho2)
        active = (np.log(np.maximum(rho, 1e-300)) > self.log_r) & (rho < self.R)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = d / (self.L * rho2)[..., None]
        return np.where(active[..., None], g, 0.0)

    def energy(self) -> float:
        """Closed-form Dirichlet energy ``2 pi / (ln R - ln r)``."""
        return 2.0 * math.pi / self.L

    def mismatch_sq(self) -> float:
        """Closed form of ``||phi_r - 1||^2`` over the square."""
        L = self.L
        r2 = math.exp(2.0 * self.log_r)
        tail = math.exp(-2.0 * L) * (0.5 * L * L + 0.5 * L + 0.25)
        return math.pi * r2 + 2.0 * math.pi * self.R**2 / (L * L) * (0.25 - tail)

    def profile_log(self, t):
        """Profile as a function of ``t = ln|z - z0|``; accepts complex ``t``."""
        t = np.asarray(t)
        s = (t - self.log_r) / self.L
        re = s.real
        return np.where(re <= 0, 0.0, np.where(re >= 1, 1.0, s))

    def energy_quadrature(self, n: int = 32, panels: int = 16) -> float:
        """Polar quadrature of the energy with a complex-step radial derivative.

        In ``t = ln rho`` the energy density is ``2 pi (d phi / dt)^2``, so
        composite Gauss-Legendre over ``[ln r, ln R]`` never forms ``r``
        itself.  Independent of the closed form.
        """
        x, w = np.polynomial.legendre.leggauss(n)
        edges = np.linspace(self.log_r, math.log(self.R), panels + 1)
        step = 1e-30
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            t = 0.5 * (b - a) * x + 0.5 * (a + b)
            dphi = np.imag(self.profile_log(t + 1j * step)) / step
            total += 0.5 * (b - a) * np.sum(w * dphi**2)
        return 2.0 * math.pi * total


def eval_phi_crit(spec: WireSpec) -> PhiCrit2D:
    """Critical profile for ``spec``; requires ``r <= R^2``."""
    if spec.log_r > 2.0 * math.log(spec.R) + 1e-12:
        raise ValueError(f"profile requires r <= R^2 (ln r = {spec.log_r:.4g}, 2 ln R = {2 * math.log(spec.R):.4g})")
    return PhiCrit2D(tuple(spec.z0), spec.log_r, spec.R)


# ---------------------------------------------------------------------------
# ladders
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LadderRow:
    r: float
    energy: float
    ring_mean: float
    ring_mean_exact: float
    flux: float

    @property
    def ring_mean_error(self) -> float:
        return abs(self.ring_mean - self.ring_mean_exact) / self.ring_mean_exact


def _ladder_point(args) -> LadderRow:
    z0, r, R, h, grading, refine = args
    spec = make_wire(z0, r, R)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v = solve_v_r(spec, h, grading, refine=refine)
    return LadderRow(
        r=r,
        energy=mf.l2_norm_sq(mf.rotated_gradient(v)),
        ring_mean=mf.ring_mean(v, r),
        ring_mean_exact=math.log(R / r) / (2.0 * math.pi),
        flux=mf.circle_flux(v, 0.5 * (r + R)),
    )


def energy_ladder(radii, R: float = 0.25, z0=(0.5, 0.5), h: float = DEFAULT_H, grading: float = DEFAULT_GRADING,
                  *, refine: int = 0, jobs: int = 1) -> list[LadderRow]:
    """Solve ``v_r`` for each radius; rows are returned sorted by ``r``."""
    tasks = [(tuple(z0), float(r), float(R), h, grading, refine) for r in sorted(radii)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_ladder_point, tasks))
    return [_ladder_point(t) for t in tasks]


def fit_energy_constant(rows) -> dict:
    """Least-squares slope of energy against ``ln(1/r)`` and the bound constant.

    ``C1`` is the smallest constant with ``energy <= C1 |ln r|`` on all rows.
    """
    x = np.array([-math.log(row.r) for row in rows])
    e = np.array([row.energy for row in rows])
    slope, intercept = np.polyfit(x, e, 1)
    return {"slope": float(slope), "intercept": float(intercept), "C1": float(np.max(e / x))}
