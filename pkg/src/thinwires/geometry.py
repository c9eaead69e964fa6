"""Wire cross-sections, gap sets, and deformation maps of the unit cell.

A wire runs along ``e1`` through the cell ``Y = (0,1)^3``.  Its cross-section
in the ``(x2, x3)`` plane is the disk ``B_r(z0)``; gaps are sub-intervals of
the axis where the wire material is removed.  An ``e2``-wire is the same
object after swapping ``x1`` and ``x2`` (see :func:`swap_axes`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

__all__ = [
    "WireSpec",
    "make_wire",
    "wire_included",
    "canonical_gaps",
    "DeformationMap",
    "DeformationReport",
    "InvalidDeformation",
    "validate_deformation",
    "swap_axes",
    "random_smooth_deformation",
]


class InvalidDeformation(ValueError):
    """Raised when a deformation is not orientation preserving."""


def canonical_gaps(gaps: Sequence[Sequence[float]]) -> tuple[tuple[float, float], ...]:
    """Sort gap intervals and merge the ones that touch at an endpoint.

    Overlapping intervals are an error; touching ones are merged since the
    obstacle is defined through closures and the measure is unchanged.
    """
    items = sorted((float(a), float(b)) for a, b in gaps)
    out: list[tuple[float, float]] = []
    for a, b in items:
        if not (0.0 <= a < b <= 1.0):
            raise ValueError(f"gap ({a}, {b}) is not an open subinterval of (0, 1)")
        if out and a < out[-1][1]:
            raise ValueError(f"gap ({a}, {b}) overlaps ({out[-1][0]}, {out[-1][1]})")
        if out and a == out[-1][1]:
            out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return tuple(out)


@dataclass(frozen=True)
class WireSpec:
    """Validated wire ``((0,1) minus gaps) x B_r(z0)`` with guard radius ``R``.

    ``log_r`` is the canonical radius; ``r`` may underflow to 0.0 for the
    exponentially thin wires of the critical regime.
    """

    z0: tuple[float, float]
    log_r: float
    R: float
    gaps: tuple[tuple[float, float], ...] = ()

    @property
    def r(self) -> float:
        return math.exp(self.log_r)

    @property
    def gap_measure(self) -> float:
        return sum(b - a for a, b in self.gaps)

    def in_gap(self, x1):
        x1 = np.asarray(x1, dtype=float)
        hit = np.zeros(x1.shape, dtype=bool)
        for a, b in self.gaps:
            hit |= (x1 > a) & (x1 < b)
        return hit

    def contains(self, points) -> np.ndarray:
        """Membership of 3D points in the (closed-ball) wire segment."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        d2 = (p[:, 1] - self.z0[0]) ** 2 + (p[:, 2] - self.z0[1]) ** 2
        inside = (d2 <= self.r**2) & (p[:, 0] >= 0.0) & (p[:, 0] <= 1.0)
        return inside & ~self.in_gap(p[:, 0])

    def sample_obstacle(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform random points of the wire material (gaps excluded)."""
        out = np.empty((0, 3))
        while out.shape[0] < n:
            m = 2 * (n - out.shape[0]) + 16
            rho = self.r * np.sqrt(rng.random(m))
            th = 2 * np.pi * rng.random(m)
            x1 = rng.random(m)
            pts = np.column_stack([x1, self.z0[0] + rho * np.cos(th), self.z0[1] + rho * np.sin(th)])
            out = np.vstack([out, pts[~self.in_gap(x1)]])
        return out[:n]

    def to_dict(self) -> dict:
        return {"z0": list(self.z0), "r": self.r, "log_r": self.log_r, "R": self.R, "gaps": [list(g) for g in self.gaps]}

    @classmethod
    def from_dict(cls, d: dict) -> "WireSpec":
        return make_wire(d["z0"], d.get("r"), d["R"], d.get("gaps", ()), log_r=d.get("log_r"))


def make_wire(z0, r, R, gaps=(), *, log_r=None) -> WireSpec:
    """Build a validated :class:`WireSpec`.

    Parameters
    ----------
    z0 : pair of float
        Centre of the cross-section disk in the unit square.
    r : float or None
        Wire radius.  May be ``None`` when ``log_r`` is given.
    R : float
        Guard radius, ``r <= R`` and ``closure(B_R(z0))`` inside ``(0,1)^2``.
    gaps : sequence of (a, b)
        Disjoint open subintervals of ``(0, 1)`` removed from the wire.
    log_r : float, optional
        Natural log of the radius, for radii below the float range.
    """
    z0 = (float(z0[0]), float(z0[1]))
    if log_r is None:
        if r is None or not r > 0:
            raise ValueError(f"radius must be positive, got {r}")
        log_r = math.log(r)
    log_r = float(log_r)
    if not math.isfinite(log_r):
        raise ValueError("radius must be positive and finite")
    R = float(R)
    if not R > 0:
        raise ValueError(f"guard radius must be positive, got {R}")
    if log_r > math.log(R) + 1e-15:
        raise ValueError(f"wire radius {math.exp(log_r)} exceeds guard radius {R}")
    dist = min(z0[0], z0[1], 1.0 - z0[0], 1.0 - z0[1])
    if not dist > R:
        raise ValueError(f"closure of B_R(z0) must lie inside the unit square (R={R}, distance to edge {dist})")
    g = canonical_gaps(gaps)
    if sum(b - a for a, b in g) >= 1.0:
        raise ValueError("total gap measure must be < 1")
    return WireSpec(z0=z0, log_r=log_r, R=R, gaps=g)


def _interval_covered(a: float, b: float, cover: Sequence[tuple[float, float]]) -> bool:
    return any(c <= a and b <= d for c, d in cover)


def wire_included(a: WireSpec, b: WireSpec) -> bool:
    """True iff the material of wire ``a`` is a subset of the material of ``b``.

    Same centre, ``a.r <= b.r`` and every gap of ``b`` is also a gap of ``a``.
    """
    if a.z0 != b.z0:
        return False
    if a.log_r > b.log_r:
        return False
    return all(_interval_covered(lo, hi, a.gaps) for lo, hi in b.gaps)


def swap_axes(points):
    """Exchange ``x1`` and ``x2``; maps an ``e1``-wire to an ``e2``-wire."""
    p = np.array(points, dtype=float, copy=True)
    p[..., [0, 1]] = p[..., [1, 0]]
    return p


# ---------------------------------------------------------------------------
# deformations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeformationReport:
    lipschitz: float
    lipschitz_inverse: float
    min_det: float
    boundary_residual: float
    periodicity_residual: float
    tolerance: float
    passed: bool

    @property
    def bound(self) -> float:
        """The constant ``C`` with ``|D phi| + |D phi^-1| <= C``."""
        return self.lipschitz + self.lipschitz_inverse


@dataclass(frozen=True, eq=False)
class DeformationMap:
    """Deformation of the unit cube stored as samples on a regular grid.

    ``samples[i, j, k]`` is the image of ``(x[i], x[j], x[k])``.  Values
    between samples are trilinear.  ``analytic`` records whether the samples
    came from an exact formula, which tightens validation tolerances.
    """

    samples: np.ndarray
    analytic: bool = False
    grid: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 4 or s.shape[3] != 3 or not (s.shape[0] == s.shape[1] == s.shape[2]):
            raise ValueError("samples must have shape (n, n, n, 3)")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "grid", np.linspace(0.0, 1.0, s.shape[0]))

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], n: int) -> "DeformationMap":
        x = np.linspace(0.0, 1.0, n)
        X = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1)
        return cls(np.asarray(fn(X.reshape(-1, 3))).reshape(n, n, n, 3), analytic=True)

    @classmethod
    def identity(cls, n: int = 8) -> "DeformationMap":
        return cls.from_function(lambda p: p, n)

    def __call__(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty_like(p)
        for c in range(3):
            f = RegularGridInterpolator((self.grid,) * 3, self.samples[..., c], method="linear")
            out[:, c] = f(np.clip(p, 0.0, 1.0))
        return out

    def jacobian(self) -> np.ndarray:
        """Second-order finite-difference Jacobian, shape ``(n, n, n, 3, 3)``.

        ``J[..., l, m] = d phi_l / d x_m``.
        """
        h = self.grid[1] - self.grid[0]
        J = np.empty(self.samples.shape[:3] + (3, 3))
        for l in range(3):
            d = np.gradient(self.samples[..., l], h, edge_order=2)
            for m in range(3):
                J[..., l, m] = d[m]
        return J

    def to_dict(self) -> dict:
        return {"n": self.n, "analytic": self.analytic, "samples": self.samples.reshape(-1, 3).tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "DeformationMap":
        n = int(d["n"])
        return cls(np.asarray(d["samples"], dtype=float).reshape(n, n, n, 3), analytic=bool(d.get("analytic", False)))


def validate_deformation(dmap: DeformationMap, tol: float | None = None) -> DeformationReport:
    """Measure Jacobian bounds, boundary identity and periodicity of ``dmap``.

    Raises :class:`InvalidDeformation` if ``det D phi <= 0`` anywhere.  The
    default tolerance is ``1e-8`` for analytic maps and the grid spacing for
    sampled ones.
    """
    if dmap.n < 8:
        raise ValueError("deformation must be sampled on at least 8^3 points")
    J = dmap.jacobian()
    det = np.linalg.det(J)
    min_det = float(det.min())
    if min_det <= 0.0:
        raise InvalidDeformation(f"Jacobian determinant {min_det:.3e} <= 0: map folds the cell")
    sv = np.linalg.svd(J, compute_uv=False)
    lip = float(sv[..., 0].max())
    lip_inv = float((1.0 / sv[..., -1]).max())

    s = dmap.samples
    x = dmap.grid
    X = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1)
    disp = s - X
    bnd = max(np.abs(disp[:, :, 0]).max(), np.abs(disp[:, :, -1]).max())
    per = max(np.abs(disp[0] - disp[-1]).max(), np.abs(disp[:, 0] - disp[:, -1]).max())
    if tol is None:
        tol = 1e-8 if dmap.analytic else float(x[1] - x[0])
    passed = bnd <= tol and per <= tol
    return DeformationReport(
        lipschitz=lip,
        lipschitz_inverse=lip_inv,
        min_det=min_det,
        boundary_residual=float(bnd),
        periodicity_residual=float(per),
        tolerance=float(tol),
        passed=bool(passed),
    )


def random_smooth_deformation(rng: np.random.Generator, amplitude: float = 0.04, modes: int = 2):
    """Random smooth bi-Lipschitz map of the unit cube, as a callable.

    The displacement is a short trigonometric series that is 1-periodic in
    ``x1`` and ``x2`` and carries a factor ``sin(pi x3)``, so the map is the
    identity on the faces ``x3 = 0`` and ``x3 = 1``.  Sampled draws with
    the default amplitude keep the Jacobian determinant above 0.25; callers
    should still run :func:`validate_deformation`.
    """
    k = rng.integers(1, modes + 1, size=(3, 2))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=(3, 2))
    amp = amplitude * rng.uniform(0.5, 1.0, size=3) * rng.choice([-1.0, 1.0], size=3)

    def phi(p):
        p = np.asarray(p, dtype=float)
        out = p.copy()
        bump = np.sin(np.pi * p[..., 2])
        for l in range(3):
            wave = (np.sin(2 * np.pi * k[l, 0] * p[..., 0] + phase[l, 0])
                    * np.cos(2 * np.pi * k[l, 1] * p[..., 1] + phase[l, 1]))
            out[..., l] += amp[l] * bump * wave
        return out

    return phi
