"""Three-dimensional cell functions on the cylinder ``Z = (0,1)^2 x R``.

A cell function is stored as its 2D generator on the ``(x2, x3)`` square
plus the rule that extends it in ``x1`` and outside the slab
``0 < x3 < 1``.  All 3D norms reduce to 2D quadrature times analytic factors:
the fields do not depend on ``x1`` except through the gap indicator, and
they equal their asymptotic constants outside the slab.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cell2d import Phi2D, PhiCrit2D, Psi2D
from .geometry import DeformationMap, InvalidDeformation, WireSpec, validate_deformation

__all__ = [
    "Kind",
    "CellFunction3",
    "DefectPair",
    "TileReport",
    "PiolaReport",
    "assemble_psi3",
    "assemble_phi3_ortho",
    "assemble_phi3_crit",
    "trivial_e3",
    "defect_pair",
    "defect_ladder",
    "rescale_tile_norms",
    "piola_transport",
    "fd_curl",
]


class Kind(str, Enum):
    PSI = "Psi"
    PHI_ORTHO = "PhiOrtho"
    PHI_CRIT = "PhiCrit"
    TRIVIAL_E3 = "TrivialE3"


#: Integration domain of the defect functionals: the obstacle is removed for
#: H-type functions and kept for E-type ones.
DOMAIN = {Kind.PSI: "Z_eta", Kind.PHI_ORTHO: "Z", Kind.PHI_CRIT: "Z", Kind.TRIVIAL_E3: "Z"}


@dataclass(frozen=True, eq=False)
class CellFunction3:
    """A cell function with closed-form cell norms.

    Attributes
    ----------
    kind : Kind
    generator : Psi2D, Phi2D, PhiCrit2D or None
    spec : WireSpec or None
        The obstacle the function is built for (``None`` for ``TrivialE3``).
    target : int
        Index ``j`` of the approximated unit vector ``e_j`` (1-based).
    l2_defect_sq : float
        Squared ``L^2`` distance to the target over the kind's domain.
    curl_sq : float
        Squared ``L^2`` norm of the curl over the same domain.
    """

    kind: Kind
    generator: object
    spec: WireSpec | None
    target: int
    l2_defect_sq: float
    curl_sq: float

    @property
    def domain(self) -> str:
        return DOMAIN[self.kind]

    def evaluate(self, x) -> np.ndarray:
        """Point values at ``x`` of shape ``(n, 3)``; ``x1, x2`` are reduced mod 1."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        x3 = x[:, 2]
        above = x3 >= 1.0
        slab = (x3 > 0.0) & ~above
        z = np.column_stack([np.mod(x[:, 1], 1.0), x3])
        if self.kind is Kind.TRIVIAL_E3:
            out[~slab, 2] = 1.0
            return out
        if self.kind is Kind.PHI_CRIT:
            out[:, 0] = self.generator.value(z)
            return out
        out[above, 1] = 1.0
        if slab.any():
            g = self.generator.evaluate(z[slab])
            out[slab, 1] = g[:, 0]
            out[slab, 2] = g[:, 1]
        return out


def assemble_psi3(psi: Psi2D, spec: WireSpec | None = None) -> CellFunction3:
    """H-type function ``(0, psi_1, psi_2)`` in the slab, ``e2`` above, ``0`` below.

    Its curl is ``(curl2d psi, 0, 0)``: zero on ``V_r``, ``Lap u_r`` in the
    wire.  Over ``Z_eta`` the wire material is excluded, so only the gaps
    carry curl.
    """
    spec = spec or psi.spec
    gap = spec.gap_measure
    return CellFunction3(
        kind=Kind.PSI,
        generator=psi,
        spec=spec,
        target=2,
        l2_defect_sq=psi.outside_mismatch_sq + gap * psi.inside_mismatch_sq,
        curl_sq=gap * psi.curl_inside_sq,
    )


def assemble_phi3_ortho(phi: Phi2D, spec: WireSpec | None = None) -> CellFunction3:
    """E-type function ``(0, phi_1, phi_2)`` in the slab and ``e2`` outside.

    Independent of ``eta``; vanishes on ``B_R`` hence on any wire of radius
    at most ``R`` about the same centre.
    """
    if spec is not None and (tuple(spec.z0) != tuple(phi.z0) or spec.r > phi.R):
        raise ValueError("wire is not contained in the guard disk of the generator")
    return CellFunction3(Kind.PHI_ORTHO, phi, spec, 2, phi.mismatch_sq, 0.0)


def assemble_phi3_crit(phic: PhiCrit2D, spec: WireSpec | None = None) -> CellFunction3:
    """E-type function ``e1 phi_r(x2, x3)``; curl ``(0, d3 phi_r, -d2 phi_r)``."""
    return CellFunction3(Kind.PHI_CRIT, phic, spec, 1, phic.mismatch_sq(), phic.energy())


def trivial_e3() -> CellFunction3:
    """``e3`` outside the slab and zero inside: curl-free, vanishes on any obstacle.

    The distance to the constant ``e3`` is one per unit slab volume.
    """
    return CellFunction3(Kind.TRIVIAL_E3, None, None, 3, 1.0, 0.0)


@dataclass(frozen=True)
class DefectPair:
    """``a = eta^(1/2) ||mismatch||`` and ``b = eta^(-1/2) ||curl||``."""

    a: float
    b: float
    eta: float
    kind: str
    domain: str
    r: float = float("nan")
    gap: float = 0.0

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise ValueError("defects are norms and cannot be negative")

    def as_row(self) -> dict:
        return {"eta": self.eta, "a": self.a, "b": self.b, "kind": self.kind, "r": self.r, "gap": self.gap}


def defect_pair(cf: CellFunction3, eta: float) -> DefectPair:
    """Evaluate the two scaled defect norms of ``cf`` at scale ``eta``."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    spec = cf.spec
    return DefectPair(
        a=math.sqrt(eta * cf.l2_defect_sq),
        b=math.sqrt(cf.curl_sq / eta),
        eta=float(eta),
        kind=cf.kind.value,
        domain=cf.domain,
        r=spec.r if spec is not None else float("nan"),
        gap=spec.gap_measure if spec is not None else 0.0,
    )


def defect_ladder(build, etas) -> list[DefectPair]:
    """``build(eta) -> CellFunction3`` evaluated along ``etas``; sorted by ``eta``."""
    return [defect_pair(build(e), e) for e in sorted(etas, reverse=True)]


# ---------------------------------------------------------------------------
# rescaling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TileReport:
    """Norms of the rescaled field ``x -> F(x / eta)`` over ``(0,1)^2 x (-M eta, M eta)``.

    For integer ``1/eta`` the tiled values are exact.  Otherwise they are
    upper bounds obtained by counting every partially covered cell.
    """

    eta: float
    cells: int
    exact: bool
    l2_sq: float
    curl_sq: float
    predicted_l2_sq: float
    predicted_curl_sq: float

    @property
    def l2_ratio(self) -> float:
        return self.l2_sq / self.predicted_l2_sq if self.predicted_l2_sq else float("nan")

    @property
    def curl_ratio(self) -> float:
        return self.curl_sq / self.predicted_curl_sq if self.predicted_curl_sq else float("nan")


def rescale_tile_norms(cf: CellFunction3, eta: float, M: float = 1.0) -> TileReport:
    """Tile the cell function at scale ``eta`` over the unit interface square.

    Each cell ``eta (k + Z)`` contributes ``eta^3`` times the cell integral;
    the curl picks up a factor ``eta^-1`` per derivative.  For H-type
    functions the field is cut off on the obstacle, so the obstacle volume
    ``(1 - |I|) pi r^2`` adds to the mismatch of every cell.

    ``M`` is the vertical half-height of the window in cell units.  The
    constructed functions equal their asymptotic constants outside the slab,
    so every ``M >= 1`` gives the same result.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    if M < 1.0:
        raise ValueError("the window must contain the whole slab (M >= 1)")
    n = 1.0 / eta
    exact = abs(n - round(n)) < 1e-9 * n
    cells = int(round(n)) ** 2 if exact else int(math.ceil(n) + 1) ** 2
    per_cell_l2 = cf.l2_defect_sq
    if cf.kind is Kind.PSI:
        per_cell_l2 += (1.0 - cf.spec.gap_measure) * math.pi * cf.spec.r**2
    l2 = cells * eta**3 * per_cell_l2
    curl = cells * eta**3 * eta**-2 * cf.curl_sq
    pair = defect_pair(cf, eta)
    pred_l2 = pair.a**2
    if cf.kind is Kind.PSI:
        pred_l2 += eta * (1.0 - cf.spec.gap_measure) * math.pi * cf.spec.r**2
    return TileReport(eta, cells, exact, l2, curl, pred_l2, pair.b**2)


# ---------------------------------------------------------------------------
# Piola transport
# ---------------------------------------------------------------------------


def fd_curl(J: np.ndarray) -> np.ndarray:
    """Curl from a Jacobian array ``J[..., l, m] = d F_l / d x_m``."""
    return np.stack([J[..., 2, 1] - J[..., 1, 2], J[..., 0, 2] - J[..., 2, 0], J[..., 1, 0] - J[..., 0, 1]], axis=-1)


def _fd_jacobian(F: np.ndarray, h: float) -> np.ndarray:
    J = np.empty(F.shape + (3,))
    for l in range(3):
        d = np.gradient(F[..., l], h, edge_order=2)
        for m in range(3):
            J[..., l, m] = d[m]
    return J


@dataclass(frozen=True)
class PiolaReport:
    n: int
    residual: float
    transported_l2_sq: float
    original_l2_sq: float
    bound_constant: float

    @property
    def energy_bound_holds(self) -> bool:
        return self.transported_l2_sq <= self.bound_constant * self.original_l2_sq * (1 + 1e-12)


def piola_transport(field, dmap: DeformationMap, *, skip: int = 2):
    """Covariant Piola transform of a sampled field and a curl-identity audit.

    Parameters
    ----------
    field : array (n, n, n, 3), callable or CellFunction3
        The reference field on the grid of ``dmap`` (callables and cell
        functions are sampled there).
    dmap : DeformationMap
    skip : int
        Number of boundary layers left out of the residual.

    Returns
    -------
    transported : array (n, n, n, 3)
        ``D phi^-T F`` at the reference grid points, i.e. the transported
        field at the image points ``phi(x)``.
    report : PiolaReport
        ``residual`` is the relative RMS difference at interior points
        between the physical curl of the transported field (chain rule
        through ``D phi^-1``) and ``det(D phi)^-1 D phi curl F``.
    """
    rep = validate_deformation(dmap)
    if not rep.passed:
        raise InvalidDeformation(f"deformation fails validation (boundary {rep.boundary_residual:.2e}, "
                                 f"periodicity {rep.periodicity_residual:.2e})")
    n = dmap.n
    x = dmap.grid
    h = float(x[1] - x[0])
    if isinstance(field, CellFunction3):
        field = field.evaluate
    if callable(field):
        X = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1)
        F = np.asarray(field(X.reshape(-1, 3)), dtype=float).reshape(n, n, n, 3)
    else:
        F = np.asarray(field, dtype=float)
        if F.shape != (n, n, n, 3):
            raise ValueError(f"field must be sampled on the {n}^3 grid of the map")
    D = dmap.jacobian()
    Dinv = np.linalg.inv(D)
    det = np.linalg.det(D)
    T = np.einsum("...ml,...m->...l", Dinv, F)
    # physical Jacobian of the transported field by the chain rule
    Jy = np.einsum("...lk,...km->...lm", _fd_jacobian(T, h), Dinv)
    lhs = fd_curl(Jy)
    rhs = np.einsum("...lm,...m->...l", D, fd_curl(_fd_jacobian(F, h))) / det[..., None]
    s = slice(skip, n - skip)
    diff = (lhs - rhs)[s, s, s]
    scale = np.sqrt(np.mean(np.sum(rhs[s, s, s] ** 2, axis=-1)))
    residual = float(np.sqrt(np.mean(np.sum(diff**2, axis=-1))) / max(scale, 1e-300))
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    W = w[:, None, None] * w[None, :, None] * w[None, None, :] * h**3
    original = float(np.sum(W * np.sum(F**2, axis=-1)))
    transported = float(np.sum(W * det * np.sum(T**2, axis=-1)))
    bound = rep.lipschitz**3 * rep.lipschitz_inverse**2
    return T, PiolaReport(n, residual, transported, original, bound)
