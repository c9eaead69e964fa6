"""Named tolerance sets used by the verification tasks."""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Tolerances:
    name: str
    exact: float            # closed-form identities
    fem_relative: float     # FEM versus closed form at the default mesh
    slope_relative: float   # energy slope versus 1/(2 pi)
    curl_residual: float    # weak curl of rotated gradients
    quadrature: float       # independent quadrature of closed forms
    power_balance: float    # lossless scattering
    defect_threshold: float  # final value of defect ladders
    continuity: float       # tangential trace mismatch across the hole
    refine: int             # mesh refinement level used by verify tasks

    def as_dict(self) -> dict:
        return asdict(self)


PROFILES = {
    "default": Tolerances("default", 1e-12, 0.02, 0.15, 1e-8, 1e-6, 1e-12, 0.1, 0.1, 0),
    "strict": Tolerances("strict", 1e-13, 0.01, 0.05, 1e-9, 1e-8, 1e-13, 0.1, 0.05, 1),
}


def get(name: str) -> Tolerances:
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown tolerance profile {name!r}; choose from {sorted(PROFILES)}") from None
