"""Plane-wave scattering at a homogenized wire interface ``{x3 = 0}``.

Time convention ``exp(-i omega t)``; the source-free system is
``curl E = i omega mu H`` and ``curl H = -i omega eps E``.  A plane wave
``E exp(i k.x)`` therefore has ``H = k x E / (omega mu)``.

Waves are parametrized by their tangential electric amplitudes
``(E1, E2)``; the normal component follows from ``k . E = 0``.  The wave
comes in from ``x3 < 0``.  At ``x3 = 0`` the tangential electric field is
continuous, and each interface kind adds two more conditions:

==============  ==================================
Reflecting      ``E1 = 0``, ``E2 = 0``
Inactive        ``[H1] = 0``, ``[H2] = 0``
PolarizingE1    ``E1 = 0``, ``[H1] = 0``
PolarizingE2    ``E2 = 0``, ``[H2] = 0``
==============  ==================================
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .classify import InterfaceKind

__all__ = [
    "MediaPair",
    "Incidence",
    "ScatteringResult",
    "scattering_matrices",
    "field_profile",
    "energy_balance",
    "PROFILE_COLUMNS",
    "MAX_ANGLE_DEG",
]

MAX_ANGLE_DEG = 89.9
PROFILE_COLUMNS = ("x3",) + tuple(f"{part}_{c}" for c in ("E1", "E2", "E3", "H1", "H2", "H3") for part in ("re", "im"))


@dataclass(frozen=True)
class MediaPair:
    """Relative material constants below (``minus``) and above (``plus``) the interface."""

    eps_minus: complex = 1.0
    eps_plus: complex = 1.0
    mu_minus: complex = 1.0
    mu_plus: complex = 1.0
    omega: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        for name in ("eps_minus", "eps_plus", "mu_minus", "mu_plus"):
            v = complex(getattr(self, name))
            if v.imag < 0:
                raise ValueError(f"{name} has negative imaginary part (active medium)")
            if v == 0:
                raise ValueError(f"{name} must be nonzero")
            object.__setattr__(self, name, v)

    @property
    def lossless(self) -> bool:
        return all(complex(getattr(self, n)).imag == 0 for n in ("eps_minus", "eps_plus", "mu_minus", "mu_plus"))


@dataclass(frozen=True)
class Incidence:
    """Incident amplitudes and direction.

    ``plane`` is ``"normal"``, ``"e1e3"`` or ``"e2e3"``; ``theta`` is in
    degrees from the interface normal.
    """

    A1: complex = 1.0
    A2: complex = 0.0
    theta: float = 0.0
    plane: str = "normal"

    def __post_init__(self):
        if self.plane not in ("normal", "e1e3", "e2e3"):
            raise ValueError(f"unsupported plane of incidence {self.plane!r}")
        if not 0.0 <= self.theta < 90.0:
            raise ValueError("incidence angle must lie in [0, 90) degrees")
        if self.plane == "normal" and self.theta != 0.0:
            raise ValueError("normal incidence requires theta = 0")
        object.__setattr__(self, "A1", complex(self.A1))
        object.__setattr__(self, "A2", complex(self.A2))


@dataclass(frozen=True)
class ScatteringResult:
    """Reflection and transmission matrices on tangential ``E`` amplitudes.

    Column ``m`` holds the response to a unit incident amplitude along
    ``e_m``.  ``balance[m]`` is (reflected + transmitted power) / incident
    power for that column.
    """

    R: np.ndarray
    T: np.ndarray
    balance: np.ndarray
    kind: InterfaceKind
    kt: tuple[complex, complex]
    kz_minus: complex
    kz_plus: complex


def _kz(k2: complex, kt2: complex) -> complex:
    kz = cmath.sqrt(k2 - kt2)
    if kz.imag < 0 or (kz.imag == 0 and kz.real < 0):
        kz = -kz
    return kz


def _wave(a1, a2, kx, ky, kz, omega, mu):
    """E and H vectors of the plane wave with tangential amplitude ``(a1, a2)``."""
    e3 = -(kx * a1 + ky * a2) / kz
    E = np.array([a1, a2, e3], dtype=complex)
    k = np.array([kx, ky, kz], dtype=complex)
    H = np.cross(k, E) / (omega * mu)
    return E, H


def _geometry(media: MediaPair, inc: Incidence):
    k_minus = media.omega * cmath.sqrt(media.eps_minus * media.mu_minus)
    kt = k_minus * math.sin(math.radians(inc.theta))
    kx, ky = (kt, 0j) if inc.plane == "e1e3" else ((0j, kt) if inc.plane == "e2e3" else (0j, 0j))
    kt2 = kx * kx + ky * ky
    w2 = media.omega**2
    kzm = _kz(w2 * media.eps_minus * media.mu_minus, kt2)
    kzp = _kz(w2 * media.eps_plus * media.mu_plus, kt2)
    return kx, ky, kzm, kzp


def _flux(E, H) -> float:
    return 0.5 * float(np.real(E[0] * np.conj(H[1]) - E[1] * np.conj(H[0])))


def scattering_matrices(media: MediaPair, inc: Incidence, kind) -> ScatteringResult:
    """Solve the 4x4 matching system at ``x3 = 0`` for both polarizations.

    Raises
    ------
    ValueError
        For grazing incidence beyond 89.9 degrees or an unclassified kind.
    """
    kind = InterfaceKind(kind)
    if kind is InterfaceKind.UNCLASSIFIED:
        raise ValueError("no interface condition is known for an unclassified interface")
    if inc.theta > MAX_ANGLE_DEG:
        raise ValueError(f"incidence angle {inc.theta} exceeds {MAX_ANGLE_DEG} degrees (ill-conditioned)")
    kx, ky, kzm, kzp = _geometry(media, inc)
    w = media.omega
    # columns: unit r1, r2, t1, t2 contributions to (E_below - E_above, H_below - H_above, E_above)
    cols = []
    for m in range(2):
        a = (1.0, 0.0) if m == 0 else (0.0, 1.0)
        E, H = _wave(*a, kx, ky, -kzm, w, media.mu_minus)
        cols.append((E, H, np.zeros(3), np.zeros(3)))
    for m in range(2):
        a = (1.0, 0.0) if m == 0 else (0.0, 1.0)
        E, H = _wave(*a, kx, ky, kzp, w, media.mu_plus)
        cols.append((np.zeros(3), np.zeros(3), E, H))

    def rows(Eb, Hb, Ea, Ha):
        jump_e = Eb - Ea
        jump_h = Ha - Hb
        out = [jump_e[0], jump_e[1]]
        if kind is InterfaceKind.REFLECTING:
            out += [Ea[0], Ea[1]]
        elif kind is InterfaceKind.INACTIVE:
            out += [jump_h[0], jump_h[1]]
        elif kind is InterfaceKind.POLARIZING_E1:
            out += [Ea[0], jump_h[0]]
        else:
            out += [Ea[1], jump_h[1]]
        return np.array(out, dtype=complex)

    A = np.column_stack([rows(*c) for c in cols])
    Rm = np.zeros((2, 2), dtype=complex)
    Tm = np.zeros((2, 2), dtype=complex)
    bal = np.zeros(2)
    for m in range(2):
        a = (1.0, 0.0) if m == 0 else (0.0, 1.0)
        Ei, Hi = _wave(*a, kx, ky, kzm, w, media.mu_minus)
        rhs = -rows(Ei, Hi, np.zeros(3), np.zeros(3))
        x = np.linalg.solve(A, rhs)
        Rm[:, m] = x[:2]
        Tm[:, m] = x[2:]
        Er, Hr = _wave(x[0], x[1], kx, ky, -kzm, w, media.mu_minus)
        Et, Ht = _wave(x[2], x[3], kx, ky, kzp, w, media.mu_plus)
        p_in = _flux(Ei, Hi)
        bal[m] = (-_flux(Er, Hr) + _flux(Et, Ht)) / p_in if p_in else float("nan")
    return ScatteringResult(Rm, Tm, bal, kind, (kx, ky), kzm, kzp)


def energy_balance(result: ScatteringResult, media: MediaPair, inc: Incidence | None = None) -> np.ndarray:
    """Per-polarization (reflected + transmitted) / incident power.

    Equals one for lossless media; for lossy media the value is reported and
    is at most one.
    """
    return result.balance.copy()


def field_profile(result: ScatteringResult, media: MediaPair, inc: Incidence, samples: int = 201) -> np.ndarray:
    """Total ``E`` and ``H`` along the normal line ``x1 = x2 = 0``, ``x3 in [-1, 1]``.

    Rows follow :data:`PROFILE_COLUMNS`: ``x3`` then real and imaginary parts
    of ``E1, E2, E3, H1, H2, H3``.  Below the interface the incident and
    reflected waves superpose; above it the transmitted wave alone.
    """
    kx, ky = result.kt
    kzm, kzp = result.kz_minus, result.kz_plus
    w = media.omega
    A = np.array([inc.A1, inc.A2])
    r = result.R @ A
    t = result.T @ A
    Ei, Hi = _wave(A[0], A[1], kx, ky, kzm, w, media.mu_minus)
    Er, Hr = _wave(r[0], r[1], kx, ky, -kzm, w, media.mu_minus)
    Et, Ht = _wave(t[0], t[1], kx, ky, kzp, w, media.mu_plus)
    x3 = np.linspace(-1.0, 1.0, samples)
    below = x3 < 0
    pi = np.exp(1j * kzm * x3)[:, None]
    pr = np.exp(-1j * kzm * x3)[:, None]
    pt = np.exp(1j * kzp * x3)[:, None]
    E = np.where(below[:, None], pi * Ei + pr * Er, pt * Et)
    H = np.where(below[:, None], pi * Hi + pr * Hr, pt * Ht)
    F = np.concatenate([E, H], axis=1)
    out = np.empty((samples, 13))
    out[:, 0] = x3
    out[:, 1::2] = F.real
    out[:, 2::2] = F.imag
    return out
