"""Asymptotic classification of wire families and the resulting interface kind.

A family is a law ``eta -> (r_eta, |I_eta|)``.  Two limits decide it:

* the critical quantity ``eta |ln r_eta|``;
* the gap quantity ``|I_eta| / (eta r_eta^2)``.

Both are computed in closed form for the parametric families below and
cross-checked against a numeric ladder ``eta = 2^-3 .. 2^-16``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .geometry import DeformationMap, WireSpec, make_wire, validate_deformation, wire_included

__all__ = [
    "LimitKind",
    "Limit",
    "Limits",
    "RegimeLaw",
    "Verdict",
    "ConnectivityVerdict",
    "InterfaceKind",
    "ClassificationError",
    "regime_limits",
    "connectivity_verdict",
    "interface_kind",
    "classify",
    "monotone_consistency",
    "MonotoneCheck",
    "standard_suite",
    "LADDER",
]

LADDER = tuple(2.0**-k for k in range(3, 17))
TREND_POINTS = 6
TREND_RATIO = 0.05


class ClassificationError(RuntimeError):
    """Closed form and numeric ladder disagree, or verdicts break monotonicity."""


class LimitKind(str, Enum):
    ZERO = "0"
    FINITE = "finite"
    INFINITE = "inf"


@dataclass(frozen=True)
class Limit:
    kind: LimitKind
    value: float = float("nan")

    def __str__(self):
        if self.kind is LimitKind.FINITE:
            return f"{self.value:.6g}"
        return self.kind.value

    @classmethod
    def zero(cls):
        return cls(LimitKind.ZERO, 0.0)

    @classmethod
    def inf(cls):
        return cls(LimitKind.INFINITE, math.inf)

    @classmethod
    def finite(cls, v):
        return cls(LimitKind.FINITE, float(v))

    @classmethod
    def from_exponent(cls, coeff: float, exponent: float):
        """Limit of ``coeff * eta^exponent`` as ``eta -> 0``."""
        if exponent > 0:
            return cls.zero()
        if exponent < 0:
            return cls.inf()
        return cls.finite(coeff)


# ---------------------------------------------------------------------------
# laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegimeLaw:
    """Parametric family of wires indexed by the period ``eta``.

    ``radius`` is one of ``"power"`` (``r = a eta^p``), ``"stretched_exp"``
    (``r = exp(-c eta^-q)``) or ``"constant"`` (``r = a``).  ``gap`` is
    ``"zero"`` or ``"power"`` (``|I| = g eta^s``, one interval centred on the
    axis).  ``compact`` marks an obstacle compactly contained in the cell,
    for which no wire parameters are needed.
    """

    radius: str = "power"
    a: float = 1.0
    p: float = 1.0
    c: float = 1.0
    q: float = 1.0
    gap: str = "zero"
    g: float = 0.0
    s: float = 0.0
    axis: int = 1
    compact: bool = False
    R: float = 0.25
    z0: tuple[float, float] = (0.5, 0.5)
    deformation: DeformationMap | None = field(default=None, compare=False, repr=False)
    name: str = ""

    def __post_init__(self):
        if self.axis not in (1, 2):
            raise ValueError("wire axis must be 1 or 2")
        if self.compact:
            return
        if self.radius == "power":
            if not (self.a > 0 and self.p >= 0):
                raise ValueError("power radius law needs a > 0 and p >= 0")
        elif self.radius == "stretched_exp":
            if not (self.c > 0 and self.q > 0):
                raise ValueError("stretched-exponential law needs c > 0 and q > 0")
        elif self.radius == "constant":
            if not self.a > 0:
                raise ValueError("constant radius must be positive")
            if self.a > self.R:
                raise ValueError(f"constant radius {self.a} exceeds the guard radius {self.R}")
        else:
            raise ValueError(f"unknown radius law {self.radius!r}")
        if self.gap == "power":
            if not (self.g > 0 and self.s >= 0):
                raise ValueError("power gap law needs g > 0 and s >= 0")
        elif self.gap != "zero":
            raise ValueError(f"unknown gap law {self.gap!r}")

    # --- evaluation -------------------------------------------------------
    def log_r(self, eta):
        eta = np.asarray(eta, dtype=float)
        if self.radius == "power":
            return math.log(self.a) + self.p * np.log(eta)
        if self.radius == "constant":
            return np.full(eta.shape, math.log(self.a))
        return -self.c * eta ** (-self.q)

    def gap_measure(self, eta):
        eta = np.asarray(eta, dtype=float)
        if self.gap == "zero":
            return np.zeros(eta.shape)
        return self.g * eta**self.s

    def wire(self, eta: float) -> WireSpec:
        """The cross-section at scale ``eta`` (axis ignored: always along ``x1``)."""
        if self.compact:
            raise ValueError("compactly contained obstacles are not wires")
        gap = float(self.gap_measure(eta))
        gaps = [(0.5 - 0.5 * gap, 0.5 + 0.5 * gap)] if gap > 0 else []
        return make_wire(self.z0, None, self.R, gaps, log_r=float(self.log_r(eta)))

    def admissible(self, eta: float) -> bool:
        if self.compact:
            return True
        return bool(self.log_r(eta) <= math.log(self.R)) and bool(self.gap_measure(eta) < 1.0)

    def threshold(self, ladder=LADDER) -> float:
        """Largest ladder ``eta`` from which every smaller one is admissible."""
        ok = [self.admissible(e) for e in ladder]
        if not ok[-1]:
            raise ValueError("law never satisfies r <= R with |I| < 1 on the ladder")
        k = len(ok) - 1
        while k > 0 and ok[k - 1]:
            k -= 1
        return ladder[k]

    def to_dict(self) -> dict:
        d = {"name": self.name, "axis": self.axis, "compact": self.compact, "R": self.R, "z0": list(self.z0)}
        if self.compact:
            return d
        d["radius"] = self.radius
        if self.radius in ("power", "constant"):
            d["a"] = self.a
        if self.radius == "power":
            d["p"] = self.p
        if self.radius == "stretched_exp":
            d.update(c=self.c, q=self.q)
        d["gap"] = self.gap
        if self.gap == "power":
            d.update(g=self.g, s=self.s)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RegimeLaw":
        known = {"radius", "a", "p", "c", "q", "gap", "g", "s", "axis", "compact", "R", "z0", "name"}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown law fields: {sorted(extra)}")
        kw = dict(d)
        if "z0" in kw:
            kw["z0"] = tuple(float(v) for v in kw["z0"])
        for k in ("a", "p", "c", "q", "g", "s", "R"):
            if k in kw:
                kw[k] = float(kw[k])
        if "axis" in kw:
            kw["axis"] = int(kw["axis"])
        if "compact" in kw and isinstance(kw["compact"], str):
            kw["compact"] = kw["compact"].strip().lower() in ("1", "true", "yes")
        return cls(**kw)


# ---------------------------------------------------------------------------
# limits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Limits:
    critical: Limit
    gap: Limit
    threshold_eta: float
    critical_trend: str
    gap_trend: str


def _closed_critical(law: RegimeLaw) -> Limit:
    if law.radius in ("power", "constant"):
        return Limit.zero()
    # eta * c * eta^-q
    return Limit.from_exponent(law.c, 1.0 - law.q)


def _closed_gap(law: RegimeLaw) -> Limit:
    if law.gap == "zero":
        return Limit.zero()
    if law.radius == "stretched_exp":
        return Limit.inf()
    p = law.p if law.radius == "power" else 0.0
    return Limit.from_exponent(law.g / law.a**2, law.s - 1.0 - 2.0 * p)


def _trend(logs: np.ndarray) -> str:
    """``"0"``, ``"inf"`` or ``"?"`` from the tail of a log-sequence (eta decreasing)."""
    with np.errstate(invalid="ignore"):
        tail = np.diff(logs[-TREND_POINTS:])
    if np.all(np.isfinite(tail)):
        if np.all(tail < math.log(1.0 - TREND_RATIO)):
            return "0"
        if np.all(tail > math.log(1.0 + TREND_RATIO)):
            return "inf"
    if np.all(logs[-TREND_POINTS:] == -np.inf):
        return "0"
    return "?"


def _numeric(law: RegimeLaw, ladder) -> tuple[str, str]:
    eta = np.asarray(ladder, dtype=float)
    lr = law.log_r(eta)
    crit = np.log(eta) + np.log(np.abs(lr))
    gm = law.gap_measure(eta)
    with np.errstate(divide="ignore"):
        gap = np.log(gm) - np.log(eta) - 2.0 * lr
    return _trend(crit), _trend(gap)


def _agrees(closed: Limit, trend: str) -> bool:
    if trend == "?":
        return True
    if trend == "0":
        return closed.kind is LimitKind.ZERO
    return closed.kind is LimitKind.INFINITE


def regime_limits(law: RegimeLaw, ladder=LADDER) -> Limits:
    """Closed-form limits of the critical and gap quantities, ladder-checked.

    Raises
    ------
    ClassificationError
        If the numeric ladder shows a definite trend contradicting the
        closed form.  An inconclusive ladder is not an error.
    """
    if law.compact:
        raise ValueError("compactly contained obstacles have no radius law")
    thr = law.threshold(ladder)
    tail = [e for e in ladder if e <= thr]
    crit, gap = _closed_critical(law), _closed_gap(law)
    tc, tg = _numeric(law, tail) if len(tail) >= TREND_POINTS else ("?", "?")
    if not _agrees(crit, tc):
        raise ClassificationError(f"critical limit {crit} contradicts ladder trend {tc!r} for {law}")
    if not _agrees(gap, tg):
        raise ClassificationError(f"gap limit {gap} contradicts ladder trend {tg!r} for {law}")
    return Limits(crit, gap, thr, tc, tg)


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------


class Verdict(str, Enum):
    CONNECTING = "Connecting"
    DISCONNECTED = "Disconnected"
    INDETERMINATE = "Indeterminate"


class InterfaceKind(str, Enum):
    REFLECTING = "Reflecting"
    INACTIVE = "Inactive"
    POLARIZING_E1 = "PolarizingE1"
    POLARIZING_E2 = "PolarizingE2"
    UNCLASSIFIED = "Unclassified"


CERT_CONNECTING = "connecting along the axis: rotated-gradient cell function of the wire potential"
CERT_THIN = "disconnected along the axis: logarithmic profile for exponentially thin wires"
CERT_THIN_GAPS = CERT_THIN + ", extended to gapped wires by inclusion monotonicity"
CERT_ORTHO = "disconnected across the axis: curl-free field vanishing on the guard disk"
CERT_COMPACT = "disconnected: compactly contained obstacle"
CERT_DEFORMED = "transported by a validated bi-Lipschitz deformation"
CASE_NOTE = {
    InterfaceKind.REFLECTING: "case: connecting in both directions, reflecting",
    InterfaceKind.INACTIVE: "case: disconnected in both directions, inactive",
    InterfaceKind.POLARIZING_E1: "case: connecting in e1 only, polarizing",
    InterfaceKind.POLARIZING_E2: "case: connecting in e2 only, polarizing",
    InterfaceKind.UNCLASSIFIED: "case: no verdict in at least one direction",
}


@dataclass(frozen=True)
class ConnectivityVerdict:
    e1: Verdict
    e2: Verdict
    notes: tuple[str, str]
    threshold_eta: float = float("nan")

    def get(self, direction: int) -> Verdict:
        return self.e1 if direction == 1 else self.e2

    def to_dict(self) -> dict:
        return {"e1": self.e1.value, "e2": self.e2.value, "notes": list(self.notes), "threshold_eta": self.threshold_eta}


def connectivity_verdict(law: RegimeLaw, ladder=LADDER) -> ConnectivityVerdict:
    """Per-direction verdict for a wire family (or a compact obstacle).

    Along the axis: connecting when both limits vanish; disconnected when
    the critical quantity diverges; otherwise indeterminate.  Across the
    axis: always disconnected.
    """
    deformed = ""
    if law.deformation is not None:
        rep = validate_deformation(law.deformation)
        if not rep.passed:
            raise ValueError("deformation fails validation; verdicts do not transfer")
        deformed = "; " + CERT_DEFORMED
    if law.compact:
        return ConnectivityVerdict(Verdict.DISCONNECTED, Verdict.DISCONNECTED,
                                   (CERT_COMPACT + deformed, CERT_COMPACT + deformed))
    lim = regime_limits(law, ladder)
    if lim.critical.kind is LimitKind.ZERO and lim.gap.kind is LimitKind.ZERO:
        along, note = Verdict.CONNECTING, CERT_CONNECTING
    elif lim.critical.kind is LimitKind.INFINITE:
        along, note = Verdict.DISCONNECTED, CERT_THIN if law.gap == "zero" else CERT_THIN_GAPS
    else:
        along = Verdict.INDETERMINATE
        note = f"no verdict along the axis: critical limit {lim.critical}, gap limit {lim.gap}"
    note += deformed
    across = (Verdict.DISCONNECTED, CERT_ORTHO + deformed)
    if law.axis == 1:
        return ConnectivityVerdict(along, across[0], (note, across[1]), lim.threshold_eta)
    return ConnectivityVerdict(across[0], along, (across[1], note), lim.threshold_eta)


def interface_kind(v: ConnectivityVerdict) -> InterfaceKind:
    C, D = Verdict.CONNECTING, Verdict.DISCONNECTED
    pair = (v.e1, v.e2)
    if Verdict.INDETERMINATE in pair:
        return InterfaceKind.UNCLASSIFIED
    return {
        (C, C): InterfaceKind.REFLECTING,
        (D, D): InterfaceKind.INACTIVE,
        (C, D): InterfaceKind.POLARIZING_E1,
        (D, C): InterfaceKind.POLARIZING_E2,
    }[pair]


def classify(law: RegimeLaw) -> dict:
    """Verdict, kind and a certificate string as one JSON-ready record."""
    v = connectivity_verdict(law)
    kind = interface_kind(v)
    cert = " + ".join([v.notes[0], v.notes[1], CASE_NOTE[kind]])
    out = {"law": law.to_dict(), **v.to_dict(), "kind": kind.value, "certificate": cert}
    if not law.compact:
        lim = regime_limits(law)
        out["critical_limit"] = str(lim.critical)
        out["gap_limit"] = str(lim.gap)
    return out


# ---------------------------------------------------------------------------
# monotonicity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotoneCheck:
    consistent: bool
    violations: tuple[str, ...]
    verdict_a: ConnectivityVerdict
    verdict_b: ConnectivityVerdict


def monotone_consistency(a: RegimeLaw, b: RegimeLaw, ladder=LADDER, *, strict: bool = False) -> MonotoneCheck:
    """Check that verdicts respect the inclusion ``a(eta) subset b(eta)``.

    The inclusion is certified with :func:`wire_included` on the common
    admissible tail of the ladder.  A connecting ``a`` forces a connecting
    ``b``; a disconnected ``b`` forces a disconnected ``a``.

    Raises
    ------
    ValueError
        If the inclusion cannot be certified.
    ClassificationError
        With ``strict=True``, on any violation.
    """
    if a.compact or b.compact:
        raise ValueError("inclusion is certified for wire families only")
    if a.axis != b.axis:
        raise ValueError("families with different axes are not ordered by inclusion")
    thr = min(a.threshold(ladder), b.threshold(ladder))
    for eta in (e for e in ladder if e <= thr):
        if not wire_included(a.wire(eta), b.wire(eta)):
            raise ValueError(f"inclusion fails at eta={eta:g}")
    va, vb = connectivity_verdict(a, ladder), connectivity_verdict(b, ladder)
    bad = []
    for d in (1, 2):
        if va.get(d) is Verdict.CONNECTING and vb.get(d) is not Verdict.CONNECTING:
            bad.append(f"e{d}: subset connects but superset is {vb.get(d).value}")
        if vb.get(d) is Verdict.DISCONNECTED and va.get(d) is not Verdict.DISCONNECTED:
            bad.append(f"e{d}: superset is disconnected but subset is {va.get(d).value}")
    if bad and strict:
        raise ClassificationError("; ".join(bad))
    return MonotoneCheck(not bad, tuple(bad), va, vb)


# ---------------------------------------------------------------------------
# reference suite
# ---------------------------------------------------------------------------


def standard_suite() -> list[tuple[RegimeLaw, InterfaceKind]]:
    """Twelve laws with their interface kinds, spanning all three outcomes."""
    P1, P2, IN, UN = (InterfaceKind.POLARIZING_E1, InterfaceKind.POLARIZING_E2,
                      InterfaceKind.INACTIVE, InterfaceKind.UNCLASSIFIED)
    return [
        (RegimeLaw("power", a=1.0, p=2.0, name="r=eta^2"), P1),
        (RegimeLaw("power", a=1.0, p=1.0, name="r=eta"), P1),
        (RegimeLaw("constant", a=0.1, name="r=0.1"), P1),
        (RegimeLaw("power", a=1.0, p=2.0, axis=2, name="r=eta^2, axis e2"), P2),
        (RegimeLaw("stretched_exp", c=1.0, q=2.0, name="r=exp(-eta^-2)"), IN),
        (RegimeLaw("stretched_exp", c=1.0, q=1.0, name="r=exp(-1/eta)"), UN),
        (RegimeLaw("stretched_exp", c=1.0, q=0.5, name="r=exp(-eta^-1/2)"), P1),
        (RegimeLaw("constant", a=0.1, gap="power", g=1.0, s=2.0, name="r=0.1, |I|=eta^2"), P1),
        (RegimeLaw("power", a=1.0, p=1.0, gap="power", g=0.5, s=1.0, name="r=eta, |I|=eta/2"), UN),
        (RegimeLaw("power", a=1.0, p=1.0, gap="power", g=0.5, s=4.0, name="r=eta, |I|=eta^4/2"), P1),
        (RegimeLaw("power", a=1.0, p=1.0, gap="power", g=0.5, s=3.0, name="r=eta, |I|=eta^3/2"), UN),
        (RegimeLaw(compact=True, name="compact inclusion"), IN),
    ]


def with_deformation(law: RegimeLaw, dmap: DeformationMap) -> RegimeLaw:
    return replace(law, deformation=dmap)


def random_ordered_pair(rng: np.random.Generator) -> tuple[RegimeLaw, RegimeLaw]:
    """Random laws ``(a, b)`` with ``a(eta)`` contained in ``b(eta)`` for all ``eta < 1``.

    Radii are ordered by construction within one family (smaller prefactor,
    larger exponent); gaps of ``b`` are nested in those of ``a``.
    """
    family = rng.choice(["power", "stretched_exp", "constant"])
    axis = int(rng.integers(1, 3))
    if family == "power":
        ab, pb = rng.uniform(0.05, 1.0), rng.uniform(0.0, 2.0)
        if pb == 0.0 or ab > 0.25:
            pb = max(pb, 0.5)
        b = dict(radius="power", a=ab, p=pb)
        a = dict(radius="power", a=ab * rng.uniform(0.1, 1.0), p=pb + rng.uniform(0.0, 2.0))
    elif family == "stretched_exp":
        cb, qb = rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.5)
        b = dict(radius="stretched_exp", c=cb, q=qb)
        a = dict(radius="stretched_exp", c=cb * rng.uniform(1.0, 3.0), q=qb + rng.uniform(0.0, 1.0))
    else:
        ab = rng.uniform(0.01, 0.25)
        b = dict(radius="constant", a=ab)
        a = (dict(radius="constant", a=ab * rng.uniform(0.1, 1.0)) if rng.random() < 0.5
             else dict(radius="power", a=ab * rng.uniform(0.1, 1.0), p=rng.uniform(0.0, 2.0)))
    if rng.random() < 0.5:
        ga, sa = rng.uniform(0.01, 0.5), rng.uniform(0.0, 5.0)
        a.update(gap="power", g=ga, s=sa)
        if rng.random() < 0.5:
            b.update(gap="power", g=ga * rng.uniform(0.1, 1.0), s=sa + rng.uniform(0.0, 2.0))
    return RegimeLaw(axis=axis, **a), RegimeLaw(axis=axis, **b)
