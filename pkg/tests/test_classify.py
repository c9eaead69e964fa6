import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thinwires import classify as cl
from thinwires.classify import InterfaceKind, LimitKind, RegimeLaw, Verdict
from thinwires.geometry import DeformationMap, random_smooth_deformation


@pytest.mark.parametrize("law,expected", cl.standard_suite(), ids=lambda x: getattr(x, "name", None) or str(x))
def test_standard_suite(law, expected):
    assert cl.classify(law)["kind"] == expected.value


def test_suite_size_and_coverage():
    kinds = {k for _, k in cl.standard_suite()}
    assert len(cl.standard_suite()) == 12
    assert {InterfaceKind.POLARIZING_E1, InterfaceKind.POLARIZING_E2, InterfaceKind.INACTIVE,
            InterfaceKind.UNCLASSIFIED} <= kinds


def test_orthogonal_direction_always_disconnected():
    for law, _ in cl.standard_suite():
        v = cl.connectivity_verdict(law)
        other = 2 if law.axis == 1 else 1
        assert v.get(other) is Verdict.DISCONNECTED


def test_limit_from_exponent():
    assert cl.Limit.from_exponent(3.0, 1.0).kind is LimitKind.ZERO
    assert cl.Limit.from_exponent(3.0, -0.5).kind is LimitKind.INFINITE
    assert cl.Limit.from_exponent(3.0, 0.0) == cl.Limit.finite(3.0)
    assert str(cl.Limit.inf()) == "inf"


def test_critical_law_finite_limit_value():
    lim = cl.regime_limits(RegimeLaw("stretched_exp", c=2.5, q=1.0))
    assert lim.critical == cl.Limit.finite(2.5)


def test_threshold_skips_inadmissible_etas():
    law = RegimeLaw("power", a=4.0, p=1.0)  # r = 4 eta exceeds R until eta <= 1/16
    assert law.threshold() == 2.0**-4
    assert not law.admissible(0.125) and law.admissible(2.0**-4)


def test_law_validation_and_roundtrip():
    with pytest.raises(ValueError):
        RegimeLaw("power", a=-1.0)
    with pytest.raises(ValueError):
        RegimeLaw("constant", a=0.3)
    with pytest.raises(ValueError):
        RegimeLaw("bogus")
    with pytest.raises(ValueError):
        RegimeLaw("power", gap="power", g=0.0)
    with pytest.raises(ValueError):
        RegimeLaw.from_dict({"radius": "power", "colour": "red"})
    law = RegimeLaw("stretched_exp", c=1.5, q=0.7, gap="power", g=0.2, s=3.0, axis=2, name="x")
    assert RegimeLaw.from_dict(law.to_dict()) == law
    assert RegimeLaw.from_dict({"compact": "true"}).compact


def test_wire_at_scale():
    law = RegimeLaw("power", a=1.0, p=2.0, gap="power", g=0.5, s=1.0)
    w = law.wire(0.125)
    assert w.r == pytest.approx(1 / 64)
    assert w.gap_measure == pytest.approx(0.0625)
    with pytest.raises(ValueError):
        RegimeLaw(compact=True).wire(0.1)


def test_classify_record_is_json_ready():
    import json

    rec = cl.classify(RegimeLaw("power", a=1.0, p=2.0, name="r=eta^2"))
    json.dumps(rec)
    assert rec["kind"] == "PolarizingE1" and rec["critical_limit"] == "0"
    assert "polarizing" in rec["certificate"]


def test_deformation_is_validated_and_noted():
    rng = np.random.default_rng(1)
    dmap = DeformationMap.from_function(random_smooth_deformation(rng), 9)
    law = cl.with_deformation(RegimeLaw("power", a=1.0, p=2.0), dmap)
    rec = cl.classify(law)
    assert rec["kind"] == "PolarizingE1"
    assert cl.CERT_DEFORMED in rec["certificate"]
    shear = lambda p: np.column_stack([p[:, 0], p[:, 1] + 0.05 * p[:, 0] * np.sin(np.pi * p[:, 2]), p[:, 2]])
    bad = cl.with_deformation(RegimeLaw(), DeformationMap.from_function(shear, 9))
    with pytest.raises(ValueError):
        cl.classify(bad)


# --- closed forms against the ladder -----------------------------------------

laws = st.one_of(
    st.builds(lambda a, p: RegimeLaw("power", a=a, p=p), st.floats(0.05, 2.0), st.floats(0.0, 3.0)),
    st.builds(lambda c, q: RegimeLaw("stretched_exp", c=c, q=q), st.floats(0.2, 3.0), st.floats(0.1, 2.0)),
    st.builds(lambda a, g, s: RegimeLaw("power", a=a, p=1.0, gap="power", g=g, s=s),
              st.floats(0.05, 1.0), st.floats(0.01, 0.5), st.floats(0.0, 6.0)),
)


@settings(max_examples=150, deadline=None)
@given(laws)
def test_closed_form_limits_agree_with_ladder(law):
    try:
        law.threshold()
    except ValueError:
        return
    # raises ClassificationError on disagreement
    lim = cl.regime_limits(law)
    if lim.critical_trend == "0":
        assert lim.critical.kind is LimitKind.ZERO


# --- monotonicity ---------------------------------------------------------------


def test_random_ordered_pairs_are_consistent():
    rng = np.random.default_rng(2024)
    done = 0
    while done < 100:
        a, b = cl.random_ordered_pair(rng)
        try:
            chk = cl.monotone_consistency(a, b, strict=True)
        except ValueError:
            continue
        assert chk.consistent
        done += 1


def test_monotonicity_rejects_unordered_pairs():
    small = RegimeLaw("power", a=0.5, p=2.0)
    big = RegimeLaw("power", a=1.0, p=1.0)
    assert cl.monotone_consistency(small, big).consistent
    with pytest.raises(ValueError):
        cl.monotone_consistency(big, small)
    with pytest.raises(ValueError):
        cl.monotone_consistency(RegimeLaw(compact=True), big)
    with pytest.raises(ValueError):
        cl.monotone_consistency(small, RegimeLaw("power", a=1.0, p=1.0, axis=2))


def test_strict_mode_raises_on_violation(monkeypatch):
    small = RegimeLaw("power", a=0.5, p=2.0)
    big = RegimeLaw("power", a=1.0, p=1.0)
    real = cl.connectivity_verdict

    def fake(law, ladder=cl.LADDER):
        v = real(law, ladder)
        if law is big:
            return cl.ConnectivityVerdict(Verdict.INDETERMINATE, v.e2, v.notes)
        return v

    monkeypatch.setattr(cl, "connectivity_verdict", fake)
    assert not cl.monotone_consistency(small, big).consistent
    with pytest.raises(cl.ClassificationError):
        cl.monotone_consistency(small, big, strict=True)
