import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thinwires import scatter as sc
from thinwires.classify import InterfaceKind

KINDS = ["Reflecting", "Inactive", "PolarizingE1", "PolarizingE2"]
same = sc.MediaPair()
normal = sc.Incidence()


def test_identical_media_normal_incidence():
    r = sc.scattering_matrices(same, normal, "Reflecting")
    np.testing.assert_allclose(r.R, -np.eye(2), atol=1e-15)
    np.testing.assert_allclose(r.T, 0, atol=1e-15)
    r = sc.scattering_matrices(same, normal, "Inactive")
    np.testing.assert_allclose(r.R, 0, atol=1e-15)
    np.testing.assert_allclose(r.T, np.eye(2), atol=1e-15)
    r = sc.scattering_matrices(same, normal, "PolarizingE1")
    np.testing.assert_allclose(r.R, np.diag([-1, 0]), atol=1e-15)
    np.testing.assert_allclose(r.T, np.diag([0, 1]), atol=1e-15)
    r = sc.scattering_matrices(same, normal, "PolarizingE2")
    np.testing.assert_allclose(r.R, np.diag([0, -1]), atol=1e-15)
    np.testing.assert_allclose(r.T, np.diag([1, 0]), atol=1e-15)


def test_fresnel_normal_incidence():
    r = sc.scattering_matrices(sc.MediaPair(eps_minus=1, eps_plus=4), normal, InterfaceKind.INACTIVE)
    np.testing.assert_allclose(r.R, -np.eye(2) / 3, atol=1e-15)
    np.testing.assert_allclose(r.T, 2 * np.eye(2) / 3, atol=1e-15)


@pytest.mark.parametrize("theta", [10.0, 35.0, 70.0])
def test_fresnel_oblique_te_tm(theta):
    m = sc.MediaPair(eps_minus=1.5, eps_plus=3.2, mu_minus=1.0, mu_plus=1.4, omega=2.0)
    res = sc.scattering_matrices(m, sc.Incidence(theta=theta, plane="e1e3"), "Inactive")
    k1 = m.omega * cmath.sqrt(m.eps_minus * m.mu_minus)
    kx = k1 * math.sin(math.radians(theta))
    kz1 = cmath.sqrt(k1**2 - kx**2)
    kz2 = cmath.sqrt(m.omega**2 * m.eps_plus * m.mu_plus - kx**2)
    r_tm = (m.eps_minus / kz1 - m.eps_plus / kz2) / (m.eps_minus / kz1 + m.eps_plus / kz2)
    r_te = (kz1 / m.mu_minus - kz2 / m.mu_plus) / (kz1 / m.mu_minus + kz2 / m.mu_plus)
    assert res.R[0, 0] == pytest.approx(r_tm, abs=1e-13)
    assert res.R[1, 1] == pytest.approx(r_te, abs=1e-13)
    assert abs(res.R[0, 1]) < 1e-14 and abs(res.R[1, 0]) < 1e-14


media = st.builds(sc.MediaPair, st.floats(1, 10), st.floats(1, 10), st.floats(0.5, 3), st.floats(0.5, 3),
                  st.floats(0.2, 5))
incidences = st.builds(sc.Incidence, theta=st.floats(0, 85), plane=st.sampled_from(["e1e3", "e2e3"]))


@settings(max_examples=200, deadline=None)
@given(media, incidences, st.sampled_from(KINDS))
def test_lossless_power_balance(m, inc, kind):
    res = sc.scattering_matrices(m, inc, kind)
    np.testing.assert_allclose(sc.energy_balance(res, m, inc), 1.0, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 2.0), st.floats(0, 60), st.sampled_from(KINDS))
def test_lossy_media_absorb(loss, theta, kind):
    m = sc.MediaPair(eps_minus=1.0, eps_plus=complex(4.0, loss))
    res = sc.scattering_matrices(m, sc.Incidence(theta=theta, plane="e1e3"), kind)
    assert np.all(res.balance <= 1.0 + 1e-12)


def test_profile_satisfies_interface_conditions():
    m = sc.MediaPair(eps_plus=2.5)
    inc = sc.Incidence(A1=1.0, A2=0.5, theta=30.0, plane="e2e3")
    for kind in KINDS:
        res = sc.scattering_matrices(m, inc, kind)
        prof = sc.field_profile(res, m, inc, samples=4001)
        col = {name: i for i, name in enumerate(sc.PROFILE_COLUMNS)}
        i0 = int(np.argmin(np.abs(prof[:, 0])))
        below, above = prof[i0 - 1], prof[i0 + 1]
        for c in ("re_E1", "im_E1", "re_E2", "im_E2"):
            assert below[col[c]] == pytest.approx(above[col[c]], abs=5e-3)
        if kind == "Reflecting":
            assert abs(prof[i0, col["re_E1"]]) < 1e-14 and abs(prof[i0, col["re_E2"]]) < 1e-14
        if kind == "Inactive":
            for c in ("re_H1", "re_H2"):
                assert below[col[c]] == pytest.approx(above[col[c]], abs=5e-3)
    assert prof.shape == (4001, 13)


def test_input_validation():
    with pytest.raises(ValueError):
        sc.MediaPair(eps_plus=complex(2, -1))
    with pytest.raises(ValueError):
        sc.MediaPair(omega=0.0)
    with pytest.raises(ValueError):
        sc.Incidence(theta=10.0)
    with pytest.raises(ValueError):
        sc.Incidence(theta=95.0, plane="e1e3")
    with pytest.raises(ValueError):
        sc.scattering_matrices(same, sc.Incidence(theta=89.95, plane="e1e3"), "Inactive")
    with pytest.raises(ValueError):
        sc.scattering_matrices(same, normal, "Unclassified")
    with pytest.raises(ValueError):
        sc.scattering_matrices(same, normal, "Transparent")
