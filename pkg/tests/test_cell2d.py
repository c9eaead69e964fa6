import math

import numpy as np
import pytest
from scipy.integrate import quad

from thinwires import cell2d, mesh_fem as mf
from thinwires.geometry import make_wire


# --- hole potential ----------------------------------------------------------


@pytest.mark.parametrize("r", [0.1, 0.013, 1e-4])
def test_u_r_closed_forms(r):
    u = cell2d.URField((0.4, 0.6), r)
    assert u.grad_norm_sq() == pytest.approx(1 / (8 * math.pi), rel=1e-13)
    assert u.laplacian_norm_sq() == pytest.approx(1 / (math.pi * r * r), rel=1e-13)
    # the unit flux leaves through the circle: conormal times perimeter is -1;
    # circle points are formed as z0 + r e(theta), costing about eps * |z0| / r
    th = np.linspace(0, 2 * math.pi, 7)
    np.testing.assert_allclose(u.conormal(th) * 2 * math.pi * r, -1.0, rtol=1e-15 / r)


def test_u_r_gradient_matches_finite_differences():
    u = cell2d.URField((0.5, 0.5), 0.1)
    z = np.array([[0.53, 0.47]])
    h = 1e-6
    fd = [(u.value(z + h * e) - u.value(z - h * e)) / (2 * h) for e in np.eye(2)]
    np.testing.assert_allclose(u.grad(z)[0], np.ravel(fd), rtol=1e-8)


def test_u_r_mismatch_has_volume_term():
    r = 0.05
    u = cell2d.URField((0.5, 0.5), r)
    # the cross term integrates to zero by symmetry
    assert u.mismatch_sq() == pytest.approx(1 / (8 * math.pi) + math.pi * r * r, rel=1e-13)


def test_u_r_fem_quadrature():
    u = cell2d.URField((0.5, 0.5), 0.1)
    f = u.fem_norms()
    assert f["grad_norm_sq"] == pytest.approx(1 / (8 * math.pi), rel=0.02)
    assert f["laplacian_norm_sq"] == pytest.approx(1 / (math.pi * 0.01), rel=0.02)


def test_eval_u_r_rejects_underflow():
    with pytest.raises(ValueError):
        cell2d.eval_u_r(make_wire((0.5, 0.5), None, 0.25, log_r=-1000.0))


# --- v_r and psi_r ------------------------------------------------------------


def test_v_r_ring_means(v_default, wire):
    assert abs(mf.ring_mean(v_default, wire.R)) < 1e-12
    exact = math.log(wire.R / wire.r) / (2 * math.pi)
    assert mf.ring_mean(v_default, wire.r) == pytest.approx(exact, rel=0.02)


def test_v_r_fluxes(v_default):
    _, top = mf.boundary_flux(v_default, "top")
    _, bottom = mf.boundary_flux(v_default, "bottom")
    np.testing.assert_allclose(top, -1.0, atol=1e-8)
    np.testing.assert_allclose(bottom, 0.0, atol=1e-8)


def test_psi_invariants(psi_default, wire):
    p = psi_default
    assert p.inside_l2_sq == pytest.approx(1 / (8 * math.pi), rel=1e-13)
    assert p.curl_inside_sq == pytest.approx(1 / (math.pi * wire.r**2), rel=1e-13)
    assert p.curl_outside_residual < 1e-10
    assert max(p.top_value_error, p.bottom_value_error) < 1e-8
    assert p.continuity_error < 0.1
    # energy outside is of order log(1/r)/(2 pi)
    assert 0.5 < p.outside_l2_sq / (math.log(1 / wire.r) / (2 * math.pi)) < 2.0


def test_psi_point_values(psi_default, wire):
    top = psi_default.evaluate([[0.3, 0.999], [0.8, 0.999]])
    np.testing.assert_allclose(top[:, 0], 1.0, atol=0.05)
    bottom = psi_default.evaluate([[0.3, 0.001]])
    assert abs(bottom[0, 0]) < 0.05
    inside = psi_default.evaluate([[0.5 + 0.5 * wire.r, 0.5]])
    np.testing.assert_allclose(inside[0], psi_default.u.rotated_grad(np.array([0.5 + 0.5 * wire.r, 0.5])))


def test_continuity_failure_is_reported(wire):
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v = cell2d.solve_v_r(wire, 0.1, 1.0, min_segments=8)
    with pytest.raises(cell2d.ContinuityError):
        cell2d.assemble_psi_r(v, wire, continuity_tol=1e-3)


# --- phi ----------------------------------------------------------------------


def test_phi_ortho(phi_default, wire):
    p = phi_default
    assert p.curl_residual < 1e-10
    assert max(p.top_value_error, p.bottom_value_error) < 1e-8
    assert np.all(p.evaluate([[0.5, 0.5], [0.6, 0.55]]) == 0.0)
    far = p.evaluate([[0.1, 0.999], [0.9, 0.001]])
    np.testing.assert_allclose(far[:, 0], 1.0, atol=0.05)
    assert math.pi * wire.R**2 < p.mismatch_sq < 1.0


def test_phi_ortho_mismatch_shrinks_with_guard():
    small = cell2d.solve_phi_ortho(make_wire((0.5, 0.5), 0.01, 0.02))
    assert small.mismatch_sq < 0.01


def test_phi_ortho_is_cached(wire):
    other = make_wire(wire.z0, 0.01, wire.R)
    assert cell2d.solve_phi_ortho(wire) is cell2d.solve_phi_ortho(other)


# --- critical profile ---------------------------------------------------------


@pytest.mark.parametrize("log_r", [2 * math.log(0.25), -10.0, -1e3, -65536.0])
def test_phi_crit_energy(log_r):
    p = cell2d.PhiCrit2D((0.5, 0.5), log_r, 0.25)
    assert p.energy() == pytest.approx(2 * math.pi / (math.log(0.25) - log_r), rel=1e-15)
    assert p.energy_quadrature() == pytest.approx(p.energy(), rel=1e-6)


@pytest.mark.parametrize("r", [0.0625, 1e-3, 1e-6])
def test_phi_crit_mismatch_against_radial_quadrature(r):
    R = 0.25
    p = cell2d.PhiCrit2D((0.5, 0.5), math.log(r), R)
    f = lambda rho: 2 * math.pi * rho * (p.profile(rho) - 1.0) ** 2
    val = quad(f, 0, r, epsabs=0, epsrel=1e-13)[0] + quad(f, r, R, epsabs=0, epsrel=1e-13, limit=200)[0]
    assert p.mismatch_sq() == pytest.approx(val, rel=1e-9)


def test_phi_crit_gradient_and_values():
    p = cell2d.PhiCrit2D((0.5, 0.5), math.log(0.01), 0.25)
    assert p.value(np.array([0.5, 0.505])) == 0.0
    assert p.value(np.array([0.5, 0.8])) == 1.0
    z = np.array([[0.55, 0.52]])
    h = 1e-7
    fd = [(p.value(z + h * e) - p.value(z - h * e)) / (2 * h) for e in np.eye(2)]
    np.testing.assert_allclose(p.grad(z)[0], np.ravel(fd), rtol=1e-6)


def test_phi_crit_requires_thin_wire():
    with pytest.raises(ValueError):
        cell2d.eval_phi_crit(make_wire((0.5, 0.5), 0.1, 0.25))
    assert cell2d.eval_phi_crit(make_wire((0.5, 0.5), 0.0625, 0.25)).L == pytest.approx(math.log(4))


# --- ladders ------------------------------------------------------------------


def test_energy_ladder_sorted_and_fit():
    rows = cell2d.energy_ladder([2**-5, 2**-4, 2**-6], h=0.04)
    assert [r.r for r in rows] == sorted(r.r for r in rows)
    fit = cell2d.fit_energy_constant(rows)
    assert all(r.energy <= fit["C1"] * abs(math.log(r.r)) * (1 + 1e-12) for r in rows)
    assert fit["slope"] == pytest.approx(1 / (2 * math.pi), rel=0.2)


def test_energy_ladder_parallel_matches_serial():
    radii = [2**-4, 2**-5]
    a = cell2d.energy_ladder(radii, h=0.05, jobs=1)
    b = cell2d.energy_ladder(radii, h=0.05, jobs=2)
    assert a == b
