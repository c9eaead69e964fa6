import warnings

import pytest

from thinwires import cell2d
from thinwires.geometry import make_wire


@pytest.fixture(scope="session")
def wire():
    return make_wire((0.5, 0.5), 0.05, 0.25)


@pytest.fixture(scope="session")
def v_default(wire):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return cell2d.solve_v_r(wire)


@pytest.fixture(scope="session")
def psi_default(v_default, wire):
    return cell2d.assemble_psi_r(v_default, wire)


@pytest.fixture(scope="session")
def phi_default(wire):
    return cell2d.solve_phi_ortho(wire)
