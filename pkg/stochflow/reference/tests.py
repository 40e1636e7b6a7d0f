import numpy as np
import pytest

from stochflow.core.exceptions import UnsupportedDomainError
from stochflow.fields.catalog import (ABC, FourierMode, TaylorGreen2D,
                                      ZeroVelocity)
from stochflow.fields.domain import Domain
from stochflow.fields.grid import GridField
from stochflow.reference.finite_difference import (laplacian4,
                                                   solve_induction,
                                                   solve_vorticity_2d)
from stochflow.reference.heat import heat_solve


def test_heat_solve_damps_modes_exactly():
    mode = FourierMode([1.0, 2.0], amplitude=0.7)
    domain = Domain.torus(2)
    grid = GridField.sample(mode, domain, (16, 16))
    later = heat_solve(grid, nu=0.3, time=0.8)
    expected = GridField.sample(mode.diffused(0.3, 0.8), domain, (16, 16))
    assert np.allclose(later.values, expected.values, atol=1e-13)


def test_heat_solve_needs_a_torus():
    grid = GridField(np.zeros((4, 4)), Domain.free_space(2))
    with pytest.raises(UnsupportedDomainError):
        heat_solve(grid, 0.1, 1.0)


def test_fourth_order_laplacian():
    domain = Domain.torus(2)
    errors = []
    for n in (16, 32):
        grid = GridField.sample(lambda p: np.sin(p[:, 0]) * np.cos(p[:, 1]),
                                domain, (n, n))
        errors.append(np.max(np.abs(laplacian4(grid.values, grid.spacing)
                                    + 2 * grid.values)))
    assert errors[0] / errors[1] == pytest.approx(16, rel=0.1)


def test_taylor_green_vorticity_decays_exactly():
    flow = TaylorGreen2D(nu=0.1)
    domain = Domain.torus(2)
    initial = GridField.sample(flow.vorticity(0.0), domain, (32, 32))
    solution = solve_vorticity_2d(initial, 0.1, 0.5, record_times=[0.25])
    assert solution.times == [0.25, 0.5]
    expected = GridField.sample(flow.vorticity(0.5), domain, (32, 32))
    assert np.allclose(solution.final.values, expected.values, rtol=1e-4,
                       atol=1e-4)
    energies = solution.energies()
    assert energies[1] < energies[0]


def test_prescribed_velocity_matches_self_consistent_run():
    flow = TaylorGreen2D(nu=0.05)
    domain = Domain.torus(2)
    initial = GridField.sample(flow.vorticity(0.0), domain, (32, 32))
    prescribed = solve_vorticity_2d(initial, 0.05, 0.3, velocity=flow)
    coupled = solve_vorticity_2d(initial, 0.05, 0.3)
    assert np.allclose(prescribed.final.values, coupled.final.values,
                       atol=1e-4)


def test_induction_without_flow_is_heat_decay():
    mode = FourierMode([1.0, 0.0, 0.0], amplitude=[0.0, 1.0, 0.0])
    domain = Domain.torus(3)
    initial = GridField.sample(mode, domain, (16, 16, 16))
    solution = solve_induction(ZeroVelocity(3), initial, 0.1, 1.0)
    expected = GridField.sample(mode.diffused(0.1, 1.0), domain, (16, 16, 16))
    assert np.allclose(solution.final.values, expected.values, atol=1e-4)


def test_induction_stretches_field_in_abc_flow():
    domain = Domain.torus(3)
    initial = GridField.sample(
        FourierMode([0.0, 0.0, 1.0], amplitude=[1.0, 0.0, 0.0]), domain,
        (16, 16, 16))
    solution = solve_induction(ABC(), initial, 0.1, 0.2, record_times=[0.1])
    assert len(solution.snapshots) == 2
    assert np.all(np.isfinite(solution.final.values))
    assert not np.allclose(solution.final.values,
                           heat_solve(initial, 0.1, 0.2).values, atol=1e-3)
