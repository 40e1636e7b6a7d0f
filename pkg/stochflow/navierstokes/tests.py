import numpy as np
import pytest

from stochflow.core.exceptions import (ConfigurationError, DimensionError,
                                       ResolutionWarning, StepSizeError)
from stochflow.fields.catalog import (FourierMode, LambOseen, TaylorGreen2D,
                                      ZeroVorticity)
from stochflow.fields.domain import Domain
from stochflow.fields.grid import GridField
from stochflow.navierstokes.picard import (check_contraction,
                                           energy_decay_rate, run, step)
from stochflow.navierstokes.state import (MCParams, NSState, VortexBlobInit,
                                          check_resolution,
                                          unresolved_fraction)
from stochflow.reference.finite_difference import solve_vorticity_2d
from stochflow.sde.random import RandomSource


@pytest.fixture
def mc():
    return MCParams(n_paths=400, source=RandomSource(master_seed=2024),
                    dt=0.05)


def taylor_green_state(shape, nu=0.1):
    flow = TaylorGreen2D(nu=nu)
    return NSState.from_vorticity(flow.vorticity(0.0), nu, Domain.torus(2),
                                  shape)


def test_blob_init_validation():
    with pytest.raises(ConfigurationError) as error:
        VortexBlobInit(((0.0, 0.0),), (0.0,), (1.0,))
    assert error.value.detail["field"] == "radii"
    with pytest.raises(DimensionError):
        VortexBlobInit(((0.0, 0.0, 0.0),), (1.0,), (1.0,))
    blobs = VortexBlobInit(((1.0, 1.0), (4.0, 4.0)), (0.5, 0.5), (1.0, 0.5))
    with pytest.raises(ConfigurationError):
        blobs.vorticity(Domain.torus(2))
    assert blobs.vorticity(Domain.free_space(2)).total_circulation() == 1.5


def test_zero_vorticity_stays_at_rest(mc):
    domain = Domain.torus(2)
    states = run(ZeroVorticity(2, domain=domain), 0.2, 0.1, mc, nu=0.1,
                 domain=domain, shape=(8, 8))
    assert len(states) == 3
    for state in states:
        assert np.all(state.vorticity_grid.values == 0.0)
        assert np.all(state.velocity_grid.values == 0.0)
        assert state.diagnostics.kinetic_energy == 0.0


def test_zero_horizon_returns_initial_state(mc):
    state = taylor_green_state((8, 8))
    states = run(state, 0.0, 0.1, mc)
    assert len(states) == 1 and states[0] is state


def test_initial_state_is_self_consistent():
    state = taylor_green_state((32, 32))
    flow = TaylorGreen2D(nu=0.1)
    nodes = state.vorticity_grid.nodes()
    assert np.allclose(state.velocity_grid.values.reshape(-1, 2),
                       flow(0.0, nodes), atol=1e-12)
    assert state.diagnostics.curl_residual < 1e-10
    assert state.diagnostics.divergence_residual < 1e-10
    assert state.diagnostics.kinetic_energy == pytest.approx(
        flow.kinetic_energy(0.0))


def test_torus_run_needs_zero_circulation(mc):
    domain = Domain.torus(2)
    blobs = VortexBlobInit(((1.0, 1.0),), (0.5,), (1.0,))
    with pytest.raises(ConfigurationError):
        run(blobs, 0.1, 0.1, mc, nu=0.1, domain=domain, shape=(8, 8))


def test_step_validation(mc):
    with pytest.raises(ConfigurationError):
        step(taylor_green_state((8, 8)), 0.0, mc)


def test_taylor_green_energy_decay():
    mc = MCParams(n_paths=400, source=RandomSource(master_seed=2024),
                  dt=0.01)
    states = run(taylor_green_state((16, 16)), 0.2, 0.05, mc)
    assert [s.step_index for s in states] == [0, 1, 2, 3, 4]
    assert states[-1].time == pytest.approx(0.2)
    assert energy_decay_rate(states) == pytest.approx(0.4, rel=0.1)
    for state in states[1:]:
        assert state.diagnostics.picard_iterations == 1
        assert state.diagnostics.curl_residual < 0.05


def test_picard_passes_settle_on_taylor_green():
    mc = MCParams(n_paths=400, source=RandomSource(master_seed=7), dt=0.01,
                  picard_iterations=3)
    state = step(taylor_green_state((16, 16)), 0.05, mc)
    assert 2 <= state.diagnostics.picard_iterations <= 3
    flow = TaylorGreen2D(nu=0.1)
    expected = flow.vorticity(0.05)(state.vorticity_grid.nodes())
    error = np.abs(state.vorticity_grid.values.ravel() - expected)
    assert np.all(error < 4 * state.stderr_grid.values.ravel() + 2e-3)


def test_growing_picard_updates_are_a_step_size_error():
    check_contraction([0.3, 0.1])
    with pytest.raises(StepSizeError):
        check_contraction([0.1, 0.3])


def test_runs_are_reproducible(mc):
    first = run(taylor_green_state((8, 8)), 0.1, 0.05, mc)
    second = run(taylor_green_state((8, 8)), 0.1, 0.05, mc)
    assert np.array_equal(first[-1].vorticity_grid.values,
                          second[-1].vorticity_grid.values)


def test_lamb_oseen_peak_decays():
    flow = LambOseen(gamma=1.0, nu=0.1, t0=1.0)
    domain = Domain.free_space(2, extent=4.0)
    mc = MCParams(n_paths=2000, source=RandomSource(master_seed=3), dt=0.02,
                  velocity_method="grid")
    states = run(flow.vorticity(0.0), 0.2, 0.1, mc, nu=0.1, domain=domain,
                 shape=(33, 33))
    final = states[-1]
    center = final.vorticity_grid.values[16, 16]
    assert center == pytest.approx(flow.peak_vorticity(0.2), rel=0.05)


def test_co_rotating_blobs_keep_their_circulation():
    domain = Domain.free_space(2, extent=3.0)
    blobs = VortexBlobInit(((-0.5, 0.0), (0.5, 0.0)), (0.3, 0.3), (1.0, 1.0))
    mc = MCParams(n_paths=500, source=RandomSource(master_seed=8), dt=0.05,
                  velocity_method="grid")
    states = run(blobs, 0.2, 0.1, mc, nu=0.05, domain=domain, shape=(41, 41))
    initial = states[0].diagnostics.circulation[0]
    cell = np.prod(states[-1].vorticity_grid.spacing)
    for state in states[1:]:
        error = cell * np.sqrt(np.sum(state.stderr_grid.values ** 2))
        assert abs(state.diagnostics.circulation[0] - initial) < (
            4 * error + 1e-3)


def test_enstrophy_decreases_at_large_viscosity():
    domain = Domain.torus(2)
    rough = FourierMode([1.0, 2.0], amplitude=1.0) + FourierMode(
        [3.0, -1.0], amplitude=0.5, phase=0.4)
    mc = MCParams(n_paths=500, source=RandomSource(master_seed=9), dt=0.05)
    states = run(rough, 0.3, 0.1, mc, nu=1.0, domain=domain, shape=(16, 16))
    for before, after in zip(states, states[1:]):
        lower = after.diagnostics.enstrophy - after.diagnostics.enstrophy_bias
        assert lower < before.diagnostics.enstrophy

    grid = GridField.sample(rough, domain, (16, 16))
    reference = solve_vorticity_2d(grid, 1.0, 0.3)
    expected = 0.5 * np.sum(reference.final.values ** 2) * np.prod(
        grid.spacing)
    final = states[-1].diagnostics
    assert final.enstrophy - final.enstrophy_bias == pytest.approx(
        expected, rel=0.1)


@pytest.mark.slow
def test_taylor_green_acceptance_run():
    mc = MCParams(n_paths=10000, source=RandomSource(master_seed=1),
                  dt=0.01)
    states = run(taylor_green_state((64, 64)), 0.5, 0.05, mc)
    assert energy_decay_rate(states) == pytest.approx(0.4, rel=0.03)


@pytest.mark.slow
def test_energy_error_shrinks_under_refinement():
    flow = TaylorGreen2D(nu=0.1)
    errors = []
    for level, (dtau, n_paths) in enumerate([(0.1, 500), (0.05, 1000),
                                             (0.025, 2000)]):
        mc = MCParams(n_paths=n_paths,
                      source=RandomSource(master_seed=40 + level),
                      dt=dtau / 2)
        states = run(taylor_green_state((16, 16)), 0.4, dtau, mc)
        final = states[-1].diagnostics.kinetic_energy
        errors.append(abs(final - flow.kinetic_energy(0.4)))
    assert errors[0] > errors[1] > errors[2]


def test_unresolved_fraction_flags_grid_scale_vorticity():
    torus = Domain.torus(2)
    smooth = GridField.sample(FourierMode([1.0, 2.0]), torus, (16, 16))
    rough = GridField.sample(FourierMode([7.0, 0.0]), torus, (16, 16))
    assert unresolved_fraction(smooth) < 1e-12
    assert unresolved_fraction(rough) == pytest.approx(1.0)
    with pytest.warns(ResolutionWarning):
        check_resolution(rough, 0.5)
