import numpy as np
import pytest
from scipy.linalg import expm

from stochflow.core.exceptions import ConfigurationError, DimensionError
from stochflow.fields.catalog import (ABC, ConstantStrain, FourierMode,
                                      GaussianBlob, LambOseen, TaylorGreen2D,
                                      UniformVelocity, UniformVorticity,
                                      ZeroVelocity)
from stochflow.fields.domain import Domain
from stochflow.fields.grid import GridField
from stochflow.reference.finite_difference import solve_induction
from stochflow.reference.heat import heat_solve
from stochflow.sde.engine import TimeGrid, simulate_ito
from stochflow.sde.random import RandomSource
from stochflow.transport.solvers import (TransportQuery, backward_deformation,
                                         backward_spec, solve_vorticity_2d,
                                         solve_vorticity_3d, trace_lagrangian)

PROBES = np.array([[x, y] for x in (-0.5, 0.0, 0.7) for y in (-0.4, 0.0, 0.6)])


@pytest.fixture
def source():
    return RandomSource(master_seed=99, stream_id=3)


def query(**kwargs):
    defaults = dict(tau=1.0, points=PROBES, nu=0.1,
                    velocity=ZeroVelocity(2), initial=GaussianBlob(1.0, 0.5),
                    n_paths=1000, source=RandomSource(1))
    defaults.update(kwargs)
    return TransportQuery(**defaults)


@pytest.mark.parametrize("field, value", [("tau", 0.0), ("nu", -0.1),
                                          ("nu", 0.0)])
def test_query_validation_names_the_field(field, value):
    with pytest.raises(ConfigurationError) as error:
        query(**{field: value})
    assert error.value.detail["field"] == field


def test_dimension_checks():
    with pytest.raises(DimensionError):
        solve_vorticity_3d(query())
    with pytest.raises(DimensionError):
        query(points=[[0.0, 0.0, 0.0]])


def test_heat_kernel_reduction(source):
    blob = GaussianBlob(1.0, 0.5)
    result = solve_vorticity_2d(query(initial=blob, n_paths=100000, dt=0.25,
                                      source=source))
    expected = blob.diffused(0.1, 1.0)(PROBES)
    assert np.all(np.abs(result.estimate.z_score(expected)) < 4)


def test_antithetic_heat_kernel(source):
    blob = GaussianBlob(1.0, 0.5)
    paired = solve_vorticity_2d(query(initial=blob, n_paths=20000, dt=0.5,
                                      source=source, antithetic=True))
    expected = blob.diffused(0.1, 1.0)(PROBES)
    assert np.all(np.abs(paired.estimate.z_score(expected)) < 4)
    assert np.all(paired.estimate.n_excluded == 0)


def test_lamb_oseen_is_transported_exactly(source):
    flow = LambOseen(gamma=1.0, nu=0.1, t0=1.0)
    points = np.array([[0.0, 0.0], [0.5, 0.0], [0.0, 1.0], [-0.7, -0.7]])
    result = solve_vorticity_2d(query(
        tau=0.5, points=points, velocity=flow, initial=flow.vorticity(0.0),
        n_paths=20000, dt=0.02, source=source))
    expected = flow.vorticity(0.5)(points)
    assert np.all(np.abs(result.estimate.z_score(expected)) < 4)


def test_constant_vorticity_is_exact_on_torus(source):
    flow = TaylorGreen2D(nu=0.1)
    initial = UniformVorticity(2.5, domain=flow.domain)
    result = solve_vorticity_2d(query(velocity=flow, initial=initial,
                                      n_paths=50, source=source))
    assert np.all(result.mean == 2.5)
    assert np.all(result.stderr == 0.0)


def test_maximum_principle_per_path(source):
    flow = TaylorGreen2D(nu=0.1)
    initial = flow.vorticity(0.0)
    nodes = Domain.torus(2).nodes((6, 6))
    result = solve_vorticity_2d(query(
        tau=0.5, points=nodes, velocity=flow, initial=initial, n_paths=200,
        dt=0.05, source=source, keep_samples=True))
    low, high = -2.0, 2.0
    assert result.samples.min() >= low and result.samples.max() <= high
    assert result.mean.min() >= low and result.mean.max() <= high


def test_circulation_is_conserved_on_torus(source):
    domain = Domain.torus(2)
    flow = TaylorGreen2D(nu=0.1)
    blob = GaussianBlob(1.0, 0.5, center=(np.pi, np.pi), domain=domain)
    shape = (16, 16)
    cell = np.prod(np.asarray(domain.period) / np.asarray(shape))
    result = solve_vorticity_2d(query(
        tau=0.5, points=domain.nodes(shape), velocity=flow, initial=blob,
        n_paths=2000, dt=0.05, source=source))
    circulation = result.mean.sum() * cell
    error = cell * np.sqrt(np.sum(result.stderr ** 2))
    assert abs(circulation - 1.0) < 4 * error + 1e-6


def test_stderr_decreases_with_more_paths(source):
    blob = GaussianBlob(1.0, 0.5)
    errors = [solve_vorticity_2d(query(initial=blob, n_paths=n, dt=0.5,
                                       source=source)).stderr
              for n in (500, 2000, 8000)]
    assert np.all(errors[0] > errors[1]) and np.all(errors[1] > errors[2])


def test_results_do_not_depend_on_batching(settings, source):
    flow = TaylorGreen2D(nu=0.1)
    base = query(tau=0.3, velocity=flow, initial=flow.vorticity(0.0),
                 n_paths=64, dt=0.1, source=source)
    settings.SDE_PATHS_PER_STREAM = 64
    settings.SDE_MAX_PATHS_PER_BATCH = 64 * 9
    whole = solve_vorticity_2d(base)
    settings.SDE_MAX_PATHS_PER_BATCH = 64
    split = solve_vorticity_2d(base)
    assert np.array_equal(whole.mean, split.mean)


def test_uniform_translation_keeps_constant_vorticity(source):
    c = np.array([0.3, -1.0, 2.0])
    result = solve_vorticity_3d(query(
        points=np.zeros((2, 3)), velocity=UniformVelocity([1.0, 0.5, -0.2]),
        initial=UniformVorticity(c), n_paths=100, source=source))
    assert np.allclose(result.mean, c, atol=1e-14)


def test_constant_strain_stretches_like_the_grid_solver(source):
    gamma = 0.25
    strain = np.diag([gamma, gamma, -2 * gamma])
    c = np.array([1.0, 0.5, 2.0])
    result = solve_vorticity_3d(query(
        tau=0.5, points=[[0.1, 0.2, 0.3]], velocity=ConstantStrain(strain),
        initial=UniformVorticity(c), n_paths=200, dt=0.05, source=source))
    assert np.allclose(result.mean[0], expm(0.5 * strain) @ c, rtol=1e-10)

    domain = Domain.torus(3)
    grid = GridField(np.broadcast_to(c, (16, 16, 16, 3)).copy(), domain)
    reference = solve_induction(ConstantStrain(strain, domain=domain), grid,
                                0.1, 0.5).final.values
    assert np.allclose(result.mean[0], reference[0, 0, 0], rtol=0.05)


def test_backward_deformation_has_unit_determinant(source):
    flow = ABC()
    spec = backward_spec(flow, 0.1, 1.0, domain=flow.domain)
    ensemble = simulate_ito(spec, [0.5, 1.0, 1.5], TimeGrid(0, 1.0, 50),
                            source, 64,
                            grad_drift=backward_deformation(flow, 1.0))
    assert np.max(np.abs(np.linalg.det(ensemble.jacobians) - 1)) < 1e-8


def test_heat_dominated_limit_on_torus(source):
    domain = Domain.torus(3)
    flow = ABC(0.01, 0.01, 0.01)
    mode = FourierMode([1.0, 0.0, 0.0], amplitude=[0.0, 1.0, 0.0])
    initial = mode + UniformVorticity(np.array([0.0, 0.0, 0.5]), domain=domain)
    points = np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]])
    result = solve_vorticity_3d(query(
        tau=1.0, points=points, nu=3.0, velocity=flow, initial=initial,
        n_paths=20000, dt=0.1, source=source))
    expected = heat_solve(GridField.sample(initial, domain, (8, 8, 8)), 3.0,
                          1.0)(points)
    assert np.all(np.abs(result.mean - expected)
                  < 4 * result.stderr + 0.02)
    assert np.allclose(expected[:, 2], 0.5, atol=1e-3)


def test_trace_lagrangian_follows_reversed_flow(source):
    ensemble = trace_lagrangian(UniformVelocity([1.0, -2.0]), [0.0, 0.0],
                                0.5, 0.0, source, 4, dt=0.1)
    assert np.allclose(ensemble.endpoints, [[-0.5, 1.0]] * 4)
    with pytest.raises(ConfigurationError):
        trace_lagrangian(UniformVelocity([1.0, 0.0]), [0.0, 0.0], 0.5, -1.0,
                         source, 4)


def test_trace_lagrangian_can_follow_the_flow(source):
    ensemble = trace_lagrangian(UniformVelocity([1.0, -2.0]), [0.0, 0.0],
                                0.5, 0.0, source, 4, dt=0.1, reverse=False)
    assert np.allclose(ensemble.endpoints, [[0.5, -1.0]] * 4)

