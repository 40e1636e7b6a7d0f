import numpy as np
import pytest
from scipy.linalg import expm

from stochflow.core.estimates import summarize
from stochflow.core.exceptions import ConfigurationError, InvalidPathsError
from stochflow.sde.engine import (ItoSDESpec, TimeGrid,
                                  exponential_midpoint_step, simulate_ito,
                                  simulate_jacobian, simulate_stratonovich)
from stochflow.sde.random import (RandomSource, WienerIncrements, path_blocks,
                                  standard_normals)


def zero_drift(t, x):
    return np.zeros_like(x)


def constant_drift(vector):
    vector = np.asarray(vector, dtype=float)
    return lambda t, x: np.broadcast_to(vector, x.shape).copy()


def constant_generator(matrix):
    matrix = np.asarray(matrix, dtype=float)
    return lambda t, x: np.broadcast_to(matrix, (x.shape[0],) + matrix.shape)


class RotationFrame(object):
    dim = 2
    fiber_dim = 2
    scale = 1.0

    def __init__(self, angle):
        c, s = np.cos(angle), np.sin(angle)
        self.rotation = np.array([[c, -s], [s, c]])

    def matrix(self, time, points):
        return np.broadcast_to(self.rotation, (points.shape[0], 2, 2))


@pytest.fixture
def source():
    return RandomSource(master_seed=20240611)


def test_time_grid_spacing():
    grid = TimeGrid(0.0, 1.0, 7)
    assert grid.t0 + grid.n_steps * grid.dt == pytest.approx(grid.t1,
                                                             abs=1e-15)
    assert grid.times()[-1] == grid.t1
    assert TimeGrid.over(0.5, 0.05).n_steps == 10


@pytest.mark.parametrize("t0, t1, n_steps", [(0, 0, 3), (1, 0, 3), (0, 1, 0)])
def test_time_grid_rejects_degenerate(t0, t1, n_steps):
    with pytest.raises(ConfigurationError):
        TimeGrid(t0, t1, n_steps)


def test_random_source_validation():
    with pytest.raises(ConfigurationError):
        RandomSource(master_seed=-1)
    with pytest.raises(ConfigurationError):
        RandomSource(master_seed=1, algorithm="mt19937")


def test_streams_are_reproducible_and_distinct(source):
    first = source.generator(3).standard_normal(16)
    again = source.generator(3).standard_normal(16)
    other_block = source.generator(4).standard_normal(16)
    other_stream = source.spawn(1).generator(3).standard_normal(16)
    assert np.array_equal(first, again)
    assert not np.array_equal(first, other_block)
    assert not np.array_equal(first, other_stream)


def test_standard_normals_independent_of_batching(source):
    whole = standard_normals(source, 10, (3,), block_size=4)
    blocks = [source.generator(b).standard_normal((stop - start, 3))
              for b, start, stop in path_blocks(10, 4)]
    assert np.array_equal(whole, np.concatenate(blocks))


def test_wiener_increment_moments(source):
    dt = 0.01
    increments = WienerIncrements.draw(source, 0, 1, 100000, 2, dt)
    samples = increments.increments[0]
    stderr = np.sqrt(dt / samples.shape[0])
    assert np.all(np.abs(samples.mean(axis=0)) < 4 * stderr)
    covariance = np.cov(samples.T)
    # var of a sample variance of N(0, dt) is 2 dt^2 / N
    assert np.all(np.abs(covariance - dt * np.eye(2))
                  < 4 * dt * np.sqrt(2.0 / samples.shape[0]))


def test_degenerate_sde_stays_put(source):
    spec = ItoSDESpec(drift=zero_drift, sigma=0.0, dim=2)
    ensemble = simulate_ito(spec, [0.3, -1.2], TimeGrid(0, 1, 10), source, 8)
    assert np.all(ensemble.positions == np.array([0.3, -1.2]))


def test_constant_drift_is_linear_ode(source):
    b = np.array([0.5, -2.0, 1.0])
    spec = ItoSDESpec(drift=constant_drift(b), sigma=0.0, dim=3)
    ensemble = simulate_ito(spec, np.zeros(3), TimeGrid(0, 2.0, 20), source, 4)
    assert np.allclose(ensemble.endpoints, 2.0 * b, atol=1e-12)


def test_field_mode_start_points(source):
    starts = np.arange(12.0).reshape(6, 2)
    spec = ItoSDESpec(drift=zero_drift, sigma=1.0, dim=2)
    ensemble = simulate_ito(spec, starts, TimeGrid(0, 1, 4), source, 6)
    assert np.array_equal(ensemble.start, starts)


def test_brownian_mean_square_displacement(source):
    spec = ItoSDESpec(drift=zero_drift, sigma=1.0, dim=2)
    ensemble = simulate_ito(spec, [0.0, 0.0], TimeGrid(0, 1, 10), source,
                            100000, record=False)
    squares = np.sum((ensemble.endpoints - ensemble.start) ** 2, axis=1)
    estimate = summarize(squares[None, :])
    assert abs(estimate.z_score(2.0)[0]) < 4


def test_endpoint_recording_matches_full_history(source):
    spec = ItoSDESpec(drift=lambda t, x: -x, sigma=0.7, dim=2)
    grid = TimeGrid(0, 1, 16)
    full = simulate_ito(spec, [1.0, 0.0], grid, source, 50)
    ends = simulate_ito(spec, [1.0, 0.0], grid, source, 50, record=False)
    assert ends.positions.shape == (50, 2, 2)
    assert np.array_equal(full.endpoints, ends.endpoints)


def test_results_do_not_depend_on_worker_count(settings, source):
    settings.SDE_PATHS_PER_STREAM = 64
    spec = ItoSDESpec(drift=lambda t, x: np.sin(x[:, ::-1]), sigma=0.5, dim=2)
    grid = TimeGrid(0, 1, 20)
    serial = simulate_ito(spec, [0.1, 0.2], grid, source, 500, workers=1)
    threaded = simulate_ito(spec, [0.1, 0.2], grid, source, 500, workers=4)
    assert np.array_equal(serial.positions, threaded.positions)


def test_antithetic_halves_mirror(source):
    spec = ItoSDESpec(drift=zero_drift, sigma=1.0, dim=2)
    ensemble = simulate_ito(spec, [0.0, 0.0], TimeGrid(0, 1, 5), source, 10,
                            antithetic=True)
    assert np.array_equal(ensemble.endpoints[:5], -ensemble.endpoints[5:])
    with pytest.raises(ValueError):
        simulate_ito(spec, [0.0, 0.0], TimeGrid(0, 1, 5), source, 9,
                     antithetic=True)


def test_weak_order_one_on_linear_drift(source):
    # Antithetic pairs cancel the noise exactly for a linear drift, leaving
    # only the Euler bias in the mean.
    spec = ItoSDESpec(drift=lambda t, x: -x, sigma=1.0, dim=2)
    exact = np.exp(-1.0)
    errors = []
    for n_steps in (10, 20, 40):
        ensemble = simulate_ito(spec, [1.0, 1.0], TimeGrid(0, 1, n_steps),
                                source, 200, record=False, antithetic=True)
        errors.append(abs(ensemble.endpoints[:, 0].mean() - exact))
    ratios = np.array(errors[:-1]) / np.array(errors[1:])
    assert np.all(np.abs(ratios - 2.0) < 0.2)


def test_monte_carlo_error_scaling(source):
    spec = ItoSDESpec(drift=zero_drift, sigma=1.0, dim=2)
    sizes = np.array([1000, 10000, 100000])
    errors = []
    for n_paths in sizes:
        ensemble = simulate_ito(spec, [0.0, 0.0], TimeGrid(0, 1, 1), source,
                                int(n_paths), record=False)
        errors.append(summarize(ensemble.endpoints[None, :, 0]).stderr[0])
    slope = np.polyfit(np.log(sizes), np.log(errors), 1)[0]
    assert abs(slope + 0.5) < 0.1


def test_non_finite_drift_is_excluded(source):
    def drift(t, x):
        out = np.zeros_like(x)
        out[x[:, 0] > 3.5] = np.nan
        return out
    spec = ItoSDESpec(drift=drift, sigma=1.0, dim=2)
    ensemble = simulate_ito(spec, [0.0, 0.0], TimeGrid(0, 1, 10), source,
                            20000)
    assert 0 < ensemble.n_excluded < 0.01 * ensemble.n_paths
    frozen = ~ensemble.valid
    assert np.all(np.isfinite(ensemble.positions[frozen]))


def test_too_many_invalid_paths_raise(source):
    def drift(t, x):
        out = np.zeros_like(x)
        out[x[:, 0] > 0.5] = np.inf
        return out
    spec = ItoSDESpec(drift=drift, sigma=1.0, dim=2)
    with pytest.raises(InvalidPathsError) as error:
        simulate_ito(spec, [0.0, 0.0], TimeGrid(0, 1, 10), source, 1000)
    assert error.value.detail["n_paths"] == 1000


def test_zero_generator_keeps_identity(source):
    spec = ItoSDESpec(drift=zero_drift, sigma=1.0, dim=3)
    ensemble = simulate_ito(spec, np.zeros(3), TimeGrid(0, 1, 8), source, 5)
    filled = simulate_jacobian(ensemble, constant_generator(np.zeros((3, 3))))
    assert np.array_equal(filled.jacobians,
                          np.broadcast_to(np.eye(3), filled.jacobians.shape))


def test_constant_generator_matches_matrix_exponential(source):
    generator = np.array([[0.1, 0.4, 0.0], [-0.3, 0.2, 0.5], [0.0, 0.1, -0.3]])
    spec = ItoSDESpec(drift=zero_drift, sigma=0.5, dim=3)
    ensemble = simulate_ito(spec, np.zeros(3), TimeGrid(0, 1.5, 30), source,
                            4, grad_drift=constant_generator(generator))
    expected = expm(-1.5 * generator)
    assert np.allclose(ensemble.final_jacobians, expected, atol=1e-10)


def test_trace_free_strain_keeps_unit_determinant(source):
    generator = np.diag([0.5, -0.5])
    spec = ItoSDESpec(drift=zero_drift, sigma=1.0, dim=2)
    ensemble = simulate_ito(spec, np.zeros(2), TimeGrid(0, 1, 10), source, 4)
    filled = simulate_jacobian(ensemble, constant_generator(generator))
    final = filled.final_jacobians
    assert np.allclose(final, np.diag([np.exp(-0.5), np.exp(0.5)]),
                       atol=1e-12)
    assert np.all(np.abs(np.linalg.det(filled.jacobians) - 1) < 1e-10)


def test_midpoint_step_exponentiates_each_path():
    generators = np.random.default_rng(3).normal(size=(6, 3, 3))
    start = np.broadcast_to(np.eye(3), (6, 3, 3)).copy()
    advanced, ok = exponential_midpoint_step(start, generators, 0.2)
    assert ok.all()
    for matrix, generator in zip(advanced, generators):
        assert np.allclose(matrix, expm(-0.2 * generator), atol=1e-12)



def test_position_dependent_trace_free_generator_det(source):
    def generator(t, x):
        a = np.sin(x[:, 0]) * np.cos(t)
        b = np.cos(x[:, 1])
        return np.stack([np.stack([a, b], -1), np.stack([0.3 * b, -a], -1)],
                        -2)
    spec = ItoSDESpec(drift=lambda t, x: np.cos(x), sigma=1.0, dim=2)
    ensemble = simulate_ito(spec, np.zeros(2), TimeGrid(0, 2, 40), source, 64,
                            grad_drift=generator)
    assert np.max(np.abs(np.linalg.det(ensemble.jacobians) - 1)) < 1e-8


def test_jacobian_overflow_is_flagged(source):
    spec = ItoSDESpec(drift=zero_drift, sigma=1.0, dim=2)
    ensemble = simulate_ito(spec, np.zeros(2), TimeGrid(0, 1, 10), source,
                            1000)

    def generator(t, x):
        out = np.zeros((x.shape[0], 2, 2))
        out[x[:, 0] > 3.2, 0, 0] = -1e4
        return out
    filled = simulate_jacobian(ensemble, generator)
    assert np.all(filled.valid <= ensemble.valid)
    assert np.all(np.abs(filled.jacobians) <= 1e12)


def test_jacobian_needs_history(source):
    spec = ItoSDESpec(drift=zero_drift, sigma=1.0, dim=2)
    ensemble = simulate_ito(spec, np.zeros(2), TimeGrid(0, 1, 3), source, 2,
                            record=False)
    with pytest.raises(ValueError):
        simulate_jacobian(ensemble, constant_generator(np.eye(2)))


def test_identity_frame_is_brownian_motion(source):
    ensemble = simulate_stratonovich(RotationFrame(0.0), [0.0, 0.0],
                                     TimeGrid(0, 1, 10), source, 100000,
                                     record=False)
    squares = np.sum(ensemble.endpoints ** 2, axis=1)
    assert abs(summarize(squares[None, :]).z_score(2.0)[0]) < 4


def test_constant_rotation_frame_has_brownian_law(source):
    rotated = simulate_stratonovich(RotationFrame(0.9), [0.0, 0.0],
                                    TimeGrid(0, 1, 5), source, 100000,
                                    record=False)
    reference = simulate_stratonovich(RotationFrame(0.0), [0.0, 0.0],
                                      TimeGrid(0, 1, 5), source.spawn(1),
                                      100000, record=False)
    for power in (2, 4):
        for axis in (0, 1):
            a = summarize(rotated.endpoints[None, :, axis] ** power)
            b = summarize(reference.endpoints[None, :, axis] ** power)
            z = (a.mean - b.mean) / np.sqrt(a.stderr ** 2 + b.stderr ** 2)
            assert abs(z[0]) < 4


def test_constant_frame_matches_ito_with_diffusion_matrix(source):
    frame = RotationFrame(0.4)
    grid = TimeGrid(0, 1, 6)
    driftless = simulate_stratonovich(frame, [0.0, 0.0], grid, source, 32)
    spec = ItoSDESpec(drift=zero_drift, sigma=1.0, dim=2,
                      diffusion=frame.rotation)
    ito = simulate_ito(spec, [0.0, 0.0], grid, source, 32)
    assert np.allclose(driftless.positions, ito.positions, atol=1e-12)
