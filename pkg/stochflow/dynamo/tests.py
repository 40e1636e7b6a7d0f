import numpy as np
import pytest

from stochflow.core.exceptions import (ConfigurationError,
                                       IndeterminateRateError)
from stochflow.dynamo.solvers import (DynamoQuery, growth_rate,
                                      magnetic_divergence, transport_magnetic)
from stochflow.fields.catalog import (ABC, FourierMode, UniformVelocity,
                                      UniformVorticity, ZeroVelocity,
                                      ZeroVorticity)
from stochflow.fields.domain import Domain
from stochflow.fields.grid import GridField
from stochflow.reference.finite_difference import solve_induction
from stochflow.sde.random import RandomSource

TORUS = Domain.torus(3)
PROBES = np.array([[0.3, 1.0, 2.0], [1.7, 4.2, 0.5], [5.0, 2.5, 3.9],
                   [2.9, 0.1, 5.6]])
MODE = FourierMode([1.0, 0.0, 0.0], amplitude=[0.0, 1.0, 0.0])


@pytest.fixture
def source():
    return RandomSource(master_seed=31, stream_id=4)


def query(**kwargs):
    defaults = dict(nu_m=0.1, velocity=ZeroVelocity(3, domain=TORUS),
                    initial=MODE, horizon=1.0, points=PROBES, n_paths=2000,
                    source=RandomSource(1), domain=TORUS)
    defaults.update(kwargs)
    return DynamoQuery(**defaults)


@pytest.mark.parametrize("field, value", [("nu_m", 0.0), ("nu_m", -1.0),
                                          ("horizon", 0.0), ("n_paths", 1)])
def test_query_validation_names_the_field(field, value):
    with pytest.raises(ConfigurationError) as error:
        query(**{field: value})
    assert error.value.detail["field"] == field


def test_divergent_initial_field_is_rejected():
    class Radial(UniformVorticity):
        def __call__(self, points):
            return self.points(points).copy()

        def gradient(self, points):
            return np.broadcast_to(np.eye(3), (len(points), 3, 3)).copy()

    with pytest.raises(ConfigurationError) as error:
        query(initial=Radial(np.zeros(3)))
    assert error.value.detail["field"] == "initial"


def test_resting_fluid_only_diffuses_the_field(source):
    result = transport_magnetic(query(horizon=1.0, n_paths=10000,
                                      source=source))
    expected = MODE.diffused(0.1, 1.0)(PROBES)
    assert np.all(np.abs(result.estimate.z_score(expected)) < 4)


def test_uniform_field_in_uniform_flow_is_invariant(source):
    value = np.array([0.2, -0.5, 1.0])
    result = transport_magnetic(query(
        velocity=UniformVelocity([1.0, 0.3, 0.0], domain=TORUS),
        initial=UniformVorticity(value, domain=TORUS), n_paths=200,
        source=source))
    assert np.allclose(result.mean, value, atol=1e-13)
    assert np.allclose(result.stderr, 0.0, atol=1e-13)


def test_transport_is_linear_in_the_initial_field(source):
    other = FourierMode([0.0, 0.0, 1.0], amplitude=[1.0, 0.0, 0.0])
    flow = ABC()
    first = transport_magnetic(query(velocity=flow, initial=MODE,
                                     n_paths=200, dt=0.05, source=source))
    second = transport_magnetic(query(velocity=flow, initial=other,
                                      n_paths=200, dt=0.05, source=source))
    combined = transport_magnetic(query(velocity=flow,
                                        initial=2.0 * MODE + other,
                                        n_paths=200, dt=0.05, source=source))
    assert np.allclose(combined.mean, 2.0 * first.mean + second.mean,
                       atol=1e-12)


def test_abc_flow_matches_grid_solver(source):
    initial = FourierMode([0.0, 0.0, 1.0], amplitude=[1.0, 0.0, 0.0])
    grid = GridField.sample(initial, TORUS, (16, 16, 16))
    reference = solve_induction(ABC(), grid, 0.2, 0.5).final
    expected = reference(PROBES)
    result = transport_magnetic(query(nu_m=0.2, velocity=ABC(),
                                      initial=initial, horizon=0.5,
                                      n_paths=8000, dt=0.01, source=source))
    scale = float(np.max(np.abs(reference.values)))
    assert np.all(np.abs(result.mean - expected)
                  < 4 * result.stderr + 0.1 * scale)


def test_decay_rate_of_a_diffusing_mode(source):
    rate = growth_rate(query(n_paths=4000, source=source), (0.5, 2.0),
                       confidence=0.999)
    assert len(rate.times) == 5 and rate.times[0] == 0.5
    assert rate.contains(-0.1, slack=0.01)
    assert rate.rate == pytest.approx(-0.1, abs=0.02)
    assert rate.interval[0] <= rate.rate <= rate.interval[1]


def test_uniform_field_has_zero_rate(source):
    rate = growth_rate(query(initial=UniformVorticity([0.0, 0.0, 1.0],
                                                      domain=TORUS),
                             n_paths=100, source=source), (0.2, 1.0))
    assert rate.rate == pytest.approx(0.0, abs=1e-10)
    assert rate.energies == pytest.approx((1.0,) * 5)


def test_zero_field_has_no_rate(source):
    with pytest.raises(IndeterminateRateError):
        growth_rate(query(initial=ZeroVorticity(3, domain=TORUS),
                          n_paths=100, source=source), (0.2, 1.0))


def test_window_validation():
    with pytest.raises(ConfigurationError) as error:
        growth_rate(query(), (1.0, 0.5))
    assert error.value.detail["field"] == "window"


def test_estimated_field_is_divergence_free_within_noise(source):
    shape = (8, 8, 8)
    nodes = GridField.sample(MODE, TORUS, shape).nodes()
    result = transport_magnetic(query(velocity=ABC(), points=nodes,
                                      horizon=0.3, n_paths=200, dt=0.05,
                                      source=source))
    values = result.mean.reshape(shape + (3,))
    stderr = result.stderr.reshape(shape + (3,))
    divergence, error = magnetic_divergence(values, stderr, TORUS.period)
    assert divergence.shape == shape
    assert np.all(np.abs(divergence) <= 5 * error)


@pytest.mark.slow
def test_abc_acceptance_against_grid_solver(source):
    initial = FourierMode([0.0, 0.0, 1.0], amplitude=[1.0, 0.0, 0.0])
    grid = GridField.sample(initial, TORUS, (48, 48, 48))
    reference = solve_induction(ABC(), grid, 0.2, 1.0).final
    expected = reference(PROBES)
    result = transport_magnetic(query(nu_m=0.2, velocity=ABC(),
                                      initial=initial, horizon=1.0,
                                      n_paths=40000, dt=0.005,
                                      source=source))
    error = np.sqrt(np.sum((result.mean - expected) ** 2))
    assert error < 0.1 * np.sqrt(np.sum(expected ** 2)) + 4 * np.sqrt(
        np.sum(result.stderr ** 2))


@pytest.mark.slow
def test_abc_growth_rate_matches_grid_solver(source):
    initial = FourierMode([0.0, 0.0, 1.0], amplitude=[1.0, 0.0, 0.0])
    grid = GridField.sample(initial, TORUS, (24, 24, 24))
    times = np.linspace(0.5, 1.5, 5)
    reference = solve_induction(ABC(), grid, 0.2, 1.5,
                                record_times=times.tolist())
    energies = [np.mean(np.sum(snapshot(PROBES) ** 2, axis=-1))
                for t, snapshot in zip(reference.times, reference.snapshots)
                if t >= 0.5]
    expected = 0.5 * np.polyfit(times, np.log(energies), 1)[0]
    rate = growth_rate(query(nu_m=0.2, velocity=ABC(), initial=initial,
                             n_paths=20000, dt=0.01, source=source),
                       (0.5, 1.5), confidence=0.999)
    assert rate.contains(expected, slack=0.05)
