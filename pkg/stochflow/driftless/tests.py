import numpy as np
import pytest

from stochflow.core.exceptions import (ConfigurationError, DimensionError,
                                       UnsupportedDriftError)
from stochflow.driftless.frames import (FrameField, TorsionSpec,
                                        build_rotation_frame_2d,
                                        frame_for_lagrangian_drift,
                                        quarter_turn, verify_frame_conditions)
from stochflow.driftless.laws import (compare_laws, monomials,
                                      verify_driftless)
from stochflow.fields.base import VelocityField
from stochflow.fields.catalog import (ABC, TaylorGreen2D, UniformVelocity,
                                      ZeroVelocity)
from stochflow.fields.domain import Domain
from stochflow.sde.engine import TimeGrid, simulate_stratonovich
from stochflow.sde.random import RandomSource
from stochflow.transport.solvers import trace_lagrangian


class Expanding(VelocityField):
    dim = 2
    has_stream = True
    domain = Domain.free_space(2)

    def __call__(self, time, points):
        return self.points(points).copy()

    def gradient(self, time, points):
        return np.broadcast_to(np.eye(2), (len(points), 2, 2)).copy()


@pytest.fixture
def points():
    return np.random.default_rng(17).uniform(0.0, 2 * np.pi, (100, 2))


@pytest.fixture
def source():
    return RandomSource(master_seed=404, stream_id=2)


def test_identity_frame_carries_no_drift(points):
    report = verify_frame_conditions(FrameField.identity(2), None, points)
    assert report.isotropy_residual == 0.0
    assert report.drift_residual == 0.0
    assert report.passed


def test_constant_stream_gives_a_constant_rotation(points):
    frame = build_rotation_frame_2d(ZeroVelocity(2))
    matrices = frame.matrix(0.0, points)
    assert np.allclose(matrices, np.eye(2))
    assert np.allclose(frame.drift(0.0, points), 0.0)


def test_linear_stream_carries_a_constant_drift(points):
    drift = UniformVelocity([0.3, -0.2])
    frame = build_rotation_frame_2d(drift)
    for analytic in (True, False):
        report = verify_frame_conditions(frame, drift, points,
                                         analytic=analytic)
        assert report.drift_residual < 1e-6
        assert report.isotropy_residual < 1e-12


def test_rotation_frame_matches_taylor_green_drift(points):
    drift = TaylorGreen2D(nu=0.1)
    frame = build_rotation_frame_2d(drift, scale=0.7)
    analytic = verify_frame_conditions(frame, drift, points)
    numeric = verify_frame_conditions(frame, drift, points, analytic=False)
    assert analytic.drift_residual < 1e-6
    assert numeric.drift_residual < 1e-4
    assert analytic.isotropy_residual < 1e-12


def test_self_advection_is_quarter_turn_of_angle_gradient(points):
    frame = build_rotation_frame_2d(TaylorGreen2D())
    numeric = frame.self_advection(0.0, points, analytic=False)
    expected = quarter_turn(frame.angle_gradient(0.0, points))
    assert np.allclose(numeric, expected, atol=1e-6)
    generic = FrameField(frame.matrix, 2)
    assert np.allclose(generic.self_advection(0.0, points), expected,
                       atol=1e-6)


def test_lagrangian_frame_carries_the_reversed_velocity(points):
    flow = TaylorGreen2D(nu=0.25)
    frame = frame_for_lagrangian_drift(flow, 0.25)
    assert frame.scale == pytest.approx(np.sqrt(0.5))
    assert np.allclose(frame.angle(0.0, points),
                       flow.stream(0.0, points) / 0.25)
    report = verify_frame_conditions(
        frame, lambda t, x: -flow(t, x), points, analytic=False)
    assert report.passed
    assert report.drift_residual < 1e-4


def test_corrupted_frame_is_flagged(points):
    flow = TaylorGreen2D(nu=0.25)
    frame = frame_for_lagrangian_drift(flow, 0.25).scaled_angle(1.1)
    report = verify_frame_conditions(frame, lambda t, x: -flow(t, x), points)
    assert report.relative_drift_residual == pytest.approx(0.1, abs=1e-3)
    assert not report.passed


def test_frames_need_a_solenoidal_planar_drift():
    with pytest.raises(UnsupportedDriftError):
        build_rotation_frame_2d(Expanding())
    with pytest.raises(DimensionError):
        build_rotation_frame_2d(ABC())
    with pytest.raises(ConfigurationError):
        frame_for_lagrangian_drift(TaylorGreen2D(), 0.0)


def test_torsion_trace_is_twice_the_form():
    q = np.array([0.4, -1.0, 2.5])
    spec = TorsionSpec(form=lambda t, x: np.broadcast_to(q, x.shape), dim=3,
                       nu=0.2)
    points = np.zeros((4, 3))
    assert np.allclose(spec.trace(0.0, points), 2 * q)
    assert np.allclose(spec.torsion(0.0, points, [1, 0, 0], [1, 0, 0]), 0.0)
    assert np.allclose(spec.drift(0.0, points), 0.4 * q)
    with pytest.raises(ConfigurationError):
        TorsionSpec(form=lambda t, x: x, dim=1)


def test_torsion_of_a_velocity_gives_the_lagrangian_drift(points):
    flow = TaylorGreen2D(nu=0.1)
    spec = TorsionSpec.for_velocity(flow, 0.1)
    assert np.allclose(spec.drift(0.0, points), -flow(0.0, points))
    frame = frame_for_lagrangian_drift(flow, 0.1)
    assert verify_frame_conditions(frame, spec, points).passed


def test_three_dimensional_frames_are_verified_against_torsion():
    points = np.random.default_rng(3).normal(size=(20, 3))
    zero = TorsionSpec(form=lambda t, x: np.zeros_like(x), dim=3)
    assert verify_frame_conditions(FrameField.identity(3), zero,
                                   points).passed
    constant = TorsionSpec(form=lambda t, x: np.ones_like(x), dim=3, nu=0.5)
    report = verify_frame_conditions(FrameField.identity(3), constant,
                                     points)
    assert report.drift_residual == pytest.approx(np.sqrt(3))
    assert not report.passed


def test_monomials_up_to_fourth_order():
    exponents = monomials(2, 4)
    assert len(exponents) == 14
    assert exponents[:5] == [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert len(monomials(3, 2)) == 9


def test_identity_frame_and_brownian_particles_agree(source):
    nu = 0.25
    grid = TimeGrid(0.0, 0.5, 5)
    frame = FrameField.identity(2, scale=np.sqrt(2 * nu))
    frame_run = simulate_stratonovich(frame, [0.0, 0.0], grid, source,
                                      100000, record=False)
    drift_run = trace_lagrangian(ZeroVelocity(2), [0.0, 0.0], 0.5, nu,
                                 source.spawn(9), 100000, dt=0.1,
                                 record=False)
    report = compare_laws(frame_run, drift_run)
    assert report.passed


def test_law_comparison_needs_matching_runs(source):
    grid = TimeGrid(0.0, 0.5, 5)
    frame = FrameField.identity(2)
    first = simulate_stratonovich(frame, [0.0, 0.0], grid, source, 100,
                                  record=False)
    longer = simulate_stratonovich(frame, [0.0, 0.0], TimeGrid(0.0, 1.0, 5),
                                   source, 100, record=False)
    moved = simulate_stratonovich(frame, [1.0, 0.0], grid, source, 100,
                                  record=False)
    with pytest.raises(ValueError):
        compare_laws(first, longer)
    with pytest.raises(ValueError):
        compare_laws(first, moved)


def test_constant_drift_pins_the_frame_scaling(source):
    report = verify_driftless(UniformVelocity([0.3, -0.2]), 0.25, [0.0, 0.0],
                              0.5, 20000, source, dt=0.02)
    assert report.frame.passed
    assert report.laws.passed


def test_taylor_green_driftless_representation(source):
    report = verify_driftless(TaylorGreen2D(nu=0.25), 0.25, [0.3, 0.7], 0.5,
                              20000, source, dt=0.002)
    assert report.frame.drift_residual < 1e-4
    assert report.passed
    data = report.as_dict()
    assert data["passed"] and len(data["laws"]["moments"]) == 14


def test_mismatched_viscosity_fails_the_comparison(source):
    report = verify_driftless(TaylorGreen2D(nu=0.25), 0.5, [0.3, 0.7], 0.5,
                              20000, source, dt=0.01, frame_nu=0.25)
    second = report.laws.exponents.index((2, 0))
    assert abs(report.laws.z_scores[second]) > 4
    assert not report.passed


@pytest.mark.slow
def test_taylor_green_acceptance_run(source):
    report = verify_driftless(TaylorGreen2D(nu=0.25), 0.25, [0.3, 0.7], 0.5,
                              100000, source, dt=0.001)
    assert report.passed
