import numpy as np
import pytest

from stochflow.core.estimates import combined_z_scores
from stochflow.core.exceptions import (ConfigurationError, DimensionError,
                                       QuadratureWarning, ResolutionError)
from stochflow.fields.base import VorticityField
from stochflow.fields.catalog import (GaussianTube3D, LambOseen,
                                      LinearVorticity, PointVortices,
                                      TaylorGreen2D, VortexBlobs,
                                      ZeroVorticity)
from stochflow.fields.domain import Domain
from stochflow.fields.grid import GridField
from stochflow.recovery.biot_savart import (biot_savart_direct,
                                            biot_savart_grid,
                                            fourier_interpolate)
from stochflow.recovery.brownian import (RecoveryQuery, heat_gradient,
                                         recover_velocity_2d,
                                         recover_velocity_3d,
                                         recover_velocity_gradform)
from stochflow.recovery.quadrature import SQuadrature
from stochflow.sde.random import RandomSource


class CurlOfGaussian(VorticityField):
    """omega = grad(phi) x a for a Gaussian phi: compact and solenoidal."""

    def __init__(self, axis=(0.0, 0.0, 1.0), sigma=0.5):
        self.axis = np.asarray(axis, dtype=float)
        self.sigma = sigma
        self.dim = 3
        self.domain = Domain.free_space(3)
        self.support = (np.zeros(3), 9.0 * sigma)

    def __call__(self, points):
        points = self.points(points)
        phi = np.exp(-np.sum(points ** 2, axis=-1) / (2 * self.sigma ** 2))
        grad = -points * phi[:, None] / self.sigma ** 2
        return np.cross(grad, self.axis)


@pytest.fixture
def source():
    return RandomSource(master_seed=5, stream_id=11)


def test_quadrature_weights_integrate_a_decaying_kernel():
    quadrature = SQuadrature(1e-4, 1e4, 80)
    nodes = quadrature.nodes
    assert nodes[0] == pytest.approx(1e-4) and nodes[-1] == pytest.approx(1e4)
    values = 1.0 / (1.0 + nodes) ** 2
    total = quadrature.integrate(values) + quadrature.tail(values[-1])
    assert total == pytest.approx(1.0, rel=2e-3)


def test_quadrature_from_field_scales():
    torus = SQuadrature.for_field(TaylorGreen2D().vorticity(0.0))
    assert torus.s_max == pytest.approx((2 * np.pi) ** 2)
    assert torus.s_min == pytest.approx(1e-3)
    vortex = LambOseen(nu=0.1, t0=1.0).vorticity(0.0)
    free = SQuadrature.for_field(vortex)
    assert free.s_max / free.s_min == pytest.approx(1e7)


def test_query_validation(source):
    with pytest.raises(ConfigurationError):
        RecoveryQuery(ZeroVorticity(2), [[0.0, 0.0]], 1, source)
    with pytest.raises(ConfigurationError):
        RecoveryQuery(ZeroVorticity(2), [[0.0, 0.0]], 9, source,
                      antithetic=True)
    with pytest.raises(DimensionError):
        RecoveryQuery(ZeroVorticity(2), [[0.0, 0.0, 0.0]], 10, source)
    with pytest.raises(DimensionError):
        recover_velocity_3d(RecoveryQuery(ZeroVorticity(2), [[0.0, 0.0]],
                                          10, source))


@pytest.mark.parametrize("dim", [2, 3])
def test_zero_vorticity_recovers_zero_velocity(dim, source):
    query = RecoveryQuery(ZeroVorticity(dim), np.ones((3, dim)), 100, source)
    recover = recover_velocity_2d if dim == 2 else recover_velocity_3d
    result = recover(query)
    assert np.all(result.mean == 0.0)
    assert np.all(result.stderr == 0.0)
    assert np.all(result.tail == 0.0)


def test_bismut_kernel_on_linear_vorticity(source):
    field = LinearVorticity([0.7, -1.3], offset=2.0)
    estimate = heat_gradient(field, [[0.0, 0.0], [1.0, -2.0]], 0.5, 20000,
                             source)
    assert estimate.mean.shape == (2, 2)
    assert np.all(np.abs(estimate.z_score(np.array([[0.7, -1.3]] * 2))) < 4)


def test_bismut_kernel_vector_layout(source):
    estimate = heat_gradient(CurlOfGaussian(), [[0.2, 0.0, 0.1]], 0.1, 200,
                             source)
    assert estimate.mean.shape == (1, 3, 3)


def test_lamb_oseen_velocity_is_recovered(source):
    flow = LambOseen(gamma=1.0, nu=0.1, t0=1.0)
    radii = np.array([0.5, 1.0, 2.0])
    points = np.stack([radii, np.zeros(3)], axis=-1)
    result = recover_velocity_2d(RecoveryQuery(flow.vorticity(0.0), points,
                                               20000, source))
    expected = flow(0.0, points)
    speed = flow.azimuthal_speed(0.0, radii)
    assert np.all(np.abs(result.mean[:, 1] - speed) < 0.05 * speed)
    assert np.all(np.abs(result.mean[:, 0]) < 4 * result.stderr[:, 0] + 1e-3)
    assert np.all(np.abs(result.estimate.z_score(expected)) < 4.5)


def test_gaussian_tube_velocity_is_recovered(source):
    tube = GaussianTube3D(gamma=1.0, sigma=0.5)
    points = np.array([[0.6, 0.0, 0.0], [0.0, 1.2, 3.0]])
    result = recover_velocity_3d(RecoveryQuery(tube, points, 20000, source))
    speed = tube.azimuthal_speed(np.array([0.6, 1.2]))
    assert result.mean[0, 1] == pytest.approx(speed[0], rel=0.05)
    assert -result.mean[1, 0] == pytest.approx(speed[1], rel=0.05)
    assert np.all(np.abs(result.mean[:, 2]) < 4 * result.stderr[:, 2] + 1e-3)


def test_kernel_and_gradient_forms_agree_on_torus(source):
    flow = TaylorGreen2D(nu=0.1)
    vorticity = flow.vorticity(0.0)
    points = np.array([[0.3, 1.1], [2.0, 4.0], [5.5, 0.2]])
    expected = flow(0.0, points)
    kernel = recover_velocity_2d(RecoveryQuery(vorticity, points, 20000,
                                               source))
    gradform = recover_velocity_gradform(RecoveryQuery(
        vorticity, points, 20000, RandomSource(master_seed=6)))
    assert np.all(np.abs(kernel.estimate.z_score(expected)) < 4.5)
    assert np.all(np.abs(gradform.estimate.z_score(expected)) < 4.5)
    assert np.all(np.abs(combined_z_scores(kernel.estimate,
                                           gradform.estimate)) < 4.5)


def test_short_quadrature_warns(source):
    vortex = LambOseen(nu=0.1, t0=1.0).vorticity(0.0)
    query = RecoveryQuery(vortex, [[1.0, 0.0]], 2000, source,
                          quadrature=SQuadrature(1e-3, 0.5, 10))
    with pytest.warns(QuadratureWarning):
        result = recover_velocity_2d(query)
    assert result.tail[0] > 1e-3 * np.linalg.norm(result.mean[0])


def test_antithetic_recovery(source):
    vortex = LambOseen(nu=0.1, t0=1.0).vorticity(0.0)
    result = recover_velocity_2d(RecoveryQuery(vortex, [[1.0, 0.0]], 4000,
                                               source, antithetic=True))
    assert result.estimate.n_excluded[0] == 0
    assert np.all(np.isfinite(result.mean))


def test_point_vortex_velocity():
    vortices = PointVortices([[0.0, 0.0]], [2.0])
    velocity = biot_savart_direct(vortices, [[1.0, 0.0], [0.0, -0.5]])
    assert np.allclose(velocity, [[0.0, 1.0 / np.pi], [2.0 / np.pi, 0.0]])


def test_direct_quadrature_matches_lamb_oseen():
    flow = LambOseen(gamma=1.0, nu=0.1, t0=1.0, center=(0.3, -0.2))
    points = np.array([[0.3, -0.2], [0.5, 0.1], [1.3, -0.2], [6.0, 2.0]])
    velocity = biot_savart_direct(flow.vorticity(0.0), points)
    assert np.allclose(velocity, flow(0.0, points), atol=1e-7)


def test_direct_quadrature_matches_blob_sum(source):
    blobs = VortexBlobs([[-0.6, 0.0], [0.5, 0.3]], [0.3, 0.4], [1.0, -0.5])
    points = np.array([[0.0, 0.0], [0.5, 0.3], [-1.5, 1.0]])
    direct = biot_savart_direct(blobs, points)
    assert np.allclose(direct, blobs.velocity(points), atol=1e-7)
    brownian = recover_velocity_2d(RecoveryQuery(blobs, points, 20000,
                                                 source))
    assert np.all(np.abs(brownian.estimate.z_score(direct)) < 4.5)


def test_direct_quadrature_in_three_dimensions(source):
    field = CurlOfGaussian()
    points = np.array([[0.4, 0.0, 0.1], [0.0, -0.7, 0.3], [5.0, 0.5, 0.0]])
    direct = biot_savart_direct(field, points)
    brownian = recover_velocity_3d(RecoveryQuery(field, points, 20000,
                                                 source))
    assert np.all(np.abs(brownian.estimate.z_score(direct)) < 4.5)


def test_unbounded_support_is_a_resolution_error():
    with pytest.raises(ResolutionError):
        biot_savart_direct(GaussianTube3D(), [[1.0, 0.0, 0.0]])


def test_periodic_route_is_spectrally_exact():
    flow = TaylorGreen2D(nu=0.1, amplitude=1.5)
    points = np.array([[0.1, 0.2], [3.0, 5.9], [6.1, 1.0]])
    velocity = biot_savart_direct(flow.vorticity(0.0), points,
                                  shape=(16, 16))
    assert np.allclose(velocity, flow(0.0, points), atol=1e-12)


def test_fourier_interpolation_reproduces_nodes():
    domain = Domain.torus(2)
    grid = GridField.sample(lambda p: np.sin(p[:, 0]) + np.cos(2 * p[:, 1]),
                            domain, (12, 12))
    nodes = grid.nodes()
    values = fourier_interpolate(grid.values, domain.period, nodes)
    assert np.allclose(values, grid.values.ravel(), atol=1e-12)


def test_grid_biot_savart_on_torus_and_free_space():
    flow = TaylorGreen2D(nu=0.1)
    torus = Domain.torus(2)
    grid = GridField.sample(flow.vorticity(0.0), torus, (32, 32))
    velocity = biot_savart_grid(grid)
    assert np.allclose(velocity.values.reshape(-1, 2),
                       flow(0.0, grid.nodes()), atol=1e-12)

    vortex = LambOseen(gamma=1.0, nu=0.1, t0=1.0)
    free = Domain.free_space(2, extent=5.0)
    grid = GridField.sample(vortex.vorticity(0.0), free, (129, 129))
    velocity = biot_savart_grid(grid).values.reshape(-1, 2)
    exact = vortex(0.0, grid.nodes())
    peak = np.max(np.linalg.norm(exact, axis=-1))
    assert np.max(np.abs(velocity - exact)) < 0.05 * peak
