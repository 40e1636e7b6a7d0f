from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from stochflow.core.exceptions import DimensionError, UnsupportedDomainError
from stochflow.fields.base import ScalarField, VelocityField, central_difference
from stochflow.fields.catalog import (ABC, COMPACT, ConstantStrain,
                                      FourierMode, GaussianBlob, LambOseen,
                                      LinearVorticity, PointVortexSum,
                                      TaylorGreen2D, UniformVelocity,
                                      VortexBlobs, build)
from stochflow.fields.domain import Domain
from stochflow.fields.grid import (GridField, GridVelocityField,
                                   GridVorticityField)
from stochflow.fields.operators import (curl, divergence, perp_grad,
                                        project_div_free)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


class Expansion(VelocityField):
    dim = 2

    def __call__(self, time, points):
        return self.points(points)


class Linear(ScalarField):
    dim = 2

    def __init__(self, slope):
        self.slope = np.asarray(slope, dtype=float)

    def __call__(self, points):
        return self.points(points) @ self.slope

    def gradient(self, points):
        return np.broadcast_to(self.slope, self.points(points).shape)


def test_domain_wrap_and_minimal_image():
    torus = Domain.torus(2, 2 * np.pi)
    wrapped = torus.wrap(np.array([[-0.5, 7.0], [2 * np.pi, -1e-18]]))
    assert np.all((wrapped >= 0) & (wrapped < 2 * np.pi))
    delta = torus.minimal_image(np.array([[6.0, -6.0]]))
    assert np.allclose(delta, [[6.0 - 2 * np.pi, 2 * np.pi - 6.0]])
    free = Domain.free_space(3)
    assert free.wrap(np.array([[100.0, 0, 0]]))[0, 0] == 100.0


def test_domain_rejects_bad_inputs():
    with pytest.raises(DimensionError):
        Domain.free_space(4)
    with pytest.raises(UnsupportedDomainError):
        Domain("cylinder", 2)


def test_taylor_green_curl_at_origin():
    assert curl(TaylorGreen2D(), 0.0, [[0.0, 0.0]])[0] == pytest.approx(-2.0)


def test_constant_field_has_zero_curl():
    assert curl(UniformVelocity([1.0, 2.0]), 0.0, [[0.3, 0.4]])[0] == 0.0
    assert np.all(curl(UniformVelocity([1.0, 2.0, 3.0]), 0.0,
                       [[0.3, 0.4, 0.5]]) == 0.0)


def test_abc_is_beltrami(rng):
    flow = ABC(1, 1, 1)
    points = rng.uniform(0, 2 * np.pi, (10, 3))
    assert np.allclose(curl(flow, 0.0, points), flow(0.0, points),
                       atol=1e-10)


@pytest.mark.parametrize("slope, expected", [((1, 0), (0, -1)),
                                             ((0, 1), (1, 0))])
def test_perp_grad_of_linear_fields(slope, expected):
    assert np.allclose(perp_grad(Linear(slope), [[0.4, -2.0]]), [expected])


def test_perp_grad_of_taylor_green_stream(rng):
    flow = TaylorGreen2D(amplitude=-1.0)
    stream = flow.stream_function(0.0)
    points = np.vstack([[np.pi / 2, 0.0], rng.uniform(0, 6, (9, 2))])
    analytic = perp_grad(stream, points)
    numeric = perp_grad(lambda p: flow.stream(0.0, p), points)
    assert np.allclose(analytic, numeric, atol=1e-8)
    assert np.allclose(analytic, flow(0.0, points), atol=1e-12)


def test_perp_grad_is_2d_only():
    with pytest.raises(DimensionError):
        perp_grad(lambda p: p[:, 0], [[0.0, 0.0, 0.0]])


def test_perp_grad_is_divergence_free(rng):
    stream = LambOseen().stream_function(0.3)
    points = rng.normal(size=(5, 2))
    h = 1e-4
    div = 0.0
    for axis in range(2):
        shift = np.zeros(2)
        shift[axis] = h
        div = div + (perp_grad(stream, points + shift)[:, axis]
                     - perp_grad(stream, points - shift)[:, axis]) / (2 * h)
    assert np.allclose(div, 0.0, atol=1e-6)


def test_divergence_examples(rng):
    points = rng.uniform(0, 2 * np.pi, (6, 2))
    assert np.allclose(divergence(TaylorGreen2D(), points), 0.0, atol=1e-12)
    points3 = rng.uniform(0, 2 * np.pi, (6, 3))
    assert np.allclose(divergence(ABC(), points3), 0.0, atol=1e-12)
    assert np.allclose(divergence(Expansion(), points), 2.0, atol=1e-8)
    assert np.allclose(divergence(ABC().vorticity(0.0), points3), 0.0,
                       atol=1e-12)


@pytest.mark.parametrize("velocity", [
    LambOseen(gamma=2.0, nu=0.05, t0=0.5, center=(0.2, -0.1)),
    TaylorGreen2D(nu=0.1, amplitude=1.5, wavenumber=2),
    ABC(1.0, 0.7, 0.4),
    ConstantStrain(np.diag([0.25, 0.25, -0.5])),
    PointVortexSum([[0.0, 0.0], [1.0, 0.5]], [1.0, -0.5], core=0.3),
], ids=lambda v: type(v).__name__)
def test_analytic_gradients_match_differences(velocity, rng):
    points = rng.uniform(-1.0, 1.0, (12, velocity.dim))
    numeric = central_difference(lambda p: velocity(0.2, p), points,
                                 step=1e-5)
    assert np.allclose(velocity.gradient(0.2, points), numeric, atol=1e-7)
    assert np.allclose(divergence(velocity, points, 0.2), 0.0, atol=1e-6)


@pytest.mark.parametrize("vorticity", [
    GaussianBlob(1.3, 0.4, (0.1, 0.2)),
    FourierMode([1.0, 2.0, 0.0], amplitude=[0.0, 0.0, 1.0]),
    FourierMode([2.0, 1.0], amplitude=0.5, phase=0.3),
    VortexBlobs([[0, 0], [1, 0]], [0.5, 0.7], [1.0, 2.0], profile=COMPACT),
    LinearVorticity([0.3, -0.4], 1.0),
    LambOseen().vorticity(0.0),
], ids=lambda v: type(v).__name__)
def test_vorticity_gradients_match_differences(vorticity, rng):
    points = rng.uniform(-1.0, 1.0, (12, vorticity.dim))
    numeric = central_difference(vorticity, points, step=1e-5)
    assert np.allclose(vorticity.gradient(points), numeric, atol=1e-7)


def test_stream_functions_reproduce_velocity(rng):
    points = rng.normal(size=(8, 2))
    for velocity in (LambOseen(center=(0.3, 0.1)),
                     ConstantStrain([[0.3, 0.5], [-0.2, -0.3]]),
                     UniformVelocity([0.4, -1.0])):
        numeric = perp_grad(lambda p: velocity.stream(0.1, p), points)
        assert np.allclose(numeric, velocity(0.1, points), atol=1e-7)


def test_blob_velocity_curl_is_vorticity(rng):
    blobs = VortexBlobs([[0, 0], [1, 0.5]], [0.5, 0.4], [1.0, -2.0])
    flow = PointVortexSum([[0, 0], [1, 0.5]], [1.0, -2.0], core=None)
    points = rng.uniform(-1.0, 2.0, (10, 2))
    gradient = central_difference(blobs.velocity, points)
    assert np.allclose(gradient[:, 1, 0] - gradient[:, 0, 1], blobs(points),
                       atol=1e-6)
    far = np.array([[30.0, 0.0]])
    assert np.allclose(flow(0, far), blobs.velocity(far), rtol=1e-6)


def test_catalog_builds_by_name():
    assert isinstance(build("ABC", a=1, b=2, c=3), ABC)
    with pytest.raises(ValueError):
        build("Hill")


def test_projection_fixes_divergence_free_fields():
    domain = Domain.torus(2)
    grid = GridField.sample(lambda p: TaylorGreen2D()(0.0, p), domain,
                            (32, 32))
    assert np.allclose(project_div_free(grid).values, grid.values,
                       atol=1e-12)


def test_projection_annihilates_gradients():
    domain = Domain.torus(2)
    # phi = sin x cos 2y
    grid = GridField.sample(
        lambda p: np.stack([np.cos(p[:, 0]) * np.cos(2 * p[:, 1]),
                            -2 * np.sin(p[:, 0]) * np.sin(2 * p[:, 1])], -1),
        domain, (32, 32))
    assert np.allclose(project_div_free(grid).values, 0.0, atol=1e-12)


def test_projection_splits_mixed_fields():
    domain = Domain.torus(3)
    flow = ABC(1.0, 0.5, 0.3)

    def mixed(p):
        # grad of cos(x + y) sin z plus the ABC flow
        s = np.sin(p[:, 0] + p[:, 1])
        grad = np.stack([-s * np.sin(p[:, 2]), -s * np.sin(p[:, 2]),
                         np.cos(p[:, 0] + p[:, 1]) * np.cos(p[:, 2])], -1)
        return grad + flow(0.0, p)
    grid = GridField.sample(mixed, domain, (16, 16, 16))
    projected = project_div_free(grid)
    expected = flow(0.0, domain.nodes((16, 16, 16))).reshape(grid.values.shape)
    assert np.allclose(projected.values, expected, atol=1e-10)
    assert np.allclose(project_div_free(projected).values, projected.values,
                       atol=1e-12)


def test_projection_needs_a_torus():
    grid = GridField.sample(lambda p: p, Domain.free_space(2), (8, 8))
    with pytest.raises(UnsupportedDomainError):
        project_div_free(grid)


@pytest.mark.parametrize("domain", [Domain.torus(2), Domain.free_space(2, 3)],
                         ids=["torus", "free-space"])
def test_grid_reproduces_nodes(domain):
    grid = GridField.sample(GaussianBlob(1.0, 0.6), domain, (24, 20))
    assert np.allclose(grid(grid.nodes()), grid.values.ravel(), atol=1e-12)


def test_grid_gradient_converges_under_refinement(rng):
    domain = Domain.torus(2)
    vorticity = TaylorGreen2D().vorticity(0.0)
    points = rng.uniform(0, 2 * np.pi, (50, 2))
    errors = []
    for n in (16, 32):
        grid = GridVorticityField.sample(vorticity, domain, (n, n))
        errors.append(np.max(np.abs(grid.gradient(points)
                                    - vorticity.gradient(points))))
    # cubic splines: fourth order, allow for the pre-asymptotic range
    assert errors[0] / errors[1] > 6


def test_grid_csv_and_json_are_bit_exact(tmp_path, rng):
    grid = GridField(rng.normal(size=(5, 4, 2)), Domain.torus(2, (1.0, 3.0)))
    grid.to_csv(str(tmp_path / "field.csv"))
    grid.to_json(str(tmp_path / "field.json"))
    for loaded in (GridField.load(tmp_path / "field.csv"),
                   GridField.load(tmp_path / "field.json")):
        assert np.array_equal(loaded.values, grid.values)
        assert loaded.domain == grid.domain
        assert loaded.order == grid.order


def test_grid_velocity_interpolates_in_time():
    domain = Domain.torus(2)
    flow = TaylorGreen2D(nu=0.5)
    grid = GridVelocityField.sample(flow, domain, (64, 64), times=(0.0, 1.0))
    point = np.array([[0.7, 1.1]])
    halfway = 0.5 * (flow(0.0, point) + flow(1.0, point))
    assert np.allclose(grid(0.5, point), halfway, atol=1e-5)
    assert np.allclose(grid(5.0, point), flow(1.0, point), atol=1e-5)


def test_grid_velocity_stream_on_torus(rng):
    domain = Domain.torus(2)
    flow = TaylorGreen2D()
    grid = GridVelocityField.sample(flow, domain, (64, 64))
    points = rng.uniform(0, 2 * np.pi, (10, 2))
    assert np.allclose(grid.stream(0.0, points), flow.stream(0.0, points),
                       atol=1e-5)


def test_grid_velocity_is_shared_across_threads(rng):
    domain = Domain.torus(2)
    flow = TaylorGreen2D()
    points = rng.uniform(0, 2 * np.pi, (20, 2))
    serial = GridVelocityField.sample(flow, domain, (32, 32))
    expected = [serial(0.0, points), serial.gradient(0.0, points),
                serial.stream(0.0, points)]

    shared = GridVelocityField.sample(flow, domain, (32, 32))

    def read(_):
        return [shared(0.0, points), shared.gradient(0.0, points),
                shared.stream(0.0, points)]

    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(read, range(16)))
    for result in results:
        for value, reference in zip(result, expected):
            assert np.array_equal(value, reference)
    assert len(shared._streams) == 1



def test_blob_grid_integral_is_circulation():
    domain = Domain.free_space(2, 4.0)
    blobs = VortexBlobs([[0.5, 0.0], [-0.5, 0.2]], [0.4, 0.5], [1.0, 2.0])
    grid = GridVorticityField.sample(blobs, domain, (161, 161))
    assert grid.circulation() == pytest.approx(3.0, rel=1e-6)
