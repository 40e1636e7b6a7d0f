"""
Diffusion frames that absorb a drift.

A frame K(t, x) with orthonormal columns K_i drives the Stratonovich
equation dx = scale * K o dW. Its generator is

    (scale^2 / 2) * (Laplacian + sum_i (K_i . grad) K_i . grad),

so the frame carries the Ito drift (scale^2 / 2) sum_i (K_i . grad) K_i
with no drift term of its own. For a 2D rotation frame K = R(theta)
the sum is J grad(theta), with J(g) = (-g_2, g_1) the quarter turn, and
a divergence-free drift b = perp_grad(psi) is carried by
theta = -2 psi / scale^2.
"""
import logging
from dataclasses import dataclass

import numpy as np

from stochflow.conf import settings
from stochflow.core.exceptions import (ConfigurationError, DimensionError,
                                       UnsupportedDriftError)
from stochflow.fields.base import FD_STEP, as_points

logger = logging.getLogger(__name__)


def quarter_turn(vectors):
    vectors = np.asarray(vectors)
    return np.stack([-vectors[..., 1], vectors[..., 0]], axis=-1)


class FrameField(object):
    """
    A frame of ``fiber_dim`` vector fields on a ``dim``-dimensional
    domain. ``matrix(time, points)`` returns (N, dim, fiber_dim) arrays
    with the fields as columns. Subclasses with closed-form derivatives
    override ``derivative``.
    """

    def __init__(self, matrix, dim, fiber_dim=None, scale=1.0,
                 description=None):
        if dim < 2:
            raise DimensionError("A frame needs at least two dimensions.",
                                 dim=dim)
        self._matrix = matrix
        self.dim = int(dim)
        self.fiber_dim = int(fiber_dim or dim)
        self.scale = float(scale)
        self.description = description or {"type": "FrameField"}

    @classmethod
    def constant(cls, matrix, scale=1.0):
        matrix = np.asarray(matrix, dtype=float)
        return ConstantFrame(matrix, scale=scale)

    @classmethod
    def identity(cls, dim, scale=1.0):
        return ConstantFrame(np.eye(dim), scale=scale)

    def matrix(self, time, points):
        return np.asarray(self._matrix(time, as_points(points, self.dim)),
                          dtype=float)

    def derivative(self, time, points):
        """dK[p, a, i, j] = d K_{a i} / d x_j, by central differences."""
        return self.difference(time, points)

    def difference(self, time, points, step=FD_STEP):
        points = as_points(points, self.dim)
        columns = []
        for j in range(self.dim):
            shift = np.zeros(self.dim)
            shift[j] = step
            columns.append((self.matrix(time, points + shift)
                            - self.matrix(time, points - shift)) / (2 * step))
        return np.stack(columns, axis=-1)

    def self_advection(self, time, points, analytic=True):
        """sum_i (K_i . grad) K_i at the points."""
        points = as_points(points, self.dim)
        k = self.matrix(time, points)
        if analytic:
            dk = self.derivative(time, points)
        else:
            dk = self.difference(time, points)
        return np.einsum("pji,paij->pa", k, dk)

    def drift(self, time, points, analytic=True):
        """The Ito drift carried by the Stratonovich frame equation."""
        return 0.5 * self.scale ** 2 * self.self_advection(time, points,
                                                           analytic)

    def with_scale(self, scale):
        return FrameField(self._matrix, self.dim, self.fiber_dim, scale,
                          self.description)

    def describe(self):
        data = dict(self.description)
        data.update({"dim": self.dim, "fiber_dim": self.fiber_dim,
                     "scale": self.scale})
        return data


class ConstantFrame(FrameField):

    def __init__(self, matrix, scale=1.0):
        if matrix.ndim != 2:
            raise DimensionError("A constant frame is a single matrix.")
        self.value = matrix
        super(ConstantFrame, self).__init__(
            self._broadcast, matrix.shape[0], matrix.shape[1], scale,
            {"type": "ConstantFrame", "matrix": matrix.tolist()})

    def _broadcast(self, time, points):
        return np.broadcast_to(self.value, (points.shape[0],)
                               + self.value.shape).copy()

    def derivative(self, time, points):
        points = as_points(points, self.dim)
        return np.zeros((points.shape[0],) + self.value.shape + (self.dim,))

    def with_scale(self, scale):
        return ConstantFrame(self.value, scale=scale)


class RotationFrame2D(FrameField):
    """
    K = R(theta(t, x)) in the plane, with theta = factor * psi for a
    stream function psi of ``velocity``. ``velocity(t, x)`` supplies
    the closed-form gradient of psi: grad psi = (-u_2, u_1).
    """

    def __init__(self, velocity, factor, scale=1.0, offset=0.0):
        self.velocity = velocity
        self.factor = float(factor)
        self.offset = float(offset)
        super(RotationFrame2D, self).__init__(
            self._rotation, 2, 2, scale,
            {"type": "RotationFrame2D", "factor": self.factor,
             "offset": self.offset,
             "stream_of": _describe(velocity)})

    def angle(self, time, points):
        points = as_points(points, 2)
        return self.factor * np.asarray(self.velocity.stream(time, points)) \
            + self.offset

    def angle_gradient(self, time, points):
        u = np.asarray(self.velocity(time, as_points(points, 2)))
        return self.factor * np.stack([-u[:, 1], u[:, 0]], axis=-1)

    def _rotation(self, time, points):
        theta = self.angle(time, points)
        c, s = np.cos(theta), np.sin(theta)
        return np.stack([np.stack([c, -s], axis=-1),
                         np.stack([s, c], axis=-1)], axis=-2)

    def derivative(self, time, points):
        theta = self.angle(time, points)
        grad = self.angle_gradient(time, points)
        c, s = np.cos(theta), np.sin(theta)
        d_rotation = np.stack([np.stack([-s, -c], axis=-1),
                               np.stack([c, -s], axis=-1)], axis=-2)
        return d_rotation[..., None] * grad[:, None, None, :]

    def self_advection(self, time, points, analytic=True):
        if analytic:
            return quarter_turn(self.angle_gradient(time, points))
        return super(RotationFrame2D, self).self_advection(time, points,
                                                           analytic=False)

    def scaled_angle(self, factor):
        """The same frame with its angle multiplied by ``factor``."""
        return RotationFrame2D(self.velocity, self.factor * factor,
                               self.scale, self.offset * factor)

    def with_scale(self, scale):
        return RotationFrame2D(self.velocity, self.factor, scale, self.offset)


def _describe(field):
    describe = getattr(field, "describe", None)
    return describe() if describe is not None else type(field).__name__


class _NegatedVelocity(object):
    """-u with stream function -psi."""

    has_stream = True

    def __init__(self, velocity):
        self.velocity = velocity
        self.dim = velocity.dim
        self.domain = getattr(velocity, "domain", None)

    def __call__(self, time, points):
        return -np.asarray(self.velocity(time, points))

    def gradient(self, time, points):
        return -np.asarray(self.velocity.gradient(time, points))

    def stream(self, time, points):
        return -np.asarray(self.velocity.stream(time, points))

    def describe(self):
        return {"type": "Negated", "field": _describe(self.velocity)}


def probe_points(domain, n_points, seed=0):
    rng = np.random.default_rng(seed)
    if domain is None:
        return rng.uniform(-1.0, 1.0, (n_points, 2))
    corner, sides = domain.box()
    return corner + sides * rng.random((n_points, domain.dim))


def check_divergence_free(drift, time=0.0, points=None):
    """Raise UnsupportedDriftError unless ``drift`` is solenoidal."""
    if points is None:
        points = probe_points(getattr(drift, "domain", None),
                               int(settings.DRIFTLESS_PROBES))
    gradient = np.asarray(drift.gradient(time, as_points(points, 2)))
    divergence = float(np.max(np.abs(np.trace(gradient, axis1=-2,
                                              axis2=-1))))
    scale = max(float(np.max(np.abs(gradient))), 1.0)
    if divergence > settings.DRIFTLESS_DIVERGENCE_TOLERANCE * scale:
        raise UnsupportedDriftError(
            "A rotation frame only carries divergence-free drifts.",
            divergence=divergence)
    return divergence


def build_rotation_frame_2d(drift, scale=1.0, time=0.0, points=None):
    """
    The rotation frame whose Stratonovich equation with noise amplitude
    ``scale`` carries the Ito drift ``drift``. The drift is a 2D
    VelocityField with a stream function; it must be divergence free.
    """
    if drift.dim != 2:
        raise DimensionError("Rotation frames are two dimensional.",
                             dim=drift.dim)
    if not scale > 0:
        raise ConfigurationError("The frame scale must be positive.",
                                 field="scale", value=scale)
    check_divergence_free(drift, time, points)
    if not getattr(drift, "has_stream", False):
        raise UnsupportedDriftError(
            "The drift has no stream function to build a frame from.",
            drift=_describe(drift))
    frame = RotationFrame2D(drift, -2.0 / scale ** 2, scale=scale)
    logger.debug("rotation frame for %s with scale %.4g", _describe(drift),
                 scale)
    return frame


def frame_for_lagrangian_drift(velocity, nu, time=0.0, points=None):
    """
    The frame of the forward Lagrangian particles
    dx = -u dt + sqrt(2 nu) dW: scale sqrt(2 nu), theta = psi_u / nu.
    """
    if not nu > 0:
        raise ConfigurationError("nu must be positive", field="nu", value=nu)
    if velocity.dim != 2:
        raise DimensionError("Rotation frames are two dimensional.",
                             dim=velocity.dim)
    if not getattr(velocity, "has_stream", False):
        raise UnsupportedDriftError(
            "The velocity has no stream function to build a frame from.",
            velocity=_describe(velocity))
    negated = _NegatedVelocity(velocity)
    return build_rotation_frame_2d(negated, scale=float(np.sqrt(2 * nu)),
                                   time=time, points=points)


@dataclass(frozen=True)
class TorsionSpec:
    """
    A trace-torsion 1-form Q on an n-dimensional flat domain with the
    torsion T(a, b) = (2 / (n - 1)) (Q(b) a - Q(a) b), whose trace is
    2 Q. With noise of variance 2 nu the diffusion it generates has the
    drift 2 nu Q; Navier-Stokes particles use Q = -u / (2 nu).
    """

    form: object
    dim: int
    nu: float = 0.5

    def __post_init__(self):
        if self.dim < 2:
            raise ConfigurationError("A trace torsion needs dimension two "
                                     "or more.", field="dim", value=self.dim)
        if not self.nu > 0:
            raise ConfigurationError("nu must be positive", field="nu",
                                     value=self.nu)

    @classmethod
    def for_velocity(cls, velocity, nu):
        def form(time, points):
            return -np.asarray(velocity(time, points)) / (2 * nu)
        return cls(form=form, dim=velocity.dim, nu=float(nu))

    def q(self, time, points):
        return np.asarray(self.form(time, as_points(points, self.dim)),
                          dtype=float)

    def torsion(self, time, points, a, b):
        q = self.q(time, points)
        a = np.broadcast_to(np.asarray(a, dtype=float), q.shape)
        b = np.broadcast_to(np.asarray(b, dtype=float), q.shape)
        qa = np.sum(q * a, axis=-1, keepdims=True)
        qb = np.sum(q * b, axis=-1, keepdims=True)
        return 2.0 / (self.dim - 1) * (qb * a - qa * b)

    def trace(self, time, points):
        """Contraction sum_i T(e_i, b)_i as a 1-form in b."""
        points = as_points(points, self.dim)
        basis = np.eye(self.dim)
        columns = []
        for b in basis:
            columns.append(sum(self.torsion(time, points, e, b)[:, i]
                               for i, e in enumerate(basis)))
        return np.stack(columns, axis=-1)

    def drift(self, time, points):
        return 2 * self.nu * self.q(time, points)

    @property
    def scale(self):
        return float(np.sqrt(2 * self.nu))


@dataclass(frozen=True)
class FrameReport:
    isotropy_residual: float
    drift_residual: float
    drift_size: float
    tolerance: float
    n_points: int
    analytic: bool

    @property
    def relative_drift_residual(self):
        return self.drift_residual / self.drift_size if self.drift_size else (
            self.drift_residual)

    @property
    def passed(self):
        allowed = self.tolerance * max(1.0, self.drift_size)
        return (self.isotropy_residual <= self.tolerance
                and self.drift_residual <= allowed)

    def as_dict(self):
        return {"isotropy_residual": self.isotropy_residual,
                "drift_residual": self.drift_residual,
                "relative_drift_residual": self.relative_drift_residual,
                "drift_size": self.drift_size, "tolerance": self.tolerance,
                "n_points": self.n_points, "analytic": self.analytic,
                "passed": self.passed}


def _target_drift(drift, time, points):
    if drift is None:
        return np.zeros_like(points)
    if hasattr(drift, "drift"):
        return np.asarray(drift.drift(time, points), dtype=float)
    return np.asarray(drift(time, points), dtype=float)


def verify_frame_conditions(frame, drift, points, time=0.0, analytic=True,
                            tolerance=None):
    """
    Max |K K^T - I| and max |carried drift - target| over ``points``.
    ``drift`` is a callable (time, points), a TorsionSpec, or None for
    zero; ``analytic=False`` differentiates the frame numerically.
    """
    points = as_points(points, frame.dim)
    k = frame.matrix(time, points)
    gram = np.einsum("pai,pbi->pab", k, k)
    isotropy = float(np.max(np.abs(gram - np.eye(frame.dim))))
    target = _target_drift(drift, time, points)
    carried = frame.drift(time, points, analytic=analytic)
    residual = float(np.max(np.linalg.norm(carried - target, axis=-1)))
    size = float(np.max(np.linalg.norm(target, axis=-1)))
    report = FrameReport(
        isotropy_residual=isotropy, drift_residual=residual, drift_size=size,
        tolerance=float(tolerance or settings.DRIFTLESS_FRAME_TOLERANCE),
        n_points=points.shape[0], analytic=bool(analytic))
    if not report.passed:
        logger.warning("frame check failed: isotropy %.3g, drift %.3g of "
                       "%.3g", isotropy, residual, size)
    return report
