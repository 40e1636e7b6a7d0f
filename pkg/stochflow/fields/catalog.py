"""
Closed-form velocity and vorticity fields.

They serve as initial data, as prescribed flows and as exact answers
in tests. ``CATALOG`` maps the names accepted in scenario files to the
constructors.
"""
import numpy as np
from scipy import special

from stochflow.core.exceptions import DimensionError
from stochflow.fields.base import VelocityField, VorticityField
from stochflow.fields.domain import Domain

EULER_GAMMA = np.euler_gamma

GAUSSIAN = "gaussian"
COMPACT = "compact"
PROFILES = (GAUSSIAN, COMPACT)


def _relative(points, center, domain=None):
    delta = points - np.asarray(center, dtype=float)
    if domain is not None and domain.is_periodic:
        delta = domain.minimal_image(delta)
    return delta


def _rotation_gradient(dx, dy, f, df):
    """
    Deformation tensor of u = f(r^2) (-y, x), given f and f' = df/d(r^2).
    """
    g = np.empty(dx.shape + (2, 2))
    g[..., 0, 0] = -2 * dx * dy * df
    g[..., 0, 1] = -f - 2 * dy * dy * df
    g[..., 1, 0] = f + 2 * dx * dx * df
    g[..., 1, 1] = 2 * dx * dy * df
    return g


# Radial vortex profiles. ``h(q)`` is the enclosed circulation fraction
# divided by q = r^2 / scale, with its derivative in q, both finite at 0.

def _gaussian_ratio(q):
    small = q < 1e-4
    safe = np.where(small, 1.0, q)
    h = np.where(small, 1 - q / 2 + q * q / 6, -np.expm1(-safe) / safe)
    dh = np.where(small, -0.5 + q / 3 - q * q / 8,
                  (np.exp(-safe) * (safe + 1) - 1) / safe ** 2)
    return h, dh


def _compact_ratio(q):
    # 1 - (1 - q)^4 over q, zero-padded beyond the core
    inside = q < 1
    qc = np.minimum(q, 1.0)
    h_in = 4 - 6 * qc + 4 * qc ** 2 - qc ** 3
    dh_in = -6 + 8 * qc - 3 * qc ** 2
    safe = np.where(inside, 1.0, q)
    h = np.where(inside, h_in, 1.0 / safe)
    dh = np.where(inside, dh_in, -1.0 / safe ** 2)
    return h, dh


class LambOseenVorticity(VorticityField):
    """Gamma / (4 pi nu a) exp(-r^2 / (4 nu a)) at vortex age ``a``."""

    def __init__(self, gamma, nu, age, center=(0.0, 0.0)):
        self.gamma = float(gamma)
        self.nu = float(nu)
        self.age = float(age)
        self.center = np.asarray(center, dtype=float)
        self.dim = 2
        self.domain = Domain.free_space(2)
        self.width = 4 * self.nu * self.age
        self.support = (self.center, float(np.sqrt(40 * self.width)))

    def __call__(self, points):
        d = _relative(self.points(points), self.center)
        r2 = np.sum(d ** 2, axis=-1)
        return self.gamma / (np.pi * self.width) * np.exp(-r2 / self.width)

    def gradient(self, points):
        d = _relative(self.points(points), self.center)
        return (-2 / self.width) * self(points)[:, None] * d

    def describe(self):
        return {"type": "LambOseen", "gamma": self.gamma, "nu": self.nu,
                "age": self.age, "center": self.center.tolist()}


class LambOseen(VelocityField):
    """
    Lamb-Oseen vortex of circulation ``gamma``, already ``t0`` old at
    time zero, so at time t the vortex age is t0 + t.
    """

    has_stream = True

    def __init__(self, gamma=1.0, nu=0.1, t0=1.0, center=(0.0, 0.0)):
        if nu <= 0 or t0 <= 0:
            raise ValueError("Lamb-Oseen needs nu > 0 and t0 > 0.")
        self.gamma = float(gamma)
        self.nu = float(nu)
        self.t0 = float(t0)
        self.center = np.asarray(center, dtype=float)
        self.dim = 2
        self.domain = Domain.free_space(2)

    def _scale(self, time):
        return 4 * self.nu * (self.t0 + time)

    def azimuthal_speed(self, time, radius):
        radius = np.asarray(radius, dtype=float)
        return (self.gamma / (2 * np.pi * radius)
                * -np.expm1(-radius ** 2 / self._scale(time)))

    def peak_vorticity(self, time):
        return self.gamma / (np.pi * self._scale(time))

    def __call__(self, time, points):
        d = _relative(self.points(points), self.center)
        c = self._scale(time)
        h, _ = _gaussian_ratio(np.sum(d ** 2, axis=-1) / c)
        f = self.gamma / (2 * np.pi * c) * h
        return f[:, None] * np.stack([-d[:, 1], d[:, 0]], axis=-1)

    def gradient(self, time, points):
        d = _relative(self.points(points), self.center)
        c = self._scale(time)
        h, dh = _gaussian_ratio(np.sum(d ** 2, axis=-1) / c)
        f = self.gamma / (2 * np.pi * c) * h
        df = self.gamma / (2 * np.pi * c * c) * dh
        return _rotation_gradient(d[:, 0], d[:, 1], f, df)

    def stream(self, time, points):
        d = _relative(self.points(points), self.center)
        c = self._scale(time)
        q = np.sum(d ** 2, axis=-1) / c
        safe = np.where(q > 0, q, 1.0)
        core = np.where(q > 0, np.log(safe) + special.exp1(safe),
                        -EULER_GAMMA)
        return -self.gamma / (4 * np.pi) * core

    def vorticity(self, time):
        return LambOseenVorticity(self.gamma, self.nu, self.t0 + time,
                                  self.center)

    def describe(self):
        return {"type": "LambOseen", "gamma": self.gamma, "nu": self.nu,
                "t0": self.t0, "center": self.center.tolist()}


class TaylorGreenVorticity(VorticityField):

    def __init__(self, amplitude, wavenumber, decay=1.0):
        self.amplitude = float(amplitude)
        self.k = float(wavenumber)
        self.decay = float(decay)
        self.dim = 2
        self.domain = Domain.torus(2, 2 * np.pi / self.k)

    def __call__(self, points):
        p = self.k * self.points(points)
        return (-2 * self.amplitude * self.k * self.decay
                * np.cos(p[:, 0]) * np.cos(p[:, 1]))

    def gradient(self, points):
        p = self.k * self.points(points)
        a = 2 * self.amplitude * self.k ** 2 * self.decay
        return np.stack([a * np.sin(p[:, 0]) * np.cos(p[:, 1]),
                         a * np.cos(p[:, 0]) * np.sin(p[:, 1])], axis=-1)


class TaylorGreen2D(VelocityField):
    """
    u = A (cos kx sin ky, -sin kx cos ky) exp(-2 nu k^2 t), an exact
    Navier-Stokes solution on the torus of period 2 pi / k.
    """

    has_stream = True

    def __init__(self, nu=0.1, amplitude=1.0, wavenumber=1):
        self.nu = float(nu)
        self.amplitude = float(amplitude)
        self.k = float(wavenumber)
        self.dim = 2
        self.domain = Domain.torus(2, 2 * np.pi / self.k)

    def decay(self, time):
        return np.exp(-2 * self.nu * self.k ** 2 * time)

    def kinetic_energy(self, time):
        """Domain-integrated 1/2 |u|^2."""
        return (0.25 * self.amplitude ** 2 * self.decay(time) ** 2
                * self.domain.volume)

    def __call__(self, time, points):
        p = self.k * self.points(points)
        a = self.amplitude * self.decay(time)
        return a * np.stack([np.cos(p[:, 0]) * np.sin(p[:, 1]),
                             -np.sin(p[:, 0]) * np.cos(p[:, 1])], axis=-1)

    def gradient(self, time, points):
        p = self.k * self.points(points)
        a = self.amplitude * self.k * self.decay(time)
        sx, cx = np.sin(p[:, 0]), np.cos(p[:, 0])
        sy, cy = np.sin(p[:, 1]), np.cos(p[:, 1])
        g = np.empty((p.shape[0], 2, 2))
        g[:, 0, 0] = -a * sx * sy
        g[:, 0, 1] = a * cx * cy
        g[:, 1, 0] = -a * cx * cy
        g[:, 1, 1] = a * sx * sy
        return g

    def stream(self, time, points):
        p = self.k * self.points(points)
        return (-self.amplitude / self.k * self.decay(time)
                * np.cos(p[:, 0]) * np.cos(p[:, 1]))

    def vorticity(self, time):
        return TaylorGreenVorticity(self.amplitude, self.k, self.decay(time))

    def describe(self):
        return {"type": "TaylorGreen2D", "nu": self.nu,
                "amplitude": self.amplitude, "wavenumber": self.k}


class ABCVorticity(VorticityField):

    def __init__(self, flow):
        self.flow = flow
        self.dim = 3
        self.domain = flow.domain

    def __call__(self, points):
        return self.flow(0.0, points)

    def gradient(self, points):
        return self.flow.gradient(0.0, points)


class ABC(VelocityField):
    """
    Arnold-Beltrami-Childress flow on the 2 pi torus,
    u = (A sin z + C cos y, B sin x + A cos z, C sin y + B cos x).
    It is its own curl.
    """

    steady = True

    def __init__(self, a=1.0, b=1.0, c=1.0):
        self.a, self.b, self.c = float(a), float(b), float(c)
        self.dim = 3
        self.domain = Domain.torus(3, 2 * np.pi)

    def __call__(self, time, points):
        x, y, z = self.points(points).T
        return np.stack([self.a * np.sin(z) + self.c * np.cos(y),
                         self.b * np.sin(x) + self.a * np.cos(z),
                         self.c * np.sin(y) + self.b * np.cos(x)], axis=-1)

    def gradient(self, time, points):
        x, y, z = self.points(points).T
        g = np.zeros((x.shape[0], 3, 3))
        g[:, 0, 1] = -self.c * np.sin(y)
        g[:, 0, 2] = self.a * np.cos(z)
        g[:, 1, 0] = self.b * np.cos(x)
        g[:, 1, 2] = -self.a * np.sin(z)
        g[:, 2, 0] = -self.b * np.sin(x)
        g[:, 2, 1] = self.c * np.cos(y)
        return g

    def vorticity(self, time):
        return ABCVorticity(self)

    def describe(self):
        return {"type": "ABC", "A": self.a, "B": self.b, "C": self.c}


class ConstantStrain(VelocityField):
    """u(x) = M x for a constant trace-free matrix M."""

    steady = True

    def __init__(self, matrix, domain=None):
        self.matrix = np.asarray(matrix, dtype=float)
        n = self.matrix.shape[0]
        if self.matrix.shape != (n, n) or n not in (2, 3):
            raise DimensionError("A strain matrix must be 2x2 or 3x3.")
        if abs(np.trace(self.matrix)) > 1e-12:
            raise ValueError("A strain matrix must be trace free to give a "
                             "divergence-free velocity.")
        self.dim = n
        self.has_stream = n == 2
        self.domain = domain or Domain.free_space(n)

    def __call__(self, time, points):
        return self.points(points) @ self.matrix.T

    def gradient(self, time, points):
        points = self.points(points)
        return np.broadcast_to(self.matrix, (points.shape[0], self.dim,
                                             self.dim)).copy()

    def stream(self, time, points):
        # psi = x.S x / 2 with S = [[0, -1], [1, 0]] M symmetric
        s = np.array([[0.0, -1.0], [1.0, 0.0]]) @ self.matrix
        points = self.points(points)
        return 0.5 * np.einsum("pi,ij,pj->p", points, s, points)

    def describe(self):
        return {"type": "ConstantStrain", "matrix": self.matrix.tolist()}


class UniformVelocity(VelocityField):

    steady = True

    def __init__(self, vector, domain=None):
        self.vector = np.asarray(vector, dtype=float)
        self.dim = self.vector.shape[0]
        self.has_stream = self.dim == 2
        self.domain = domain or Domain.free_space(self.dim)

    def __call__(self, time, points):
        points = self.points(points)
        return np.broadcast_to(self.vector, points.shape).copy()

    def gradient(self, time, points):
        points = self.points(points)
        return np.zeros((points.shape[0], self.dim, self.dim))

    def stream(self, time, points):
        x, y = self.points(points).T
        return self.vector[0] * y - self.vector[1] * x

    def vorticity(self, time):
        return UniformVorticity(np.zeros(self.dim if self.dim == 3 else ()),
                                dim=self.dim, domain=self.domain)

    def describe(self):
        return {"type": "UniformVelocity", "vector": self.vector.tolist()}


def ZeroVelocity(dim, domain=None):
    return UniformVelocity(np.zeros(dim), domain=domain)


class UniformVorticity(VorticityField):

    def __init__(self, value, dim=None, domain=None):
        self.value = np.asarray(value, dtype=float)
        self.dim = dim or (3 if self.value.shape == (3,) else 2)
        if self.dim == 2 and self.value.shape != ():
            raise DimensionError("2D vorticity is a scalar.")
        if self.dim == 3 and self.value.shape != (3,):
            raise DimensionError("3D vorticity is a vector.")
        self.domain = domain or Domain.free_space(self.dim)

    def __call__(self, points):
        points = self.points(points)
        return np.broadcast_to(self.value, points.shape[:1]
                               + self.value.shape).copy()

    def gradient(self, points):
        points = self.points(points)
        return np.zeros(points.shape[:1] + self.value.shape + (self.dim,))

    def describe(self):
        return {"type": "UniformVorticity", "value": self.value.tolist()}


def ZeroVorticity(dim, domain=None):
    value = 0.0 if dim == 2 else np.zeros(3)
    return UniformVorticity(value, dim=dim, domain=domain)


class LinearVorticity(VorticityField):
    """Omega(x) = c . x + offset, in 2D."""

    def __init__(self, slope, offset=0.0, domain=None):
        self.slope = np.asarray(slope, dtype=float)
        if self.slope.shape != (2,):
            raise DimensionError("LinearVorticity is a 2D scalar field.")
        self.offset = float(offset)
        self.dim = 2
        self.domain = domain or Domain.free_space(2)

    def __call__(self, points):
        return self.points(points) @ self.slope + self.offset

    def gradient(self, points):
        points = self.points(points)
        return np.broadcast_to(self.slope, points.shape).copy()

    def describe(self):
        return {"type": "LinearVorticity", "slope": self.slope.tolist(),
                "offset": self.offset}


class GaussianBlob(VorticityField):
    """
    2D Gaussian vortex patch of circulation ``gamma`` and standard
    deviation ``sigma``: gamma / (2 pi sigma^2) exp(-r^2 / 2 sigma^2).
    """

    def __init__(self, gamma=1.0, sigma=0.5, center=(0.0, 0.0), domain=None):
        self.gamma = float(gamma)
        self.sigma = float(sigma)
        self.center = np.asarray(center, dtype=float)
        self.dim = 2
        self.domain = domain or Domain.free_space(2)
        if not self.domain.is_periodic:
            self.support = (self.center, 9.0 * self.sigma)

    def __call__(self, points):
        d = _relative(self.points(points), self.center, self.domain)
        r2 = np.sum(d ** 2, axis=-1)
        return (self.gamma / (2 * np.pi * self.sigma ** 2)
                * np.exp(-r2 / (2 * self.sigma ** 2)))

    def gradient(self, points):
        d = _relative(self.points(points), self.center, self.domain)
        return -self(points)[:, None] * d / self.sigma ** 2

    def diffused(self, nu, time):
        """The heat-equation solution after ``time`` at viscosity ``nu``."""
        return GaussianBlob(self.gamma,
                            np.sqrt(self.sigma ** 2 + 2 * nu * time),
                            self.center, self.domain)

    def describe(self):
        return {"type": "GaussianBlob", "gamma": self.gamma,
                "sigma": self.sigma, "center": self.center.tolist()}


class FourierMode(VorticityField):
    """
    amplitude * cos(k . x + phase). In 3D the amplitude is a vector
    orthogonal to k, so the field is divergence free.
    """

    def __init__(self, wavevector, amplitude=1.0, phase=0.0, domain=None):
        self.k = np.asarray(wavevector, dtype=float)
        self.dim = self.k.shape[0]
        self.amplitude = np.asarray(amplitude, dtype=float)
        self.phase = float(phase)
        if self.dim == 3:
            if self.amplitude.shape != (3,):
                raise DimensionError("A 3D mode needs a vector amplitude.")
            if abs(self.amplitude @ self.k) > 1e-12 * (
                    1 + np.linalg.norm(self.k)):
                raise ValueError("A 3D mode amplitude must be orthogonal to "
                                 "its wavevector.")
        elif self.amplitude.shape != ():
            raise DimensionError("A 2D mode has a scalar amplitude.")
        self.domain = domain or Domain.torus(self.dim, 2 * np.pi)

    def __call__(self, points):
        phase = self.points(points) @ self.k + self.phase
        if self.dim == 2:
            return self.amplitude * np.cos(phase)
        return np.cos(phase)[:, None] * self.amplitude

    def gradient(self, points):
        phase = self.points(points) @ self.k + self.phase
        if self.dim == 2:
            return -self.amplitude * np.sin(phase)[:, None] * self.k
        return -np.sin(phase)[:, None, None] * np.multiply.outer(
            self.amplitude, self.k)

    def decay_rate(self, nu):
        return nu * float(self.k @ self.k)

    def diffused(self, nu, time):
        return FourierMode(self.k,
                           self.amplitude * np.exp(-self.decay_rate(nu) * time),
                           self.phase, self.domain)

    def describe(self):
        return {"type": "FourierMode", "wavevector": self.k.tolist(),
                "amplitude": self.amplitude.tolist(), "phase": self.phase}


class GaussianTube3D(VorticityField):
    """
    A straight vortex tube along z through ``(x0, y0)`` with a Gaussian
    cross-section: (0, 0, gamma / (2 pi sigma^2) exp(-r^2 / 2 sigma^2)).
    """

    def __init__(self, gamma=1.0, sigma=0.5, axis_point=(0.0, 0.0)):
        self.gamma = float(gamma)
        self.sigma = float(sigma)
        self.axis_point = np.asarray(axis_point, dtype=float)
        self.dim = 3
        self.domain = Domain.free_space(3)

    def __call__(self, points):
        d = self.points(points)[:, :2] - self.axis_point
        w = (self.gamma / (2 * np.pi * self.sigma ** 2)
             * np.exp(-np.sum(d ** 2, axis=-1) / (2 * self.sigma ** 2)))
        out = np.zeros((d.shape[0], 3))
        out[:, 2] = w
        return out

    def gradient(self, points):
        points = self.points(points)
        d = points[:, :2] - self.axis_point
        w = self(points)[:, 2]
        g = np.zeros((points.shape[0], 3, 3))
        g[:, 2, :2] = -w[:, None] * d / self.sigma ** 2
        return g

    def azimuthal_speed(self, radius):
        radius = np.asarray(radius, dtype=float)
        return (self.gamma / (2 * np.pi * radius)
                * -np.expm1(-radius ** 2 / (2 * self.sigma ** 2)))

    def describe(self):
        return {"type": "GaussianTube3D", "gamma": self.gamma,
                "sigma": self.sigma, "axis_point": self.axis_point.tolist()}


class VortexBlobs(VorticityField):
    """
    Sum of radially symmetric 2D blobs (the many-vortices initial
    data). Each blob keeps its circulation exactly: the gaussian profile
    gamma / (2 pi d^2) exp(-r^2 / 2 d^2) and the compact profile
    4 gamma / (pi d^2) (1 - r^2/d^2)^3 supported in r < d.
    On the torus each blob is placed at its minimal image.
    """

    def __init__(self, centers, radii, circulations, profile=GAUSSIAN,
                 domain=None):
        self.centers = np.atleast_2d(np.asarray(centers, dtype=float))
        self.radii = np.asarray(radii, dtype=float).reshape(-1)
        self.circulations = np.asarray(circulations, dtype=float).reshape(-1)
        if profile not in PROFILES:
            raise ValueError("Unknown blob profile %r" % profile)
        if np.any(self.radii <= 0):
            raise ValueError("Blob radii must be positive.")
        self.profile = profile
        self.dim = 2
        self.domain = domain or Domain.free_space(2)
        if not self.domain.is_periodic:
            reach = self.radii * (1.0 if profile == COMPACT else 9.0)
            center = self.centers.mean(axis=0)
            radius = max(np.linalg.norm(c - center) + r
                         for c, r in zip(self.centers, reach))
            self.support = (center, float(radius))

    def _deltas(self, points):
        points = self.points(points)
        return [(_relative(points, c, self.domain), r, g) for c, r, g
                in zip(self.centers, self.radii, self.circulations)]

    def _profile(self, r2, radius):
        if self.profile == GAUSSIAN:
            value = np.exp(-r2 / (2 * radius ** 2)) / (2 * np.pi * radius ** 2)
            slope = -value / radius ** 2
        else:
            q = np.minimum(r2 / radius ** 2, 1.0)
            value = 4 / (np.pi * radius ** 2) * (1 - q) ** 3
            slope = -24 / (np.pi * radius ** 4) * (1 - q) ** 2
        return value, slope

    def __call__(self, points):
        total = 0.0
        for d, radius, gamma in self._deltas(points):
            value, _ = self._profile(np.sum(d ** 2, axis=-1), radius)
            total = total + gamma * value
        return total

    def gradient(self, points):
        total = 0.0
        for d, radius, gamma in self._deltas(points):
            _, slope = self._profile(np.sum(d ** 2, axis=-1), radius)
            total = total + gamma * slope[:, None] * d
        return total

    def velocity(self, points):
        """Free-space induced velocity, summed exactly per blob."""
        total = 0.0
        for d, radius, gamma in self._deltas(points):
            r2 = np.sum(d ** 2, axis=-1)
            if self.profile == GAUSSIAN:
                h, _ = _gaussian_ratio(r2 / (2 * radius ** 2))
                f = gamma / (4 * np.pi * radius ** 2) * h
            else:
                h, _ = _compact_ratio(r2 / radius ** 2)
                f = gamma / (2 * np.pi * radius ** 2) * h
            total = total + f[:, None] * np.stack([-d[:, 1], d[:, 0]], -1)
        return total

    def total_circulation(self):
        return float(self.circulations.sum())

    def describe(self):
        return {"type": "VortexBlobs", "profile": self.profile,
                "centers": self.centers.tolist(), "radii": self.radii.tolist(),
                "circulations": self.circulations.tolist()}


class PointVortices(VorticityField):
    """
    Point vortices of the given circulations. Pointwise evaluation is
    zero away from the vortices; the velocity they induce is exact.
    """

    def __init__(self, positions, circulations):
        self.positions = np.atleast_2d(np.asarray(positions, dtype=float))
        self.circulations = np.asarray(circulations, dtype=float).reshape(-1)
        self.dim = 2
        self.domain = Domain.free_space(2)
        center = self.positions.mean(axis=0)
        self.support = (center, float(np.max(np.linalg.norm(
            self.positions - center, axis=-1))))

    def __call__(self, points):
        return np.zeros(self.points(points).shape[0])

    def gradient(self, points):
        return np.zeros_like(self.points(points))

    def velocity(self, points):
        points = self.points(points)
        total = np.zeros_like(points)
        for position, gamma in zip(self.positions, self.circulations):
            d = points - position
            r2 = np.sum(d ** 2, axis=-1)
            with np.errstate(divide="ignore", invalid="ignore"):
                f = np.where(r2 > 0, gamma / (2 * np.pi * r2), 0.0)
            total += f[:, None] * np.stack([-d[:, 1], d[:, 0]], axis=-1)
        return total

    def describe(self):
        return {"type": "PointVortices", "positions": self.positions.tolist(),
                "circulations": self.circulations.tolist()}


class PointVortexSum(VelocityField):
    """
    Velocity of a set of 2D vortices with optional blob cores. Without
    cores this is the singular point-vortex field.
    """

    steady = True

    def __init__(self, positions, circulations, core=None, profile=GAUSSIAN):
        self.dim = 2
        self.domain = Domain.free_space(2)
        if core:
            n = np.atleast_2d(positions).shape[0]
            self.source = VortexBlobs(positions, np.full(n, float(core)),
                                      circulations, profile=profile)
        else:
            self.source = PointVortices(positions, circulations)

    def __call__(self, time, points):
        return self.source.velocity(points)

    def vorticity(self, time):
        return self.source

    def describe(self):
        return {"type": "PointVortexSum", "source": self.source.describe()}


CATALOG = {
    "LambOseen": LambOseen,
    "TaylorGreen2D": TaylorGreen2D,
    "ABC": ABC,
    "ConstantStrain": ConstantStrain,
    "PointVortexSum": PointVortexSum,
    "UniformVelocity": UniformVelocity,
    "ZeroVelocity": ZeroVelocity,
    "GaussianBlob": GaussianBlob,
    "GaussianTube3D": GaussianTube3D,
    "FourierMode": FourierMode,
    "LinearVorticity": LinearVorticity,
    "UniformVorticity": UniformVorticity,
    "ZeroVorticity": ZeroVorticity,
    "VortexBlobs": VortexBlobs,
    "PointVortices": PointVortices,
}


def build(name, **params):
    """Instantiate a catalog entry by name."""
    try:
        factory = CATALOG[name]
    except KeyError:
        raise ValueError("Unknown field %r; choose from %s"
                         % (name, ", ".join(sorted(CATALOG))))
    return factory(**params)
