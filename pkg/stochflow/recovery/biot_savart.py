"""
Deterministic Biot-Savart velocity, the oracle for the Brownian
estimators and the velocity update of the grid-based runs.

In free space the kernel integral is taken in polar (spherical)
coordinates centred on each target, where the Jacobian cancels the
kernel singularity:

    2D:  u(x) = (1 / 2 pi) int int (sin t, -cos t) omega(x + r e_t) dr dt
    3D:  u(x) = -(1 / 4 pi) int int omega(x + r n) x n dr dn

Radii use Gauss-Legendre nodes over the part of the ray that can meet
the vorticity support; targets outside the support only integrate over
the cone of directions that hits it. Point vortices are summed exactly.
On the torus the vorticity is sampled on a grid, inverted spectrally
and the velocity is read off with the exact trigonometric interpolant.
"""
import logging

import numpy as np
from scipy import signal, special

from stochflow.conf import settings
from stochflow.core.exceptions import DimensionError, ResolutionError
from stochflow.fields.base import LinearCombination
from stochflow.fields.catalog import PointVortices
from stochflow.fields.grid import GridField
from stochflow.fields.operators import spectral_biot_savart, wavenumbers

logger = logging.getLogger(__name__)

POINT_CHUNK = 256


def biot_savart_direct(vorticity, points, domain=None, shape=None):
    """
    Velocity induced by ``vorticity`` at ``points``. ``shape`` sets the
    sampling grid of the periodic route.
    """
    domain = domain or vorticity.domain
    points = vorticity.points(points)
    if isinstance(vorticity, PointVortices):
        return vorticity.velocity(points)
    if isinstance(vorticity, LinearCombination) and any(
            isinstance(f, PointVortices) for _, f in vorticity.terms):
        return sum(w * biot_savart_direct(f, points, domain, shape)
                   for w, f in vorticity.terms)
    if domain is not None and domain.is_periodic:
        return _spectral(vorticity, points, domain, shape)
    if vorticity.support is None:
        raise ResolutionError("Free-space Biot-Savart needs vorticity with "
                              "a bounded support.",
                              field=type(vorticity).__name__)
    if vorticity.dim == 2:
        return _polar_2d(vorticity, points)
    return _spherical_3d(vorticity, points)


def _radial(distance, radius, n_nodes):
    """Gauss-Legendre nodes and weights on the ray segment near the support."""
    x, w = special.roots_legendre(n_nodes)
    low = max(0.0, distance - radius)
    high = distance + radius
    half = 0.5 * (high - low)
    return low + half * (x + 1), half * w


def _polar_2d(vorticity, points):
    center, radius = vorticity.support
    n_r = int(settings.RECOVERY_RADIAL_NODES)
    n_t = int(settings.RECOVERY_ANGULAR_NODES)
    out = np.zeros_like(points)
    for index, x in enumerate(points):
        offset = np.asarray(center) - x
        distance = float(np.linalg.norm(offset))
        r, wr = _radial(distance, radius, n_r)
        if distance > radius:
            # cone of directions that meets the support
            spread = np.arcsin(radius / distance)
            heading = np.arctan2(offset[1], offset[0])
            g, wg = special.roots_legendre(n_t)
            t = heading + spread * g
            wt = spread * wg
        else:
            t = 2 * np.pi * np.arange(n_t) / n_t
            wt = np.full(n_t, 2 * np.pi / n_t)
        directions = np.stack([np.cos(t), np.sin(t)], axis=-1)
        samples = x + r[:, None, None] * directions[None]
        omega = np.asarray(vorticity(samples.reshape(-1, 2))).reshape(
            r.size, t.size)
        weighted = (wr[:, None] * omega * wt[None]).sum(axis=0)
        out[index] = np.array([np.sin(t) @ weighted,
                               -np.cos(t) @ weighted]) / (2 * np.pi)
    return out


def _frame(axis):
    axis = axis / np.linalg.norm(axis)
    helper = np.eye(3)[int(np.argmin(np.abs(axis)))]
    first = np.cross(axis, helper)
    first /= np.linalg.norm(first)
    return first, np.cross(axis, first), axis


def _spherical_3d(vorticity, points):
    center, radius = vorticity.support
    n_r = int(settings.RECOVERY_RADIAL_NODES)
    n_phi = int(settings.RECOVERY_ANGULAR_NODES)
    n_mu = max(2, n_phi // 2)
    g, wg = special.roots_legendre(n_mu)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    w_phi = 2 * np.pi / n_phi
    out = np.zeros_like(points)
    for index, x in enumerate(points):
        offset = np.asarray(center) - x
        distance = float(np.linalg.norm(offset))
        r, wr = _radial(distance, radius, n_r)
        if distance > radius:
            lowest = np.sqrt(1 - (radius / distance) ** 2)
            first, second, axis = _frame(offset)
        else:
            lowest = -1.0
            first, second, axis = np.eye(3)
        half = 0.5 * (1 - lowest)
        mu = lowest + half * (g + 1)
        w_mu = half * wg
        sine = np.sqrt(1 - mu ** 2)
        directions = (sine[:, None, None] * (np.cos(phi)[None, :, None] * first
                                             + np.sin(phi)[None, :, None]
                                             * second)
                      + mu[:, None, None] * axis).reshape(-1, 3)
        weights = (w_mu[:, None] * w_phi * np.ones(n_phi)).reshape(-1)
        samples = x + r[:, None, None] * directions[None]
        omega = np.asarray(vorticity(samples.reshape(-1, 3))).reshape(
            r.size, directions.shape[0], 3)
        integrand = np.cross(omega, directions[None])
        total = np.einsum("r,d,rdi->i", wr, weights, integrand)
        out[index] = -total / (4 * np.pi)
    return out


def _grid_shape(domain, shape):
    if shape is None:
        n = int(settings.RECOVERY_SPECTRAL_SHAPE)
        if domain.dim == 3:
            n = max(8, n // 2)
        shape = (n,) * domain.dim
    return tuple(int(s) for s in shape)


def fourier_interpolate(values, period, points):
    """
    Evaluate the trigonometric interpolant of periodic grid ``values``
    (grid axes first, optional trailing component axis) at ``points``.
    Nyquist modes are dropped so the interpolant is real.
    """
    dim = len(period)
    shape = values.shape[:dim]
    grid_axes = tuple(range(dim))
    transform = np.fft.fftn(values, axes=grid_axes) / np.prod(shape)
    for axis, n in enumerate(shape):
        if n % 2 == 0:
            index = [slice(None)] * transform.ndim
            index[axis] = n // 2
            transform[tuple(index)] = 0.0
    k = np.stack([kk.ravel() for kk in wavenumbers(shape, period)], axis=-1)
    coefficients = transform.reshape(k.shape[0], -1)
    out = np.empty((points.shape[0], coefficients.shape[1]))
    for start in range(0, points.shape[0], POINT_CHUNK):
        chunk = points[start:start + POINT_CHUNK]
        phases = np.exp(1j * (chunk @ k.T))
        out[start:start + POINT_CHUNK] = np.real(phases @ coefficients)
    return out.reshape((points.shape[0],) + values.shape[dim:])


def _spectral(vorticity, points, domain, shape):
    shape = _grid_shape(domain, shape)
    grid = GridField.sample(vorticity, domain, shape)
    velocity = spectral_biot_savart(grid.values, domain.period)
    return fourier_interpolate(velocity, domain.period, points)


def _free_space_kernel(spacing, shape):
    """Biot-Savart kernel on grid offsets, zero at the origin."""
    axes = [h * np.arange(-(n - 1), n) for h, n in zip(spacing, shape)]
    z = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    r2 = np.sum(z ** 2, axis=-1)
    dim = len(shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        if dim == 2:
            scale = np.where(r2 > 0, 1 / (2 * np.pi * r2), 0.0)
            return np.stack([-z[..., 1], z[..., 0]], axis=-1) * scale[..., None]
        scale = np.where(r2 > 0, 1 / (4 * np.pi * r2 ** 1.5), 0.0)
        return z * scale[..., None]


def biot_savart_grid(grid):
    """
    Velocity on the nodes of a vorticity ``GridField``: spectral on the
    torus, a zero-padded FFT convolution with the sampled kernel in free
    space (the vorticity is taken to vanish off the box).
    """
    domain = grid.domain
    if domain.is_periodic:
        values = spectral_biot_savart(grid.values, domain.period)
        return GridField(values, domain, order=grid.order)
    dim = domain.dim
    if (dim == 2) != (grid.components is None):
        raise DimensionError("Grid vorticity has the wrong number of "
                             "components for a %dD domain." % dim)
    kernel = _free_space_kernel(grid.spacing, grid.shape)
    cell = float(np.prod(grid.spacing))
    if dim == 2:
        values = np.stack([signal.fftconvolve(grid.values, kernel[..., c],
                                              mode="same")
                           for c in range(2)], axis=-1)
    else:
        # u_i = eps_ijk (omega_j * K_k)
        conv = {(j, k): signal.fftconvolve(grid.values[..., j],
                                           kernel[..., k], mode="same")
                for j in range(3) for k in range(3) if j != k}
        values = np.stack([conv[(1, 2)] - conv[(2, 1)],
                           conv[(2, 0)] - conv[(0, 2)],
                           conv[(0, 1)] - conv[(1, 0)]], axis=-1)
    return GridField(values * cell, domain, order=grid.order)
