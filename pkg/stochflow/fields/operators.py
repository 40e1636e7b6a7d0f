"""
Vector calculus on fields, plus the spectral and finite-difference
helpers grid fields and the reference solvers are built on.

Conventions: curl in 2D is d1 u2 - d2 u1, ``perp_grad(f) = (d2 f,
-d1 f)``, and the Laplacian is the analyst's sum of second
derivatives.
"""
import numpy as np

from stochflow.core.exceptions import DimensionError, UnsupportedDomainError
from stochflow.fields.base import (ScalarField, VorticityField, as_points,
                                   central_difference)


def curl_of_gradient(gradient):
    """Curl from a stack of deformation tensors G[..., i, j] = d_j u_i."""
    g = np.asarray(gradient)
    if g.shape[-1] == 2:
        return g[..., 1, 0] - g[..., 0, 1]
    return np.stack([g[..., 2, 1] - g[..., 1, 2],
                     g[..., 0, 2] - g[..., 2, 0],
                     g[..., 1, 0] - g[..., 0, 1]], axis=-1)


def curl(velocity, time, points):
    points = as_points(points, velocity.dim)
    return curl_of_gradient(velocity.gradient(time, points))


def perp_grad(f, points):
    """
    (d2 f, -d1 f) for a 2D scalar field. ``f`` is a ScalarField or any
    callable on (N, 2) points; plain callables are differentiated by
    central differences.
    """
    dim = getattr(f, "dim", None)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if dim == 3 or points.shape[-1] != 2:
        raise DimensionError("perp_grad is only defined in 2D.")
    if isinstance(f, (ScalarField, VorticityField)):
        grad = f.gradient(points)
    else:
        grad = central_difference(f, points)
    return np.stack([grad[:, 1], -grad[:, 0]], axis=-1)


def divergence(field, points, time=0.0):
    """
    Trace of the gradient. Velocity fields are evaluated at ``time``;
    vorticity fields (3D) are time independent.
    """
    if isinstance(field, VorticityField):
        if field.dim == 2:
            raise DimensionError("A 2D vorticity is a scalar and has no "
                                 "divergence.")
        gradient = field.gradient(as_points(points, field.dim))
    else:
        gradient = field.gradient(time, as_points(points, field.dim))
    return np.trace(gradient, axis1=-2, axis2=-1)


# Spectral helpers on periodic grids.

def wavenumbers(shape, period):
    """Angular wavenumber meshes, one array of ``shape`` per axis."""
    ks = [2 * np.pi * np.fft.fftfreq(n, d=p / n)
          for n, p in zip(shape, period)]
    return np.meshgrid(*ks, indexing="ij")


def spectral_derivative(values, axis, period):
    """d/dx_axis of a real periodic array by FFT along the grid axes."""
    dim = len(period)
    grid_axes = tuple(range(dim))
    shape = values.shape[:dim]
    k = wavenumbers(shape, period)[axis]
    if values.ndim > dim:
        k = k.reshape(k.shape + (1,) * (values.ndim - dim))
    transform = np.fft.fftn(values, axes=grid_axes)
    n = shape[axis]
    if n % 2 == 0:
        # The Nyquist mode has no well defined derivative for real data.
        index = [slice(None)] * values.ndim
        index[axis] = n // 2
        transform[tuple(index)] = 0.0
    return np.real(np.fft.ifftn(1j * k * transform, axes=grid_axes))


def spectral_gradient(values, period):
    """Stack of derivatives along a trailing axis."""
    return np.stack([spectral_derivative(values, axis, period)
                     for axis in range(len(period))], axis=-1)


def fd_gradient(values, spacing):
    """Second-order finite-difference derivatives on a box grid."""
    dim = len(spacing)
    return np.stack([np.gradient(values, spacing[axis], axis=axis,
                                 edge_order=2)
                     for axis in range(dim)], axis=-1)


def spectral_biot_savart(vorticity, period):
    """
    Velocity on a periodic grid from its vorticity: solve -lap psi =
    omega with the mean dropped, then u = perp_grad(psi) in 2D or
    u = curl(psi) in 3D. ``vorticity`` has the grid shape in 2D and a
    trailing axis of 3 in 3D.
    """
    dim = len(period)
    grid_axes = tuple(range(dim))
    shape = vorticity.shape[:dim]
    k = wavenumbers(shape, period)
    k_squared = sum(kk ** 2 for kk in k)
    k_squared[(0,) * dim] = 1.0
    if dim == 2:
        psi = np.fft.fftn(vorticity, axes=grid_axes) / k_squared
        psi[0, 0] = 0.0
        transform = np.stack([1j * k[1] * psi, -1j * k[0] * psi], axis=-1)
    else:
        psi = np.fft.fftn(vorticity, axes=grid_axes) / k_squared[..., None]
        psi[0, 0, 0] = 0.0
        kv = np.stack(k, axis=-1)
        transform = 1j * np.cross(kv, psi)
    return np.real(np.fft.ifftn(transform, axes=grid_axes))


def project_div_free(grid_velocity):
    """
    Leray projection of a periodic grid velocity onto divergence-free
    fields, mode by mode: u_k - k (k . u_k) / |k|^2. The mean flow is
    left untouched.
    """
    from stochflow.fields.grid import GridField, GridVelocityField

    if isinstance(grid_velocity, GridVelocityField):
        return GridVelocityField(
            [project_div_free(s) for s in grid_velocity.slices],
            times=grid_velocity.times)
    field = grid_velocity
    if not field.domain.is_periodic:
        raise UnsupportedDomainError(
            "Divergence-free projection needs a periodic domain.",
            kind=field.domain.kind)
    dim = field.domain.dim
    grid_axes = tuple(range(dim))
    k = np.stack(wavenumbers(field.shape, field.domain.period), axis=-1)
    transform = np.fft.fftn(field.values, axes=grid_axes)
    k_squared = np.sum(k ** 2, axis=-1)
    k_squared[(0,) * dim] = 1.0
    along = np.sum(k * transform, axis=-1) / k_squared
    projected = transform - k * along[..., None]
    values = np.real(np.fft.ifftn(projected, axes=grid_axes))
    return GridField(values, field.domain, order=field.order)
