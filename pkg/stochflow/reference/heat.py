import numpy as np

from stochflow.core.exceptions import UnsupportedDomainError
from stochflow.fields.grid import GridField
from stochflow.fields.operators import wavenumbers


def heat_solve(grid, nu, time):
    """
    Exact heat-equation evolution of a periodic grid field: every
    Fourier mode is damped by exp(-nu |k|^2 time).
    """
    if not grid.domain.is_periodic:
        raise UnsupportedDomainError("The spectral heat solve needs a torus.",
                                     kind=grid.domain.kind)
    dim = grid.dim
    grid_axes = tuple(range(dim))
    k_squared = sum(k ** 2 for k in wavenumbers(grid.shape,
                                                grid.domain.period))
    damping = np.exp(-nu * k_squared * time)
    if grid.values.ndim > dim:
        damping = damping.reshape(damping.shape
                                  + (1,) * (grid.values.ndim - dim))
    transform = np.fft.fftn(grid.values, axes=grid_axes) * damping
    values = np.real(np.fft.ifftn(transform, axes=grid_axes))
    return GridField(values, grid.domain, order=grid.order)
