import logging
import warnings
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from stochflow.conf import settings
from stochflow.core.exceptions import (ConfigurationError, DimensionError,
                                       ResolutionWarning)
from stochflow.fields.catalog import GAUSSIAN, PROFILES, VortexBlobs
from stochflow.fields.grid import (GridField, GridVelocityField,
                                  GridVorticityField)
from stochflow.fields.operators import curl_of_gradient
from stochflow.recovery.biot_savart import biot_savart_grid
from stochflow.recovery.brownian import RecoveryQuery, recover_velocity
from stochflow.sde.random import RandomSource

logger = logging.getLogger(__name__)

AUTO = "auto"
GRID = "grid"
BROWNIAN = "brownian"
VELOCITY_METHODS = (AUTO, GRID, BROWNIAN)


@dataclass(frozen=True)
class VortexBlobInit:
    """
    Many-vortices initial data: blobs of the given centers, radii and
    circulations, each with the ``profile`` of ``VortexBlobs``.
    """

    centers: Tuple[Tuple[float, ...], ...]
    radii: Tuple[float, ...]
    circulations: Tuple[float, ...]
    profile: str = GAUSSIAN

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        if centers.shape[-1] != 2:
            raise DimensionError("Vortex blobs are two dimensional.",
                                 dim=centers.shape[-1])
        n = centers.shape[0]
        if len(self.radii) != n or len(self.circulations) != n:
            raise ConfigurationError("Each blob needs a center, a radius and "
                                     "a circulation.", field="blobs")
        if min(self.radii) <= 0:
            raise ConfigurationError("Blob radii must be positive.",
                                     field="radii", value=list(self.radii))
        if self.profile not in PROFILES:
            raise ConfigurationError("Unknown blob profile %r" % self.profile,
                                     field="profile")

    @property
    def total_circulation(self):
        return float(np.sum(self.circulations))

    def vorticity(self, domain):
        if domain.is_periodic:
            scale = float(np.sum(np.abs(self.circulations))) or 1.0
            if abs(self.total_circulation) > 1e-12 * scale:
                raise ConfigurationError(
                    "Blob circulations must sum to zero on a torus.",
                    field="circulations", value=self.total_circulation)
        return VortexBlobs(self.centers, self.radii, self.circulations,
                           profile=self.profile, domain=domain)

    def as_dict(self):
        return {"centers": [list(c) for c in self.centers],
                "radii": list(self.radii),
                "circulations": list(self.circulations),
                "profile": self.profile}


@dataclass(frozen=True)
class MCParams:
    """
    Monte Carlo settings of a Navier-Stokes run. ``recovery_paths``
    defaults to ``n_paths`` and is only used by Brownian velocity
    recovery.
    """

    n_paths: int
    source: RandomSource
    dt: Optional[float] = None
    antithetic: bool = False
    picard_iterations: Optional[int] = None
    velocity_method: str = AUTO
    recovery_paths: Optional[int] = None
    workers: Optional[int] = None

    def __post_init__(self):
        if self.n_paths < 2:
            raise ConfigurationError("n_paths must be at least 2",
                                     field="n_paths", value=self.n_paths)
        if self.velocity_method not in VELOCITY_METHODS:
            raise ConfigurationError(
                "Unknown velocity method %r" % self.velocity_method,
                field="velocity_method")

    def method_for(self, domain):
        if self.velocity_method != AUTO:
            return self.velocity_method
        return GRID if domain.is_periodic else BROWNIAN


@dataclass(frozen=True)
class Diagnostics:
    time: float
    kinetic_energy: float
    enstrophy: float
    max_vorticity: float
    circulation: Tuple[float, ...]
    mc_stderr_max: float = 0.0
    mc_stderr_rms: float = 0.0
    enstrophy_bias: float = 0.0
    curl_residual: float = 0.0
    divergence_residual: float = 0.0
    picard_iterations: int = 0
    n_excluded: int = 0

    def as_dict(self):
        data = asdict(self)
        data["circulation"] = list(self.circulation)
        return data


def diagnose(time, velocity, vorticity, stderr=None, picard_iterations=0,
             n_excluded=0):
    """Integral and consistency diagnostics of a grid state."""
    dim = vorticity.dim
    cell = float(np.prod(vorticity.spacing))
    grid_axes = tuple(range(dim))
    u = velocity.values
    w = vorticity.values
    w2 = w ** 2 if dim == 2 else np.sum(w ** 2, axis=-1)
    circulation = np.atleast_1d(w.sum(axis=grid_axes) * cell)

    gradient = velocity.derivatives()
    curl = curl_of_gradient(gradient)
    peak = float(np.sqrt(np.max(w2))) if w2.size else 0.0
    mismatch = np.abs(curl - w)
    curl_residual = float(np.max(mismatch)) / peak if peak > 0 else float(
        np.max(mismatch))
    divergence = np.trace(gradient, axis1=-2, axis2=-1)

    if stderr is None:
        se = np.zeros_like(w)
    else:
        se = stderr.values
    se2 = se ** 2 if dim == 2 else np.sum(se ** 2, axis=-1)
    return Diagnostics(
        time=float(time),
        kinetic_energy=0.5 * float(np.sum(u ** 2)) * cell,
        enstrophy=0.5 * float(np.sum(w2)) * cell,
        max_vorticity=peak,
        circulation=tuple(float(c) for c in circulation),
        mc_stderr_max=float(np.max(se)) if se.size else 0.0,
        mc_stderr_rms=float(np.sqrt(np.mean(se2))),
        enstrophy_bias=0.5 * float(np.sum(se2)) * cell,
        curl_residual=curl_residual,
        divergence_residual=float(np.max(np.abs(divergence))),
        picard_iterations=int(picard_iterations),
        n_excluded=int(n_excluded),
    )


def unresolved_fraction(grid):
    """
    Share of the squared vorticity carried by the outer third of the grid
    wavenumbers along any axis.
    """
    dim = grid.dim
    values = grid.values.reshape(grid.shape + (-1,))
    power = np.sum(np.abs(np.fft.fftn(values, axes=tuple(range(dim)))) ** 2,
                   axis=-1)
    outer = np.zeros(grid.shape, dtype=bool)
    for axis, n in enumerate(grid.shape):
        index = np.abs(np.fft.fftfreq(n) * n)
        outer |= (index > n / 3.0).reshape(
            [-1 if a == axis else 1 for a in range(dim)])
    total = float(np.sum(power))
    return float(np.sum(power[outer])) / total if total > 0 else 0.0


def check_resolution(grid, time):
    fraction = unresolved_fraction(grid)
    if fraction > settings.NS_RESOLUTION_TOLERANCE:
        message = ("Vorticity at t=%.4g keeps %.2g of its energy in the outer "
                   "third of the grid spectrum; refine the grid." % (time,
                                                                   fraction))
        logger.warning(message)
        warnings.warn(message, ResolutionWarning)
    return fraction


def velocity_from_vorticity(grid, mc=None, source=None):
    """
    Velocity on the nodes of a vorticity grid: Biot-Savart on the grid,
    or Brownian recovery at every node.
    """
    method = mc.method_for(grid.domain) if mc is not None else GRID
    if method == GRID:
        return biot_savart_grid(grid)
    if mc is None or source is None:
        raise ConfigurationError("Brownian velocity recovery needs Monte "
                                 "Carlo parameters.", field="velocity_method")
    query = RecoveryQuery(GridVorticityField(grid), grid.nodes(),
                          mc.recovery_paths or mc.n_paths, source,
                          antithetic=mc.antithetic, domain=grid.domain)
    result = recover_velocity(query)
    values = result.mean.reshape(grid.shape + (grid.dim,))
    return GridField(values, grid.domain, order=grid.order)


@dataclass(frozen=True)
class NSState:
    """
    Snapshot of a run: vorticity and velocity sampled on the same grid,
    the pointwise standard error of the vorticity estimate, and the
    diagnostics of the step that produced it.
    """

    time: float
    nu: float
    velocity_grid: GridField
    vorticity_grid: GridField
    diagnostics: Diagnostics
    stderr_grid: Optional[GridField] = None
    step_index: int = 0

    @property
    def domain(self):
        return self.vorticity_grid.domain

    @property
    def dim(self):
        return self.vorticity_grid.dim

    @property
    def shape(self):
        return self.vorticity_grid.shape

    @property
    def velocity(self):
        return GridVelocityField(self.velocity_grid, times=[self.time])

    @property
    def vorticity(self):
        return GridVorticityField(self.vorticity_grid)

    @classmethod
    def from_vorticity(cls, vorticity, nu, domain, shape, mc=None, time=0.0):
        if not nu > 0:
            raise ConfigurationError("nu must be positive", field="nu",
                                     value=nu)
        if vorticity.dim != domain.dim:
            raise DimensionError("Initial vorticity does not match the "
                                 "domain dimension.", dim=domain.dim)
        grid = GridField.sample(vorticity, domain, shape)
        source = mc.source.spawn(mc.source.stream_id) if mc else None
        velocity = velocity_from_vorticity(grid, mc, source)
        return cls(time=float(time), nu=float(nu), velocity_grid=velocity,
                   vorticity_grid=grid,
                   diagnostics=diagnose(time, velocity, grid))
