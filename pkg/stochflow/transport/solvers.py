"""
Feynman-Kac estimators for the vorticity equation with a known velocity.

From each target (tau, x) a particle runs backwards in time,

    dX_s = -u(t0 + tau - s, X_s) ds + sqrt(2 nu) dW_s,  X_0 = x,

and the initial vorticity is read off where it lands. In 2D that is
the whole estimator. In 3D the vorticity is also stretched by the
deformation M_s of the flow along the path, dM/ds = M grad u, M_0 = I,
and the estimate is E[M_tau omega_0(X_tau)]. The engine integrates the
transpose of M so that the exponential midpoint step keeps det M = 1
for a divergence-free velocity.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from stochflow.core.estimates import MCEstimate, summarize
from stochflow.core.exceptions import ConfigurationError, DimensionError
from stochflow.fields.base import VelocityField, VorticityField
from stochflow.sde.engine import (ItoSDESpec, TimeGrid, simulate_ito,
                                  simulate_targets)
from stochflow.sde.random import RandomSource

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransportQuery:
    """
    Estimate the vorticity at time ``start_time + tau`` from the vorticity
    ``initial`` at ``start_time``, transported by ``velocity`` at
    viscosity ``nu``.
    """

    tau: float
    points: np.ndarray
    nu: float
    velocity: VelocityField
    initial: VorticityField
    n_paths: int
    source: RandomSource
    dt: Optional[float] = None
    antithetic: bool = False
    start_time: float = 0.0
    keep_samples: bool = False
    domain: Optional[object] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigurationError("tau must be positive", field="tau",
                                     value=self.tau)
        if not self.nu > 0:
            raise ConfigurationError("nu must be positive", field="nu",
                                     value=self.nu)
        if self.n_paths < 2:
            raise ConfigurationError("n_paths must be at least 2",
                                     field="n_paths", value=self.n_paths)
        if self.velocity.dim != self.initial.dim:
            raise DimensionError("Velocity and vorticity dimensions differ.")
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if points.shape[-1] != self.velocity.dim:
            raise DimensionError("Target points do not match the field "
                                 "dimension.")
        object.__setattr__(self, "points", points)
        if self.domain is None:
            domain = self.velocity.domain
            if domain is None or not domain.is_periodic:
                domain = self.initial.domain or domain
            object.__setattr__(self, "domain", domain)

    @property
    def dim(self):
        return self.velocity.dim

    @property
    def grid(self):
        return TimeGrid.over(self.tau, self.dt)


@dataclass
class TransportResult:
    estimate: MCEstimate
    grid: TimeGrid
    samples: Optional[np.ndarray] = None
    valid: Optional[np.ndarray] = None

    @property
    def mean(self):
        return self.estimate.mean

    @property
    def stderr(self):
        return self.estimate.stderr


def backward_spec(velocity, nu, horizon, start_time=0.0, domain=None):
    """The backward particle SDE over [0, horizon] ending at start_time."""
    end = start_time + horizon

    def drift(s, points):
        return -np.asarray(velocity(end - s, points))

    return ItoSDESpec(drift=drift, sigma=float(np.sqrt(2 * nu)),
                      dim=velocity.dim, domain=_periodic(domain))


def backward_deformation(velocity, horizon, start_time=0.0):
    """
    Generator A for the engine's dJ/ds = -A J such that J is the
    transposed deformation: A = -(grad u)^T along the backward path.
    """
    end = start_time + horizon

    def generator(s, points):
        return -np.swapaxes(velocity.gradient(end - s, points), -1, -2)

    return generator


def _periodic(domain):
    if domain is not None and domain.is_periodic:
        return domain
    return None


def _endpoint_values(field, endpoints, domain):
    shape = endpoints.shape
    flat = endpoints.reshape(-1, shape[-1])
    if domain is not None:
        flat = domain.wrap(flat)
    values = np.asarray(field(flat))
    return values.reshape(shape[:-1] + values.shape[1:])


def _transport(query, stretch, workers=None):
    spec = backward_spec(query.velocity, query.nu, query.tau,
                         query.start_time, query.domain)
    generator = None
    if stretch:
        generator = backward_deformation(query.velocity, query.tau,
                                         query.start_time)
    grid = query.grid
    n_targets = query.points.shape[0]
    tail = () if query.dim == 2 and not stretch else (query.dim,)
    samples = np.empty((n_targets, query.n_paths) + tail)
    valid = np.empty((n_targets, query.n_paths), dtype=bool)

    for rows, endpoints, jacobians, ok in simulate_targets(
            spec, query.points, grid, query.source, query.n_paths,
            antithetic=query.antithetic, grad_drift=generator,
            workers=workers):
        values = _endpoint_values(query.initial, endpoints,
                                  _periodic(query.domain))
        if stretch:
            # M omega_0 with M the transpose of the engine's matrix
            values = np.einsum("tpji,tpj->tpi", jacobians, values)
        samples[rows] = values
        valid[rows] = ok

    estimate = summarize(samples, valid, antithetic=query.antithetic)
    if np.any(estimate.n_excluded):
        logger.warning("vorticity transport excluded up to %d of %d paths "
                       "per target", int(np.max(estimate.n_excluded)),
                       query.n_paths)
    result = TransportResult(estimate=estimate, grid=grid)
    if query.keep_samples:
        result.samples = samples
        result.valid = valid
    return result


def solve_vorticity_2d(query, workers=None):
    """Scalar Feynman-Kac estimate of the 2D vorticity at the targets."""
    if query.dim != 2:
        raise DimensionError("solve_vorticity_2d needs a 2D query.",
                             dim=query.dim)
    return _transport(query, stretch=False, workers=workers)


def solve_vorticity_3d(query, workers=None):
    """
    Stretched Feynman-Kac estimate of the 3D vorticity vector at the
    targets; stderr is per component.
    """
    if query.dim != 3:
        raise DimensionError("solve_vorticity_3d needs a 3D query.",
                             dim=query.dim)
    return _transport(query, stretch=True, workers=workers)


def trace_lagrangian(velocity, start, horizon, nu, source, n_paths, dt=None,
                     record=True, antithetic=False, start_time=0.0,
                     domain=None, workers=None, reverse=True):
    """
    Forward random Lagrangian particles
    dx = -u(t, x) dt + sqrt(2 nu) dW from ``start`` over ``horizon``.
    ``nu`` may be zero for deterministic tracing.

    The drift -u is the sign the vorticity representation and the
    driftless comparison are written in. ``reverse=False`` drifts along
    +u instead, which is how marker particles visibly move with the
    fluid.
    """
    if nu < 0:
        raise ConfigurationError("nu must be non-negative", field="nu",
                                 value=nu)
    sign = -1.0 if reverse else 1.0
    grid = TimeGrid.over(horizon, dt, t0=start_time)
    spec = ItoSDESpec(drift=lambda t, x: sign * np.asarray(velocity(t, x)),
                      sigma=float(np.sqrt(2 * nu)), dim=velocity.dim,
                      domain=_periodic(domain or velocity.domain))
    return simulate_ito(spec, start, grid, source, n_paths, record=record,
                        antithetic=antithetic, workers=workers)
