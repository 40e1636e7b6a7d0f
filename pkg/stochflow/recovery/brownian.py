"""
Velocity from vorticity by Brownian averages.

With W_s a Brownian motion at time s and P_s omega(x) = E[omega(x + W_s)]
the heat semigroup, the stream function psi solving -lap psi = omega is
(1/2) int_0^inf P_s omega ds. Gaussian integration by parts gives
grad P_s omega(x) = E[omega(x + W_s) W_s] / s, so

    2D:  u(x) =  int_0^inf E[omega(x + W_s) W_s^perp] / (2 s) ds,
    3D:  u(x) = -int_0^inf E[omega(x + W_s) x W_s] / (2 s) ds,

with W^perp = (W_2, -W_1), matching u = (d2 psi, -d1 psi) and curl u =
omega. The gradient form differentiates P_s omega by central
differences with common random numbers instead.
"""
import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from stochflow.conf import settings
from stochflow.core.estimates import MCEstimate, summarize
from stochflow.core.exceptions import (ConfigurationError, DimensionError,
                                       QuadratureWarning)
from stochflow.fields.base import VorticityField
from stochflow.recovery.quadrature import SQuadrature, length_scale
from stochflow.sde.random import (RandomSource, blocks_needed,
                                  standard_normals)

logger = logging.getLogger(__name__)

KERNEL = "kernel"
GRADFORM = "gradform"


@dataclass(frozen=True)
class RecoveryQuery:
    vorticity: VorticityField
    points: np.ndarray
    n_paths: int
    source: RandomSource
    quadrature: Optional[SQuadrature] = None
    antithetic: bool = False
    domain: Optional[object] = field(default=None, compare=False)

    def __post_init__(self):
        if self.n_paths < 2:
            raise ConfigurationError("n_paths must be at least 2",
                                     field="n_paths", value=self.n_paths)
        if self.antithetic and self.n_paths % 2:
            raise ConfigurationError("antithetic sampling needs an even "
                                     "n_paths", field="n_paths",
                                     value=self.n_paths)
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if points.shape[-1] != self.vorticity.dim:
            raise DimensionError("Target points do not match the field "
                                 "dimension.", dim=self.vorticity.dim)
        object.__setattr__(self, "points", points)
        if self.domain is None:
            object.__setattr__(self, "domain", self.vorticity.domain)
        if self.quadrature is None:
            object.__setattr__(self, "quadrature", SQuadrature.for_field(
                self.vorticity, self.domain))

    @property
    def dim(self):
        return self.vorticity.dim


@dataclass
class RecoveryResult:
    estimate: MCEstimate
    tail: np.ndarray
    method: str
    quadrature: SQuadrature

    @property
    def mean(self):
        return self.estimate.mean

    @property
    def stderr(self):
        return self.estimate.stderr


def _increments(source, node, n_paths, dim, antithetic):
    """Unit normals for quadrature node ``node``, base paths first."""
    n_base = n_paths // 2 if antithetic else n_paths
    offset = node * blocks_needed(n_paths)
    normals = standard_normals(source, n_base, (dim,), block_offset=offset)
    if antithetic:
        normals = np.concatenate([normals, -normals])
    return normals


def _target_chunks(n_targets, n_paths):
    size = max(1, int(settings.SDE_MAX_PATHS_PER_BATCH) // n_paths)
    for start in range(0, n_targets, size):
        yield slice(start, min(start + size, n_targets))


def _evaluate(vorticity, points, shifts, domain):
    """omega at points[t] + shifts[p] as (targets, paths, *components)."""
    moved = points[:, None, :] + shifts[None, :, :]
    flat = moved.reshape(-1, points.shape[-1])
    if domain is not None and domain.is_periodic:
        flat = domain.wrap(flat)
    values = np.asarray(vorticity(flat), dtype=float)
    return values.reshape(moved.shape[:2] + values.shape[1:])


def _perp(vectors):
    return np.stack([vectors[..., 1], -vectors[..., 0]], axis=-1)


def _kernel_samples(vorticity, points, w, s, domain):
    omega = _evaluate(vorticity, points, w, domain)
    if vorticity.dim == 2:
        return omega[..., None] * _perp(w)[None] / (2 * s)
    return -np.cross(omega, np.broadcast_to(w, omega.shape)) / (2 * s)


def _gradform_samples(vorticity, points, w, step, domain):
    dim = vorticity.dim
    derivatives = []
    for axis in range(dim):
        shift = np.zeros(dim)
        shift[axis] = step
        derivatives.append((_evaluate(vorticity, points + shift, w, domain)
                            - _evaluate(vorticity, points - shift, w, domain))
                           / (2 * step))
    # d[j] is d/dx_j of the smoothed field
    d = derivatives
    if dim == 2:
        return 0.5 * np.stack([d[1], -d[0]], axis=-1)
    return 0.5 * np.stack([d[1][..., 2] - d[2][..., 1],
                           d[2][..., 0] - d[0][..., 2],
                           d[0][..., 1] - d[1][..., 0]], axis=-1)


def _recover(query, method):
    quadrature = query.quadrature
    nodes = quadrature.nodes
    weights = quadrature.weights
    n_targets = query.points.shape[0]
    dim = query.dim
    step = settings.RECOVERY_FD_STEP_FACTOR * length_scale(query.vorticity,
                                                           query.domain)

    mean = np.zeros((n_targets, dim))
    variance = np.zeros((n_targets, dim))
    last = np.zeros((n_targets, dim))
    last_error = np.zeros((n_targets, dim))
    excluded = np.zeros(n_targets, dtype=int)
    for node, (s, weight) in enumerate(zip(nodes, weights)):
        w = np.sqrt(s) * _increments(query.source, node, query.n_paths, dim,
                                     query.antithetic)
        for rows in _target_chunks(n_targets, query.n_paths):
            points = query.points[rows]
            if method == KERNEL:
                samples = _kernel_samples(query.vorticity, points, w, s,
                                          query.domain)
            else:
                samples = _gradform_samples(query.vorticity, points, w, step,
                                            query.domain)
            valid = np.all(np.isfinite(samples), axis=-1)
            estimate = summarize(samples, valid, antithetic=query.antithetic)
            mean[rows] += weight * estimate.mean
            variance[rows] += (weight * estimate.stderr) ** 2
            excluded[rows] = np.maximum(excluded[rows], estimate.n_excluded)
            if node == len(nodes) - 1:
                last[rows] = estimate.mean
                last_error[rows] = estimate.stderr

    # only the part of the last node that stands out of the noise counts
    tail = quadrature.tail(np.maximum(
        np.linalg.norm(last, axis=-1)
        - 3 * np.linalg.norm(last_error, axis=-1), 0.0))
    speed = np.linalg.norm(mean, axis=-1)
    tolerance = settings.RECOVERY_TAIL_TOLERANCE
    loose = tail > tolerance * np.maximum(speed, 1e-300)
    if np.any(loose & (tail > 0)):
        message = ("Quadrature tail reaches %.3g of the recovered speed at "
                   "%d target(s); raise RECOVERY_S_MAX_FACTOR."
                   % (float(np.max(tail / np.maximum(speed, 1e-300))),
                      int(np.sum(loose))))
        logger.warning(message)
        warnings.warn(message, QuadratureWarning)

    estimate = MCEstimate(mean=mean, stderr=np.sqrt(variance),
                          n_paths=query.n_paths, n_excluded=excluded)
    return RecoveryResult(estimate=estimate, tail=tail, method=method,
                          quadrature=quadrature)


def recover_velocity_2d(query):
    """Kernel-form estimate of the 2D velocity at the query targets."""
    if query.dim != 2:
        raise DimensionError("recover_velocity_2d needs a 2D field.",
                             dim=query.dim)
    return _recover(query, KERNEL)


def recover_velocity_3d(query):
    """Kernel-form estimate of the 3D velocity at the query targets."""
    if query.dim != 3:
        raise DimensionError("recover_velocity_3d needs a 3D field.",
                             dim=query.dim)
    return _recover(query, KERNEL)


def recover_velocity_gradform(query):
    """
    Gradient-form estimate in either dimension: u = (1/2) int perp_grad
    (2D) or curl (3D) of P_s omega ds, differentiated by central
    differences that share their Brownian samples.
    """
    return _recover(query, GRADFORM)


def recover_velocity(query, method=KERNEL):
    if method == GRADFORM:
        return recover_velocity_gradform(query)
    if query.dim == 2:
        return recover_velocity_2d(query)
    return recover_velocity_3d(query)


def heat_gradient(vorticity, points, s, n_paths, source, antithetic=False,
                  domain=None):
    """
    Bismut estimate of grad P_s omega = E[omega(x + W_s) W_s] / s.
    Returns (targets, dim) for scalar vorticity and (targets, 3, 3) with
    G[i, j] = d_j P_s omega_i for vector vorticity.
    """
    if s <= 0:
        raise ConfigurationError("s must be positive", field="s", value=s)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    domain = domain or vorticity.domain
    w = np.sqrt(s) * _increments(source, 0, n_paths, vorticity.dim,
                                 antithetic)
    omega = _evaluate(vorticity, points, w, domain)
    if omega.ndim == 2:
        samples = omega[..., None] * w[None] / s
    else:
        samples = omega[..., :, None] * w[None, :, None, :] / s
    return summarize(samples, antithetic=antithetic)
