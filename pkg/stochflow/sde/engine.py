"""
Path integrators for the Ito and Stratonovich equations and the
Jacobian (derived process) that rides along each path.

All integrators work on blocks of paths. A block draws its increments
from its own counter-based stream, so blocks can be integrated on any
number of worker threads and written back in block order without
changing a single bit of the result.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.linalg import expm

from stochflow.conf import settings
from stochflow.core.exceptions import ConfigurationError, InvalidPathsError
from stochflow.sde.random import RandomSource, WienerIncrements, path_blocks

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    t1: float
    n_steps: int

    def __post_init__(self):
        if int(self.n_steps) < 1:
            raise ConfigurationError("A time grid needs at least one step.",
                                     field="n_steps", value=self.n_steps)
        if not self.t1 > self.t0:
            raise ConfigurationError("A time grid needs t1 > t0 (dt > 0).",
                                     field="horizon",
                                     value=self.t1 - self.t0)

    @property
    def dt(self):
        return (self.t1 - self.t0) / self.n_steps

    @classmethod
    def over(cls, horizon, dt=None, t0=0.0):
        """The uniform grid on [t0, t0 + horizon] with step at most ``dt``."""
        dt = dt or settings.SDE_DEFAULT_DT
        n_steps = max(1, int(np.ceil(horizon / dt - 1e-9)))
        return cls(t0=float(t0), t1=float(t0) + float(horizon),
                   n_steps=n_steps)

    def time(self, k):
        if k == self.n_steps:
            return self.t1
        return self.t0 + k * self.dt

    def times(self):
        times = self.t0 + self.dt * np.arange(self.n_steps + 1)
        times[-1] = self.t1
        return times

    def as_dict(self):
        return {"t0": self.t0, "t1": self.t1, "n_steps": self.n_steps,
                "dt": self.dt}


@dataclass(frozen=True)
class ItoSDESpec:
    """
    dx = drift(t, x) dt + sigma * diffusion dW.

    ``drift`` maps a time and an (N, dim) array of points to an (N, dim)
    array. ``diffusion`` is a constant (dim, m) matrix, the identity
    when omitted. On a periodic ``domain`` the drift only ever sees
    wrapped points; stored positions stay unwrapped.
    """

    drift: Callable
    sigma: float
    dim: int
    diffusion: Optional[np.ndarray] = None
    domain: Optional[object] = None

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("The noise amplitude sigma must be >= 0.")
        if self.dim not in (2, 3):
            raise ValueError("Only dimensions 2 and 3 are supported.")
        if self.diffusion is not None:
            diffusion = np.asarray(self.diffusion, dtype=float)
            if diffusion.ndim != 2 or diffusion.shape[0] != self.dim:
                raise ValueError("diffusion must be a (dim, m) matrix.")

    @property
    def noise_dim(self):
        if self.diffusion is None:
            return self.dim
        return np.asarray(self.diffusion).shape[1]

    def noise(self, increments):
        if self.diffusion is None:
            return self.sigma * increments
        return self.sigma * increments @ np.asarray(self.diffusion, float).T


@dataclass(frozen=True)
class PathEnsemble:
    """
    ``positions`` has shape (n_paths, n_steps + 1, dim) when the full
    history is recorded and (n_paths, 2, dim) when only start and end
    points are kept. ``jacobians`` follows the same layout with (dim,
    dim) matrices. With ``antithetic`` the second half of the paths
    mirrors the increments of the first half.
    """

    positions: np.ndarray
    grid: TimeGrid
    source: RandomSource
    valid: np.ndarray
    jacobians: Optional[np.ndarray] = None
    recorded: bool = True
    antithetic: bool = False
    domain: Optional[object] = field(default=None, compare=False)

    @property
    def n_paths(self):
        return self.positions.shape[0]

    @property
    def dim(self):
        return self.positions.shape[-1]

    @property
    def n_excluded(self):
        return int(self.n_paths - np.count_nonzero(self.valid))

    @property
    def start(self):
        return self.positions[:, 0]

    @property
    def endpoints(self):
        return self.positions[:, -1]

    @property
    def final_jacobians(self):
        if self.jacobians is None:
            return None
        return self.jacobians[:, -1]

    def wrapped_endpoints(self):
        if self.domain is None:
            return self.endpoints
        return self.domain.wrap(self.endpoints)


def _wrap(domain, points):
    if domain is None:
        return points
    return domain.wrap(points)


def _starts(start, n_paths, dim):
    start = np.asarray(start, dtype=float)
    if start.ndim == 1:
        if start.shape[0] != dim:
            raise ValueError("Start point has dimension %d, expected %d."
                             % (start.shape[0], dim))
        return np.broadcast_to(start, (n_paths, dim)).copy()
    if start.shape != (n_paths, dim):
        raise ValueError("Field mode needs one start point per path: got "
                         "%s for %d paths." % (start.shape, n_paths))
    return start.copy()


def _run_blocks(jobs, workers):
    """Run block jobs, returning results in submission order."""
    workers = int(workers or settings.SDE_WORKERS)
    if workers <= 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: job(), jobs))


def exponential_midpoint_step(jacobians, generator, dt, overflow=None):
    """
    One step of dJ/ds = -A J as J <- exp(-dt A) J, with ``generator``
    the (N, n, n) array of A sampled at the step midpoint. Returns the
    new matrices and a mask of paths that stayed finite and below the
    overflow norm; failing paths keep their previous matrix.
    """
    overflow = overflow or settings.SDE_JACOBIAN_OVERFLOW
    generator = np.asarray(generator, dtype=float)
    finite = np.all(np.isfinite(generator), axis=(1, 2))
    generator = np.where(finite[:, None, None], generator, 0.0)
    advanced = expm(-dt * generator) @ jacobians
    norms = np.abs(advanced).max(axis=(1, 2))
    ok = finite & np.isfinite(norms) & (norms <= overflow)
    advanced[~ok] = jacobians[~ok]
    return advanced, ok


def _identity_stack(n_paths, dim):
    return np.broadcast_to(np.eye(dim), (n_paths, dim, dim)).copy()


def _integrate_ito(spec, x0, grid, increments, record, grad_drift):
    n_paths, dim = x0.shape
    n_records = grid.n_steps + 1 if record else 2
    positions = np.empty((n_paths, n_records, dim))
    positions[:, 0] = x0
    valid = np.ones(n_paths, dtype=bool)
    jacobians = None
    if grad_drift is not None:
        jacobians = np.empty((n_paths, n_records, dim, dim))
        jac = _identity_stack(n_paths, dim)
        jacobians[:, 0] = jac

    dt = grid.dt
    x = x0.copy()
    for k in range(grid.n_steps):
        t = grid.time(k)
        drift = np.asarray(spec.drift(t, _wrap(spec.domain, x)), dtype=float)
        finite = np.all(np.isfinite(drift), axis=1)
        valid &= finite
        drift = np.where(finite[:, None], drift, 0.0)

        step = drift * dt + spec.noise(increments.increments[k])
        step[~valid] = 0.0
        x_next = x + step

        if grad_drift is not None:
            midpoint = _wrap(spec.domain, 0.5 * (x + x_next))
            generator = grad_drift(t + 0.5 * dt, midpoint)
            jac, ok = exponential_midpoint_step(jac, generator, dt)
            valid &= ok

        x = x_next
        if record:
            positions[:, k + 1] = x
            if jacobians is not None:
                jacobians[:, k + 1] = jac
    if not record:
        positions[:, 1] = x
        if jacobians is not None:
            jacobians[:, 1] = jac
    return positions, jacobians, valid


def _integrate_heun(frame, x0, grid, increments, record, domain):
    n_paths, dim = x0.shape
    n_records = grid.n_steps + 1 if record else 2
    positions = np.empty((n_paths, n_records, dim))
    positions[:, 0] = x0
    valid = np.ones(n_paths, dtype=bool)
    scale = getattr(frame, "scale", 1.0)

    x = x0.copy()
    for k in range(grid.n_steps):
        t = grid.time(k)
        dw = increments.increments[k]
        k0 = np.asarray(frame.matrix(t, _wrap(domain, x)), dtype=float)
        predictor = x + scale * np.einsum("pij,pj->pi", k0, dw)
        k1 = np.asarray(frame.matrix(grid.time(k + 1),
                                     _wrap(domain, predictor)), dtype=float)
        finite = (np.all(np.isfinite(k0), axis=(1, 2))
                  & np.all(np.isfinite(k1), axis=(1, 2)))
        valid &= finite
        step = 0.5 * scale * np.einsum("pij,pj->pi", k0 + k1, dw)
        step[~valid] = 0.0
        x = x + step
        if record:
            positions[:, k + 1] = x
    if not record:
        positions[:, 1] = x
    return positions, valid


def _check_excluded(valid, what):
    n_paths = valid.shape[0]
    excluded = int(n_paths - np.count_nonzero(valid))
    if excluded:
        logger.warning("%s: %d of %d paths flagged invalid and excluded",
                       what, excluded, n_paths)
    threshold = settings.SDE_INVALID_PATH_THRESHOLD
    if excluded > threshold * n_paths:
        raise InvalidPathsError(
            "%s: %d of %d paths are invalid, above the %.2g%% threshold"
            % (what, excluded, n_paths, 100 * threshold),
            n_excluded=excluded, n_paths=n_paths)
    return excluded


def _block_jobs(n_paths, antithetic, source, grid, noise_dim, make_job,
                block_offset=0):
    """
    Build one job per (block, mirror) pair. With ``antithetic`` the
    first half of the paths draws fresh increments and the second half
    reuses them negated.
    """
    if antithetic and n_paths % 2:
        raise ValueError("Antithetic sampling needs an even path count.")
    base = n_paths // 2 if antithetic else n_paths
    jobs = []
    for block, start, stop in path_blocks(base):
        def draw(block=block_offset + block, count=stop - start):
            return WienerIncrements.draw(source, block, grid.n_steps, count,
                                         noise_dim, grid.dt)
        jobs.append(make_job(slice(start, stop), draw, False))
        if antithetic:
            jobs.append(make_job(slice(base + start, base + stop), draw, True))
    return jobs


def simulate_ito(spec, start, grid, source, n_paths, record=True,
                 antithetic=False, grad_drift=None, workers=None,
                 block_offset=0):
    """
    Euler-Maruyama trajectories of ``spec`` on ``grid``.

    ``start`` is a single point shared by all paths or one point per
    path. When ``grad_drift`` is given, the Jacobian dJ/ds = -A(s) J with
    A = grad_drift(s, x_s) is integrated along each path by the
    exponential midpoint rule, starting from the identity.
    """
    starts = _starts(start, n_paths, spec.dim)
    n_records = grid.n_steps + 1 if record else 2
    positions = np.empty((n_paths, n_records, spec.dim))
    jacobians = None
    if grad_drift is not None:
        jacobians = np.empty((n_paths, n_records, spec.dim, spec.dim))
    valid = np.ones(n_paths, dtype=bool)

    def make_job(rows, draw, mirror):
        def job():
            increments = draw()
            if mirror:
                increments = increments.mirrored()
            return rows, _integrate_ito(spec, starts[rows], grid, increments,
                                        record, grad_drift)
        return job

    jobs = _block_jobs(n_paths, antithetic, source, grid, spec.noise_dim,
                       make_job, block_offset)
    for rows, (pos, jac, ok) in _run_blocks(jobs, workers):
        positions[rows] = pos
        valid[rows] = ok
        if jacobians is not None:
            jacobians[rows] = jac

    _check_excluded(valid, "simulate_ito")
    return PathEnsemble(positions=positions, grid=grid, source=source,
                        valid=valid, jacobians=jacobians, recorded=record,
                        antithetic=antithetic, domain=spec.domain)


def simulate_jacobian(ensemble, grad_drift, workers=None):
    """
    Fill in the Jacobian of an already simulated, fully recorded
    ensemble: dJ/ds = -A(s) J with A = grad_drift(s, x_s) at the step
    midpoints, J(0) = identity.
    """
    if not ensemble.recorded:
        raise ValueError("simulate_jacobian needs recorded path histories.")
    grid = ensemble.grid
    n_paths, n_records, dim = ensemble.positions.shape
    jacobians = np.empty((n_paths, n_records, dim, dim))
    valid = ensemble.valid.copy()

    def make_job(rows):
        def job():
            path = ensemble.positions[rows]
            jac = _identity_stack(path.shape[0], dim)
            history = np.empty((path.shape[0], n_records, dim, dim))
            history[:, 0] = jac
            ok_all = np.ones(path.shape[0], dtype=bool)
            for k in range(grid.n_steps):
                midpoint = _wrap(ensemble.domain,
                                 0.5 * (path[:, k] + path[:, k + 1]))
                generator = grad_drift(grid.time(k) + 0.5 * grid.dt, midpoint)
                jac, ok = exponential_midpoint_step(jac, generator, grid.dt)
                ok_all &= ok
                history[:, k + 1] = jac
            return rows, history, ok_all
        return job

    jobs = [make_job(slice(start, stop))
            for _, start, stop in path_blocks(n_paths)]
    for rows, history, ok in _run_blocks(jobs, workers):
        jacobians[rows] = history
        valid[rows] &= ok

    _check_excluded(valid, "simulate_jacobian")
    return replace(ensemble, jacobians=jacobians, valid=valid)


def simulate_stratonovich(frame, start, grid, source, n_paths, record=True,
                          antithetic=False, domain=None, workers=None,
                          block_offset=0):
    """
    Heun trajectories of the driftless Stratonovich equation
    dx = scale * K(t, x) o dW, with ``frame.matrix`` returning the
    (N, dim, m) frame at the given points.
    """
    starts = _starts(start, n_paths, frame.dim)
    n_records = grid.n_steps + 1 if record else 2
    positions = np.empty((n_paths, n_records, frame.dim))
    valid = np.ones(n_paths, dtype=bool)

    def make_job(rows, draw, mirror):
        def job():
            increments = draw()
            if mirror:
                increments = increments.mirrored()
            return rows, _integrate_heun(frame, starts[rows], grid,
                                         increments, record, domain)
        return job

    jobs = _block_jobs(n_paths, antithetic, source, grid, frame.fiber_dim,
                       make_job, block_offset)
    for rows, (pos, ok) in _run_blocks(jobs, workers):
        positions[rows] = pos
        valid[rows] = ok

    _check_excluded(valid, "simulate_stratonovich")
    return PathEnsemble(positions=positions, grid=grid, source=source,
                        valid=valid, recorded=record, antithetic=antithetic,
                        domain=domain)


def simulate_targets(spec, targets, grid, source, n_paths, antithetic=False,
                     grad_drift=None, workers=None):
    """
    Field mode: ``n_paths`` endpoint-only paths from every target point.

    Targets are processed in batches of at most SDE_MAX_PATHS_PER_BATCH
    paths. Each batch continues the block numbering of the previous one,
    so the draws only depend on the target order and the settings.
    Yields ``(targets slice, endpoints, jacobians, valid)`` with the
    per-path arrays shaped (targets, n_paths, ...), base paths first and
    their mirrored partners second when ``antithetic`` is set.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if antithetic and n_paths % 2:
        raise ValueError("Antithetic sampling needs an even path count.")
    n_targets = targets.shape[0]
    per_batch = max(1, settings.SDE_MAX_PATHS_PER_BATCH // n_paths)
    base = n_paths // 2 if antithetic else n_paths
    block_size = settings.SDE_PATHS_PER_STREAM
    block_offset = 0
    for first in range(0, n_targets, per_batch):
        rows = slice(first, min(first + per_batch, n_targets))
        chunk = targets[rows]
        count = chunk.shape[0]
        starts = np.repeat(chunk, base, axis=0)
        if antithetic:
            starts = np.concatenate([starts, starts])
        ensemble = simulate_ito(spec, starts, grid, source, starts.shape[0],
                                record=False, antithetic=antithetic,
                                grad_drift=grad_drift, workers=workers,
                                block_offset=block_offset)
        block_offset += -(-count * base // block_size)

        def per_target(array):
            if array is None:
                return None
            if not antithetic:
                return array.reshape((count, n_paths) + array.shape[1:])
            half = count * base
            first_half = array[:half].reshape((count, base) + array.shape[1:])
            second = array[half:].reshape((count, base) + array.shape[1:])
            return np.concatenate([first_half, second], axis=1)

        yield (rows, per_target(ensemble.endpoints),
               per_target(ensemble.final_jacobians),
               per_target(ensemble.valid))
