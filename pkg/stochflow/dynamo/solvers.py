"""
Kinematic dynamo: a magnetic field carried and stretched by a prescribed
flow, diffusing at the magnetic diffusivity nu_m. The transport is the
stretched vorticity estimator with nu_m in place of nu; in 2D the field
is the scalar dual and is only carried.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from stochflow.conf import settings
from stochflow.core.exceptions import (ConfigurationError,
                                       IndeterminateRateError)
from stochflow.fields.base import VelocityField, VorticityField
from stochflow.fields.operators import wavenumbers
from stochflow.sde.random import RandomSource
from stochflow.transport.solvers import (TransportQuery, solve_vorticity_2d,
                                         solve_vorticity_3d)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DynamoQuery:
    nu_m: float
    velocity: VelocityField
    initial: VorticityField
    horizon: float
    points: np.ndarray
    n_paths: int
    source: RandomSource
    dt: Optional[float] = None
    antithetic: bool = False
    domain: Optional[object] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.nu_m > 0:
            raise ConfigurationError("nu_m must be positive", field="nu_m",
                                     value=self.nu_m)
        if not self.horizon > 0:
            raise ConfigurationError("horizon must be positive",
                                     field="horizon", value=self.horizon)
        if self.n_paths < 2:
            raise ConfigurationError("n_paths must be at least 2",
                                     field="n_paths", value=self.n_paths)
        points = self.initial.points(self.points)
        object.__setattr__(self, "points", points)
        if self.initial.dim == 3:
            gradient = np.asarray(self.initial.gradient(points))
            divergence = np.abs(np.trace(gradient, axis1=-2, axis2=-1))
            scale = max(float(np.max(np.abs(gradient))), 1.0)
            tolerance = settings.DYNAMO_DIVERGENCE_TOLERANCE
            if float(np.max(divergence)) > tolerance * scale:
                raise ConfigurationError(
                    "The initial magnetic field is not divergence free.",
                    field="initial", value=float(np.max(divergence)))

    def transport_query(self, horizon=None, source=None, keep_samples=False):
        return TransportQuery(
            tau=float(horizon or self.horizon), points=self.points,
            nu=self.nu_m, velocity=self.velocity, initial=self.initial,
            n_paths=self.n_paths, source=source or self.source, dt=self.dt,
            antithetic=self.antithetic, keep_samples=keep_samples,
            domain=self.domain)


def transport_magnetic(query, horizon=None, source=None, keep_samples=False,
                       workers=None):
    """The magnetic field estimate at ``horizon`` (default: the query's)."""
    transport = query.transport_query(horizon, source, keep_samples)
    if query.initial.dim == 2:
        return solve_vorticity_2d(transport, workers=workers)
    return solve_vorticity_3d(transport, workers=workers)


@dataclass(frozen=True)
class GrowthRate:
    """
    Exponential growth rate of the field amplitude, half the slope of
    log energy, with a bootstrap confidence interval.
    """

    rate: float
    interval: Tuple[float, float]
    times: Tuple[float, ...]
    energies: Tuple[float, ...]
    energy_stderr: Tuple[float, ...]
    confidence: float

    def contains(self, value, slack=0.0):
        return self.interval[0] - slack <= value <= self.interval[1] + slack

    def as_dict(self):
        return {"rate": self.rate, "interval": list(self.interval),
                "times": list(self.times), "energies": list(self.energies),
                "energy_stderr": list(self.energy_stderr),
                "confidence": self.confidence}


def _path_samples(result, antithetic):
    """Per-path samples with antithetic pairs averaged, excluded as NaN."""
    samples = result.samples
    if samples.ndim == 2:
        samples = samples[..., None]
    samples = np.where(result.valid[..., None], samples, np.nan)
    if antithetic:
        half = samples.shape[1] // 2
        samples = 0.5 * (samples[:, :half] + samples[:, half:2 * half])
    return samples


def _energy(means, stderr):
    """Probe-averaged |B|^2 with the sampling bias removed."""
    return float(np.mean(np.sum(means ** 2 - stderr ** 2, axis=-1)))


def _slope(times, energies):
    return 0.5 * float(np.polyfit(times, np.log(energies), 1)[0])


def growth_rate(query, window, n_times=5, confidence=None, workers=None):
    """
    Fit the growth rate of the probe-averaged magnetic energy over
    ``window = (t1, t2)``. Each time is estimated from its own random
    stream; the interval comes from resampling paths at every time.
    """
    t1, t2 = (float(t) for t in window)
    if not t2 > t1 > 0:
        raise ConfigurationError("The window needs t2 > t1 > 0.",
                                 field="window", value=[t1, t2])
    if n_times < 2:
        raise ConfigurationError("Need at least two fit times.",
                                 field="n_times", value=n_times)
    confidence = float(confidence or settings.DYNAMO_CONFIDENCE)
    n_resamples = int(settings.DYNAMO_BOOTSTRAP_RESAMPLES)
    times = np.linspace(t1, t2, n_times)
    base = query.source.stream_id
    resampler = query.source.spawn(base + n_times + 1).generator(0)

    energies = np.empty(n_times)
    errors = np.empty(n_times)
    replicas = np.empty((n_resamples, n_times))
    for i, time in enumerate(times):
        result = transport_magnetic(query, horizon=time,
                                    source=query.source.spawn(base + i + 1),
                                    keep_samples=True, workers=workers)
        samples = _path_samples(result, query.antithetic)
        n = samples.shape[1]
        means = result.mean.reshape(len(query.points), -1)
        stderr = result.stderr.reshape(means.shape)
        energies[i] = _energy(means, stderr)
        for b in range(n_resamples):
            picks = resampler.integers(0, n, size=n)
            replicas[b, i] = _energy(np.nanmean(samples[:, picks], axis=1),
                                     stderr)
        errors[i] = float(np.std(replicas[:, i], ddof=1))
        logger.debug("dynamo energy at t=%.4g: %.6g +- %.3g", time,
                     energies[i], errors[i])

    weak = energies <= 2 * errors
    if np.any(weak):
        raise IndeterminateRateError(
            "The magnetic energy is consistent with zero; no growth rate.",
            times=times[weak].tolist(), energies=energies[weak].tolist())

    rate = _slope(times, energies)
    fits = [_slope(times, row) for row in replicas if np.all(row > 0)]
    if not fits:
        raise IndeterminateRateError(
            "No resampled energy curve stays positive over the window.")
    tail = 50.0 * (1.0 - confidence)
    low, high = np.percentile(fits, [tail, 100.0 - tail])
    logger.info("dynamo growth rate %.5g in [%.5g, %.5g]", rate, low, high)
    return GrowthRate(rate=rate, interval=(float(low), float(high)),
                      times=tuple(float(t) for t in times),
                      energies=tuple(float(e) for e in energies),
                      energy_stderr=tuple(float(e) for e in errors),
                      confidence=confidence)


def magnetic_divergence(values, stderr, period):
    """
    Divergence of a periodic 3D grid estimate and its standard error,
    taking the per-node errors of each component as independent and
    spread evenly over the resolved modes.
    """
    grid_axes = (0, 1, 2)
    shape = values.shape[:3]
    k = wavenumbers(shape, period)
    transform = np.fft.fftn(values, axes=grid_axes)
    total = 0.0
    variance = 0.0
    for axis in range(3):
        kk = k[axis].copy()
        n = shape[axis]
        if n % 2 == 0:
            index = [slice(None)] * 3
            index[axis] = n // 2
            kk[tuple(index)] = 0.0
        total = total + 1j * kk * transform[..., axis]
        variance = variance + np.mean(stderr[..., axis] ** 2) * np.mean(kk ** 2)
    divergence = np.real(np.fft.ifftn(total, axes=grid_axes))
    return divergence, np.full(shape, float(np.sqrt(variance)))
