"""
Agreement in law between a driftless frame run and a drifted Ito run,
tested through the endpoint moments of the displacement.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from stochflow.conf import settings
from stochflow.core.estimates import combined_z_scores, summarize
from stochflow.driftless.frames import (frame_for_lagrangian_drift,
                                        probe_points,
                                        verify_frame_conditions)
from stochflow.sde.engine import TimeGrid, simulate_stratonovich
from stochflow.transport.solvers import trace_lagrangian

logger = logging.getLogger(__name__)


def monomials(dim, max_order):
    """Exponent tuples of every monomial of total order 1..max_order."""
    exponents = []
    for order in range(1, max_order + 1):
        for combo in itertools.combinations_with_replacement(range(dim),
                                                             order):
            exponents.append(tuple(combo.count(axis) for axis in range(dim)))
    return exponents


def _moment_samples(ensemble, exponents):
    displacement = ensemble.endpoints - ensemble.start
    return np.stack([np.prod(displacement ** np.asarray(e), axis=-1)
                     for e in exponents], axis=-1)


@dataclass(frozen=True)
class LawReport:
    exponents: Tuple[Tuple[int, ...], ...]
    frame_moments: Tuple[float, ...]
    drift_moments: Tuple[float, ...]
    z_scores: Tuple[float, ...]
    threshold: float

    @property
    def max_abs_z(self):
        return float(np.max(np.abs(self.z_scores)))

    @property
    def passed(self):
        return self.max_abs_z < self.threshold

    def as_dict(self):
        return {"moments": [{"exponent": list(e), "frame": f, "drift": d,
                             "z": z}
                            for e, f, d, z in zip(self.exponents,
                                                  self.frame_moments,
                                                  self.drift_moments,
                                                  self.z_scores)],
                "max_abs_z": self.max_abs_z, "threshold": self.threshold,
                "passed": self.passed}


def compare_laws(frame_run, drift_run, max_order=None, threshold=None):
    """
    Z-scores of the difference of every displacement moment up to
    ``max_order`` between two independent path ensembles.
    """
    if frame_run.dim != drift_run.dim:
        raise ValueError("The two runs live in different dimensions.")
    if not (np.allclose(frame_run.start, frame_run.start[0])
            and np.allclose(drift_run.start, frame_run.start[0])):
        raise ValueError("Both runs must start every path at the same "
                         "point.")
    horizons = [run.grid.t1 - run.grid.t0 for run in (frame_run, drift_run)]
    if not np.isclose(horizons[0], horizons[1]):
        raise ValueError("The two runs cover different horizons: %r"
                         % horizons)
    max_order = int(max_order or settings.DRIFTLESS_MAX_ORDER)
    exponents = monomials(frame_run.dim, max_order)

    estimates = [summarize(_moment_samples(run, exponents)[None],
                           run.valid[None], antithetic=run.antithetic)
                 for run in (frame_run, drift_run)]
    z = combined_z_scores(*estimates)[0]
    report = LawReport(
        exponents=tuple(exponents),
        frame_moments=tuple(float(m) for m in estimates[0].mean[0]),
        drift_moments=tuple(float(m) for m in estimates[1].mean[0]),
        z_scores=tuple(float(v) for v in z),
        threshold=float(threshold or settings.DRIFTLESS_Z_THRESHOLD))
    logger.info("law comparison over %d moments: max |z| = %.3g",
                len(exponents), report.max_abs_z)
    return report


@dataclass(frozen=True)
class DriftlessReport:
    frame: object
    laws: LawReport

    @property
    def passed(self):
        return self.frame.passed and self.laws.passed

    def as_dict(self):
        return {"frame_conditions": self.frame.as_dict(),
                "laws": self.laws.as_dict(), "passed": self.passed}


def verify_driftless(velocity, nu, start, horizon, n_paths, source, dt=None,
                     frame_nu=None, antithetic=False, domain=None,
                     workers=None):
    """
    Build the rotation frame of the Lagrangian particles of ``velocity``
    at viscosity ``frame_nu`` (default ``nu``), check its frame
    conditions on random probes, and compare its Stratonovich run from
    ``start`` with the drifted Ito run at ``nu``. The two runs draw from
    consecutive streams of ``source``.
    """
    frame_nu = nu if frame_nu is None else frame_nu
    domain = domain or velocity.domain
    frame = frame_for_lagrangian_drift(velocity, frame_nu)
    probes = probe_points(domain, int(settings.DRIFTLESS_PROBES),
                          seed=source.master_seed)
    conditions = verify_frame_conditions(
        frame, lambda t, x: -np.asarray(velocity(t, x)), probes)

    grid = TimeGrid.over(horizon, dt)
    periodic = domain if domain is not None and domain.is_periodic else None
    frame_run = simulate_stratonovich(frame, start, grid, source, n_paths,
                                      record=False, antithetic=antithetic,
                                      domain=periodic, workers=workers)
    drift_run = trace_lagrangian(velocity, start, horizon, nu,
                                 source.spawn(source.stream_id + 1), n_paths,
                                 dt=grid.dt, record=False,
                                 antithetic=antithetic, domain=domain,
                                 workers=workers)
    return DriftlessReport(frame=conditions,
                           laws=compare_laws(frame_run, drift_run))
