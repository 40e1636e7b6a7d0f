"""
Deterministic grid solvers for the linear transport-diffusion equations
the Monte Carlo estimators represent. They run on the torus with
fourth-order central differences in space and classical Runge-Kutta in
time; the prescribed velocity and its gradient are evaluated exactly at
the grid nodes.
"""
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from stochflow.core.exceptions import UnsupportedDomainError
from stochflow.fields.grid import GridField
from stochflow.fields.operators import spectral_biot_savart

logger = logging.getLogger(__name__)

CFL = 0.5
DIFFUSION_LIMIT = 0.25


def derivative4(values, axis, h):
    return (-np.roll(values, -2, axis) + 8 * np.roll(values, -1, axis)
            - 8 * np.roll(values, 1, axis) + np.roll(values, 2, axis)) / (
                12 * h)


def laplacian4(values, spacing):
    total = 0.0
    for axis, h in enumerate(spacing):
        total = total + (-np.roll(values, -2, axis)
                         + 16 * np.roll(values, -1, axis) - 30 * values
                         + 16 * np.roll(values, 1, axis)
                         - np.roll(values, 2, axis)) / (12 * h * h)
    return total


def gradient4(values, spacing):
    """Derivatives along a new trailing axis."""
    return np.stack([derivative4(values, axis, h)
                     for axis, h in enumerate(spacing)], axis=-1)


@dataclass
class ReferenceSolution:
    times: List[float] = field(default_factory=list)
    snapshots: List[GridField] = field(default_factory=list)
    n_steps: int = 0

    @property
    def final(self):
        return self.snapshots[-1]

    def energies(self):
        """Domain-averaged |B|^2 (or omega^2) per snapshot."""
        return np.array([np.mean(np.sum(
            s.values.reshape(s.shape + (-1,)) ** 2, axis=-1))
            for s in self.snapshots])


def _stable_step(spacing, nu, speed, dim):
    h = float(np.min(spacing))
    limits = []
    if nu > 0:
        limits.append(DIFFUSION_LIMIT * h * h / (dim * nu))
    if speed > 0:
        limits.append(CFL * h / speed)
    return min(limits) if limits else np.inf


def _integrate(rhs, state, t0, stops, dt, domain, order):
    """Classical RK4 from t0 through each stop time, snapshotting there."""
    solution = ReferenceSolution()
    t = t0
    for stop in stops:
        span = stop - t
        if span > 0:
            n_steps = max(1, int(np.ceil(span / dt - 1e-9)))
            h = span / n_steps
            for _ in range(n_steps):
                k1 = rhs(t, state)
                k2 = rhs(t + h / 2, state + h / 2 * k1)
                k3 = rhs(t + h / 2, state + h / 2 * k2)
                k4 = rhs(t + h, state + h * k3)
                state = state + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                t += h
            solution.n_steps += n_steps
        t = stop
        solution.times.append(stop)
        solution.snapshots.append(GridField(state.copy(), domain,
                                            order=order))
    return solution


def _stops(horizon, record_times):
    stops = sorted(set([float(t) for t in (record_times or [])]
                       + [float(horizon)]))
    return [t for t in stops if 0 <= t <= horizon]


def _velocity_speed(velocity, times, nodes):
    return max(float(np.max(np.sum(np.abs(velocity(t, nodes)), axis=-1)))
               for t in times)


def solve_induction(velocity, initial, nu, horizon, dt=None,
                    record_times=None):
    """
    dB/dt = -(u . grad) B + (B . grad) u + nu lap B on a 3D torus grid,
    with ``initial`` a GridField of vector values and ``velocity`` a
    prescribed VelocityField.
    """
    domain = initial.domain
    if not domain.is_periodic:
        raise UnsupportedDomainError("The reference solver needs a torus.",
                                     kind=domain.kind)
    shape = initial.shape
    spacing = initial.spacing
    nodes = initial.nodes()
    dim = domain.dim

    def rhs(t, b):
        u = velocity(t, nodes).reshape(shape + (dim,))
        g = velocity.gradient(t, nodes).reshape(shape + (dim, dim))
        db = gradient4(b, spacing)
        advection = np.einsum("...j,...ij->...i", u, db)
        stretching = np.einsum("...ij,...j->...i", g, b)
        return -advection + stretching + nu * laplacian4(b, spacing)

    if dt is None:
        speed = _velocity_speed(velocity, (0.0, horizon), nodes)
        dt = _stable_step(spacing, nu, speed, dim)
    logger.info("induction reference: grid %s, dt %.3g", shape, dt)
    return _integrate(rhs, initial.values.copy(), 0.0,
                      _stops(horizon, record_times), dt, domain,
                      initial.order)


def solve_vorticity_2d(initial, nu, horizon, velocity=None, dt=None,
                       record_times=None):
    """
    d omega/dt = -(u . grad) omega + nu lap omega on a 2D torus grid.
    With no prescribed ``velocity`` the velocity is recovered from the
    vorticity spectrally at every stage, which makes this the full 2D
    Navier-Stokes equation.
    """
    domain = initial.domain
    if not domain.is_periodic or domain.dim != 2:
        raise UnsupportedDomainError("The reference solver needs a 2D torus.",
                                     kind=domain.kind)
    shape = initial.shape
    spacing = initial.spacing
    nodes = initial.nodes()

    def transport_velocity(t, omega):
        if velocity is None:
            return spectral_biot_savart(omega, domain.period)
        return velocity(t, nodes).reshape(shape + (2,))

    def rhs(t, omega):
        u = transport_velocity(t, omega)
        grad = gradient4(omega, spacing)
        return -np.sum(u * grad, axis=-1) + nu * laplacian4(omega, spacing)

    if dt is None:
        if velocity is None:
            u = transport_velocity(0.0, initial.values)
            speed = float(np.max(np.sum(np.abs(u), axis=-1)))
        else:
            speed = _velocity_speed(velocity, (0.0, horizon), nodes)
        dt = _stable_step(spacing, nu, speed, 2)
    return _integrate(rhs, initial.values.copy(), 0.0,
                      _stops(horizon, record_times), dt, domain,
                      initial.order)
