"""
Self-consistent Navier-Stokes runs by operator splitting.

Each step transports the vorticity over [t, t + dtau] with the velocity
held at its start-of-step value, then rebuilds the velocity from the new
vorticity. Further Picard passes re-transport with the velocity blended
linearly in time between the start of the step and the latest end-of-step
estimate, reusing the same random numbers, until the end-of-step
velocity settles. A pass that moves the velocity further than the one
before means the step is too long to contract.
"""
import logging

import numpy as np

from stochflow.conf import settings
from stochflow.core.exceptions import ConfigurationError, StepSizeError
from stochflow.fields.grid import (GridField, GridVelocityField,
                                   GridVorticityField)
from stochflow.navierstokes.state import (NSState, VortexBlobInit,
                                          check_resolution, diagnose,
                                          velocity_from_vorticity)
from stochflow.transport.solvers import (TransportQuery, solve_vorticity_2d,
                                         solve_vorticity_3d)

logger = logging.getLogger(__name__)


def _passes(mc):
    requested = mc.picard_iterations or settings.NS_PICARD_ITERATIONS
    return max(1, min(int(requested), int(settings.NS_PICARD_MAX_ITERATIONS)))


def _transport(state, velocity, dtau, mc, source):
    query = TransportQuery(
        tau=dtau, points=state.vorticity_grid.nodes(), nu=state.nu,
        velocity=velocity, initial=state.vorticity, n_paths=mc.n_paths,
        source=source, dt=mc.dt, antithetic=mc.antithetic,
        domain=state.domain)
    solve = solve_vorticity_2d if state.dim == 2 else solve_vorticity_3d
    return solve(query, workers=mc.workers)


def _as_grid(values, state):
    tail = () if state.dim == 2 else (3,)
    return GridField(np.asarray(values).reshape(state.shape + tail),
                     state.domain, order=state.vorticity_grid.order)


def check_contraction(distances):
    """Raise when successive Picard updates stop shrinking."""
    if len(distances) > 1 and distances[-1] > distances[-2]:
        raise StepSizeError(
            "Picard iteration is not contracting; use a smaller time step.",
            distances=[float(d) for d in distances])


def step(state, dtau, mc):
    """Advance ``state`` by ``dtau``; returns a new NSState."""
    if not dtau > 0:
        raise ConfigurationError("dtau must be positive", field="dtau",
                                 value=dtau)
    index = state.step_index + 1
    base = mc.source.stream_id
    transport_source = mc.source.spawn(base + 2 * index - 1)
    recovery_source = mc.source.spawn(base + 2 * index)
    tolerance = settings.NS_PICARD_TOLERANCE

    velocity = GridVelocityField(state.velocity_grid)
    end_velocity = None
    distances = []
    passes = 0
    for _ in range(_passes(mc)):
        passes += 1
        result = _transport(state, velocity, dtau, mc, transport_source)
        vorticity = _as_grid(result.mean, state)
        new_velocity = velocity_from_vorticity(vorticity, mc, recovery_source)
        if end_velocity is not None:
            change = float(np.max(np.abs(new_velocity.values
                                         - end_velocity.values)))
            distances.append(change)
            check_contraction(distances)
            scale = max(float(np.max(np.abs(new_velocity.values))), 1e-300)
            if change <= tolerance * scale:
                end_velocity = new_velocity
                break
        end_velocity = new_velocity
        velocity = GridVelocityField([state.velocity_grid, new_velocity],
                                     times=[0.0, dtau])

    stderr = _as_grid(result.stderr, state)
    excluded = int(np.max(result.estimate.n_excluded))
    time = state.time + dtau
    check_resolution(vorticity, time)
    diagnostics = diagnose(time, end_velocity, vorticity, stderr=stderr,
                           picard_iterations=passes, n_excluded=excluded)
    logger.info("step %d t=%.4g energy=%.6g enstrophy=%.6g max|w|=%.4g "
                "stderr=%.3g curl residual=%.3g", index, time,
                diagnostics.kinetic_energy, diagnostics.enstrophy,
                diagnostics.max_vorticity, diagnostics.mc_stderr_max,
                diagnostics.curl_residual)
    return NSState(time=time, nu=state.nu, velocity_grid=end_velocity,
                   vorticity_grid=vorticity, diagnostics=diagnostics,
                   stderr_grid=stderr, step_index=index)


def initial_state(init, mc, nu=None, domain=None, shape=None):
    """An NSState from blobs, a vorticity field or an existing state."""
    if isinstance(init, NSState):
        return init
    if domain is None or shape is None or nu is None:
        raise ConfigurationError("A run from initial data needs nu, a "
                                 "domain and a grid shape.", field="init")
    if isinstance(init, VortexBlobInit):
        init = init.vorticity(domain)
    if domain.is_periodic and domain.dim == 2:
        probe = GridVorticityField.sample(init, domain, shape)
        circulation = float(probe.circulation())
        scale = float(np.sum(np.abs(probe.grid.values))
                      * np.prod(probe.grid.spacing)) or 1.0
        if abs(circulation) > 1e-8 * scale:
            raise ConfigurationError("Initial vorticity must have zero total "
                                     "circulation on a 2D torus.",
                                     field="init", value=circulation)
    state = NSState.from_vorticity(init, nu, domain, shape, mc=mc)
    check_resolution(state.vorticity_grid, state.time)
    return state


def run(init, horizon, dtau, mc, nu=None, domain=None, shape=None,
        callback=None):
    """
    Repeated ``step`` from the initial data up to ``horizon``; the last
    step is shortened to land on it. Returns every state, the initial
    one first.
    """
    if horizon < 0:
        raise ConfigurationError("horizon must be non-negative",
                                 field="horizon", value=horizon)
    if not dtau > 0:
        raise ConfigurationError("dtau must be positive", field="dtau",
                                 value=dtau)
    state = initial_state(init, mc, nu=nu, domain=domain, shape=shape)
    end = state.time + horizon
    states = [state]
    if callback is not None:
        callback(state)
    n_steps = int(np.ceil(horizon / dtau - 1e-9))
    logger.info("Navier-Stokes run: %d steps of %.4g on %s grid %s",
                n_steps, dtau, state.domain.kind, state.shape)
    for _ in range(n_steps):
        state = step(state, min(dtau, end - state.time), mc)
        states.append(state)
        if callback is not None:
            callback(state)
    return states


def energy_decay_rate(states):
    """Least-squares slope of -log(kinetic energy) against time."""
    times = np.array([s.time for s in states])
    energies = np.array([s.diagnostics.kinetic_energy for s in states])
    if times.size < 2 or np.any(energies <= 0):
        raise ValueError("Need at least two states with positive energy.")
    slope = np.polyfit(times, np.log(energies), 1)[0]
    return float(-slope)
