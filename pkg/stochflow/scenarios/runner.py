"""
Scenario runs: read a JSON config, dispatch it to the solver it names and
write a self-describing output directory.

An output directory holds ``metadata.json`` (the resolved config, code
version, random stream and every registered tunable, enough to rerun),
the result CSVs of the mode, optional figures, and ``error.json`` when
the run failed.
"""
import inspect
import json
import logging
import os
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from rest_framework import serializers

import stochflow
from stochflow.conf import registry, settings
from stochflow.core.exceptions import (ConfigurationError, DimensionError,
                                       NumericalError, QuadratureWarning,
                                       ResolutionWarning, StochflowError)
from stochflow.driftless.laws import verify_driftless
from stochflow.dynamo.solvers import (DynamoQuery, growth_rate,
                                      transport_magnetic)
from stochflow.fields.base import VelocityField
from stochflow.fields.catalog import CATALOG, UniformVelocity, build
from stochflow.fields.domain import Domain, TORUS
from stochflow.fields.grid import (GridField, GridVelocityField,
                                   GridVorticityField)
from stochflow.navierstokes.picard import run as run_navier_stokes
from stochflow.navierstokes.state import MCParams, VortexBlobInit
from stochflow.recovery.biot_savart import biot_savart_direct
from stochflow.recovery.brownian import RecoveryQuery, recover_velocity
from stochflow.reference import finite_difference
from stochflow.reference.heat import heat_solve
from stochflow.scenarios import plotting, writers
from stochflow.scenarios.serializers import (DRIFTLESS, DYNAMO, NS, RECOVER,
                                             TRANSPORT_2D, TRANSPORT_3D,
                                             ScenarioSerializer,
                                             flatten_errors, to_plain)
from stochflow.sde.random import RandomSource
from stochflow.transport.solvers import (TransportQuery, solve_vorticity_2d,
                                         solve_vorticity_3d,
                                         trace_lagrangian)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
EXIT_STRICT = 4

VELOCITY = "velocity"
VORTICITY = "vorticity"

STRICT_WARNINGS = (QuadratureWarning, ResolutionWarning)

# Settings that change speed only and stay out of the run record.
UNRECORDED_SETTINGS = ("SDE_WORKERS",)


@dataclass
class RunOutcome:
    exit_code: int
    output_dir: Optional[str] = None
    artifacts: List[str] = field(default_factory=list)
    warnings: List[Dict] = field(default_factory=list)
    summary: Dict = field(default_factory=dict)
    error: Optional[Dict] = None


class StrictModeFailure(StochflowError):
    code = "strict"


def exit_code_for(error):
    if isinstance(error, NumericalError):
        return EXIT_NUMERICAL
    return EXIT_INVALID


def validation_error(error):
    detail = flatten_errors(error.detail)
    message = "; ".join("%s: %s" % (path, " ".join(messages))
                        for path, messages in sorted(detail.items()))
    return {"code": "invalid-config",
            "message": "Invalid scenario: %s" % message,
            "detail": detail}


def load_config(path):
    try:
        with open(path) as handle:
            data = json.load(handle)
    except (OSError, ValueError) as error:
        raise ConfigurationError("Cannot read scenario %s: %s" % (path, error),
                                 field="config", path=str(path))
    if not isinstance(data, dict):
        raise ConfigurationError("A scenario is a JSON object.",
                                 field="config", path=str(path))
    return data


def validate_config(data, base_dir=None):
    """The resolved config, or a DRF ValidationError naming the fields."""
    serializer = ScenarioSerializer(data=data,
                                    context={"base_dir": base_dir})
    serializer.is_valid(raise_exception=True)
    resolved = to_plain(serializer.validated_data)
    for section in (VELOCITY, "initial"):
        spec = resolved.get(section)
        if spec and "grid" in spec:
            spec["grid"] = _resolve_path(base_dir, spec["grid"])
    return resolved


def _resolve_path(base_dir, path):
    if os.path.isabs(path):
        return path
    return os.path.abspath(os.path.join(base_dir or os.getcwd(), path))


def build_domain(spec):
    if spec["kind"] == TORUS:
        return Domain.torus(spec["dim"], spec["period"])
    return Domain.free_space(spec["dim"], spec["extent"])


def build_field(spec, want, domain, section, base_dir=None):
    """
    A velocity or vorticity field from a field spec: a catalog entry by
    name, or a grid file. A velocity stands in for a vorticity through
    its curl at ``spec["time"]``.
    """
    if "grid" in spec:
        grid = GridField.load(_resolve_path(base_dir, spec["grid"]))
        if grid.dim != domain.dim:
            raise DimensionError("Grid file %s is %dD, the domain is %dD."
                                 % (spec["grid"], grid.dim, domain.dim),
                                 field="%s.grid" % section)
        if want == VELOCITY:
            return GridVelocityField(grid, times=[spec["time"]])
        return GridVorticityField(grid)

    params = dict(spec["params"])
    if "domain" in inspect.signature(CATALOG[spec["name"]]).parameters:
        params["domain"] = domain
    try:
        built = build(spec["name"], **params)
    except StochflowError:
        raise
    except (TypeError, ValueError) as error:
        raise ConfigurationError("Bad parameters for %s: %s"
                                 % (spec["name"], error),
                                 field="%s.params" % section)
    if want == VELOCITY and not isinstance(built, VelocityField):
        raise ConfigurationError("%s is not a velocity field." % spec["name"],
                                 field="%s.name" % section)
    if want == VORTICITY and isinstance(built, VelocityField):
        built = built.vorticity(spec["time"])
    if built.dim != domain.dim:
        raise DimensionError("%s is %dD, the domain is %dD."
                             % (spec["name"], built.dim, domain.dim),
                             field="%s.name" % section)
    return built


def _source(config):
    mc = config["mc"]
    return RandomSource.from_seed(mc["seed"], mc["stream"])


def _points(config):
    return np.asarray(config["sampling"]["points"], dtype=float)


def _oracle_grid(field_, domain):
    shape = (int(settings.SCENARIO_ORACLE_SHAPE),) * domain.dim
    return GridField.sample(field_, domain, shape)


def _is_at_rest(velocity):
    return isinstance(velocity, UniformVelocity) and not np.any(
        velocity.vector)


def transport_reference(config, velocity, initial, domain, points):
    """
    Reference vorticity at the targets, or None when no reference solver
    covers the setup.
    """
    nu = config["physics"]["nu"]
    horizon = config["time"]["horizon"]
    if domain.is_periodic:
        grid = _oracle_grid(initial, domain)
        if _is_at_rest(velocity):
            return heat_solve(grid, nu, horizon)(points)
        if domain.dim == 2:
            solution = finite_difference.solve_vorticity_2d(
                grid, nu, horizon, velocity=velocity)
        else:
            solution = finite_difference.solve_induction(velocity, grid, nu,
                                                         horizon)
        return solution.final(points)
    if _is_at_rest(velocity) and hasattr(initial, "diffused"):
        return initial.diffused(nu, horizon)(points)
    return None


class ScenarioRun(object):
    """One validated scenario bound to an output directory."""

    def __init__(self, config, output_dir, workers=None, base_dir=None):
        self.config = config
        self.output_dir = output_dir
        self.workers = workers
        self.base_dir = base_dir
        self.mode = config["mode"]
        self.domain = build_domain(config["domain"])
        self.source = _source(config)
        self.artifacts = []
        self.summary = {}

    def path(self, name):
        self.artifacts.append(name)
        return os.path.join(self.output_dir, name)

    @property
    def plots(self):
        return self.config["output"]["plots"]

    def field(self, section, want):
        return build_field(self.config[section], want, self.domain, section,
                           base_dir=self.base_dir)

    def execute(self):
        handler = {
            TRANSPORT_2D: self.transport,
            TRANSPORT_3D: self.transport,
            RECOVER: self.recover,
            NS: self.navier_stokes,
            DYNAMO: self.dynamo,
            DRIFTLESS: self.driftless,
        }[self.mode]
        handler()
        return self.summary

    def _estimates(self, points, estimate, title):
        writers.write_estimates(self.path("estimates.csv"), points, estimate)
        self.summary.update(
            n_points=int(len(points)),
            max_stderr=float(np.max(estimate.stderr)),
            n_excluded=int(np.sum(estimate.n_excluded)))
        if self.plots and points.shape[1] == 2:
            plotting.plot_point_estimates(self.path("estimates.png"), points,
                                          estimate, title)

    def _oracle(self, points, estimate, reference):
        if reference is None:
            self.summary["oracle"] = None
            logger.info("no reference solver covers this scenario")
            return
        self.summary["oracle_max_abs_z"] = writers.write_oracle(
            self.path("oracle.csv"), points, estimate, reference)

    def transport(self):
        config = self.config
        velocity = self.field(VELOCITY, VELOCITY)
        initial = self.field("initial", VORTICITY)
        points = _points(config)
        mc = config["mc"]
        query = TransportQuery(
            tau=config["time"]["horizon"], points=points,
            nu=config["physics"]["nu"], velocity=velocity, initial=initial,
            n_paths=mc["n_paths"], source=self.source,
            dt=config["time"].get("dt"), antithetic=mc["antithetic"],
            start_time=config[VELOCITY]["time"], domain=self.domain)
        solve = solve_vorticity_2d if self.domain.dim == 2 else (
            solve_vorticity_3d)
        result = solve(query, workers=self.workers)
        self._estimates(points, result.estimate, "transported vorticity")
        self.summary["grid"] = result.grid.as_dict()
        if config["oracle"]:
            self._oracle(points, result.estimate, transport_reference(
                config, velocity, initial, self.domain, points))

    def recover(self):
        config = self.config
        vorticity = self.field("initial", VORTICITY)
        points = _points(config)
        mc = config["mc"]
        query = RecoveryQuery(vorticity, points,
                              mc.get("recovery_paths") or mc["n_paths"],
                              self.source, antithetic=mc["antithetic"],
                              domain=self.domain)
        result = recover_velocity(query, mc["recovery_method"])
        self._estimates(points, result.estimate, "recovered velocity")
        self.summary.update(method=result.method,
                            max_tail=float(np.max(np.abs(result.tail))))
        if config["oracle"]:
            shape = (int(settings.SCENARIO_ORACLE_SHAPE),) * self.domain.dim
            self._oracle(points, result.estimate, biot_savart_direct(
                vorticity, points, domain=self.domain, shape=shape))

    def _initial_vorticity(self):
        if "blobs" in self.config:
            blobs = self.config["blobs"]
            return VortexBlobInit(
                centers=tuple(tuple(c) for c in blobs["centers"]),
                radii=tuple(blobs["radii"]),
                circulations=tuple(blobs["circulations"]),
                profile=blobs["profile"])
        return self.field("initial", VORTICITY)

    def navier_stokes(self):
        config = self.config
        mc = config["mc"]
        params = MCParams(
            n_paths=mc["n_paths"], source=self.source,
            dt=config["time"].get("dt"), antithetic=mc["antithetic"],
            picard_iterations=mc.get("picard_iterations"),
            velocity_method=mc["velocity_method"],
            recovery_paths=mc.get("recovery_paths"), workers=self.workers)
        nu = config["physics"]["nu"]
        states = run_navier_stokes(
            self._initial_vorticity(), config["time"]["horizon"],
            config["time"]["dtau"], params, nu=nu, domain=self.domain,
            shape=tuple(config["sampling"]["shape"]))
        final = states[-1]

        writers.write_diagnostics(self.path("diagnostics.csv"), states)
        final.vorticity_grid.to_csv(self.path("vorticity.csv"))
        final.velocity_grid.to_csv(self.path("velocity.csv"))
        if final.stderr_grid is not None:
            final.stderr_grid.to_csv(self.path("vorticity_stderr.csv"))
        self.summary.update(n_steps=len(states) - 1, final_time=final.time,
                            final=final.diagnostics.as_dict())

        n_particles = config["output"]["particles"]
        if n_particles and final.time > states[0].time:
            self._particles(states, nu, n_particles)
        if config["oracle"] and self.domain.is_periodic and (
                self.domain.dim == 2):
            reference = finite_difference.solve_vorticity_2d(
                states[0].vorticity_grid, nu, final.time - states[0].time)
            difference = reference.final.values - final.vorticity_grid.values
            scale = float(np.max(np.abs(reference.final.values))) or 1.0
            self.summary["oracle_max_relative_error"] = float(
                np.max(np.abs(difference))) / scale
        if self.plots:
            plotting.plot_grid_field(self.path("vorticity.png"),
                                     final.vorticity_grid,
                                     "vorticity at t=%.4g" % final.time)
            plotting.plot_diagnostics(self.path("diagnostics.png"), states)

    def _particles(self, states, nu, n_particles):
        """
        Marker particles moving with the computed velocity, +u plus
        sqrt(2 nu) noise.
        """
        velocity = GridVelocityField([s.velocity_grid for s in states],
                                     times=[s.time for s in states])
        sampling = self.config["sampling"]
        tracer = self.source.spawn(self.source.stream_id + 2 * len(states))
        if "points" in sampling:
            starts = _points(self.config)
            starts = starts[np.arange(n_particles) % len(starts)]
        else:
            lower, sides = self.domain.box()
            starts = tracer.generator(0).uniform(
                lower, lower + sides, (n_particles, self.domain.dim))
        ensemble = trace_lagrangian(
            velocity, starts, states[-1].time - states[0].time, nu,
            tracer.spawn(tracer.stream_id + 1), n_particles,
            dt=self.config["time"].get("dt"), start_time=states[0].time,
            domain=self.domain, workers=self.workers, reverse=False)
        writers.write_particles(self.path("particles.csv"), ensemble,
                                self.domain)
        if self.plots:
            plotting.plot_particles(self.path("particles.png"), ensemble,
                                    self.domain)

    def dynamo(self):
        config = self.config
        mc = config["mc"]
        velocity = self.field(VELOCITY, VELOCITY)
        initial = self.field("initial", VORTICITY)
        points = _points(config)
        query = DynamoQuery(
            nu_m=config["physics"]["nu_m"], velocity=velocity,
            initial=initial, horizon=config["time"]["horizon"],
            points=points, n_paths=mc["n_paths"], source=self.source,
            dt=config["time"].get("dt"), antithetic=mc["antithetic"],
            domain=self.domain)
        result = transport_magnetic(query, workers=self.workers)
        self._estimates(points, result.estimate, "magnetic field")
        if config["oracle"] and self.domain.is_periodic:
            reference = finite_difference.solve_induction(
                velocity, _oracle_grid(initial, self.domain),
                query.nu_m, query.horizon)
            self._oracle(points, result.estimate, reference.final(points))

        window = config["time"].get("window")
        if window:
            rate = growth_rate(query, tuple(window),
                               n_times=config["time"]["n_times"],
                               workers=self.workers)
            times = np.asarray(rate.times)
            intercept = np.mean(np.log(rate.energies)) - (
                2 * rate.rate * np.mean(times))
            fitted = np.exp(intercept + 2 * rate.rate * times)
            writers.write_table(
                self.path("energy.csv"),
                ["time", "energy", "energy_stderr", "fit"],
                zip(times, rate.energies, rate.energy_stderr, fitted))
            writers.write_json(self.path("rate.json"), rate.as_dict())
            self.summary["growth_rate"] = rate.as_dict()
            if self.plots:
                plotting.plot_energy(self.path("energy.png"), rate, fitted)

    def driftless(self):
        config = self.config
        physics = config["physics"]
        nu = physics.get("nu", physics.get("nu_m"))
        report = verify_driftless(
            self.field(VELOCITY, VELOCITY), nu, _points(config)[0],
            config["time"]["horizon"], config["mc"]["n_paths"], self.source,
            dt=config["time"].get("dt"),
            antithetic=config["mc"]["antithetic"], domain=self.domain,
            workers=self.workers)
        writers.write_json(self.path("report.json"), report.as_dict())
        self.summary.update(passed=report.passed,
                            max_abs_z=report.laws.max_abs_z,
                            drift_residual=report.frame.drift_residual)


def recorded_settings():
    return {name: getattr(settings, name) for name in sorted(registry)
            if name not in UNRECORDED_SETTINGS}


def metadata(config, run, captured, exit_code):
    return {
        "schema_version": settings.SCENARIO_SCHEMA_VERSION,
        "code_version": stochflow.__version__,
        "rng": run.source.as_dict(),
        "config": config,
        "settings": recorded_settings(),
        "artifacts": sorted(run.artifacts),
        "warnings": captured,
        "summary": run.summary,
        "exit_code": exit_code,
    }


def _warning_record(message):
    return {"category": message.category.__name__,
            "message": str(message.message)}


def default_output_dir(config_path, config, base_dir):
    directory = config["output"].get("directory")
    if directory:
        return _resolve_path(base_dir, directory)
    stem = os.path.splitext(os.path.basename(config_path))[0]
    return os.path.join(settings.STOCHFLOW_OUTPUT_ROOT, stem)


def _fail(outcome, error):
    outcome.error = error
    if outcome.output_dir and os.path.isdir(outcome.output_dir):
        writers.write_json(os.path.join(outcome.output_dir, "error.json"),
                           error)
        outcome.artifacts.append("error.json")
    return outcome


def run_scenario(config_path, output_dir=None, strict=False, workers=None):
    """
    Validate and run the scenario at ``config_path``. Returns a
    ``RunOutcome``; the exit code is 0 on success, 2 for an invalid
    config, 3 for a numerical failure and 4 when ``strict`` turns a
    warning or a failed check into a failure.
    """
    config_path = str(config_path)
    base_dir = os.path.dirname(os.path.abspath(config_path))
    outcome = RunOutcome(exit_code=EXIT_OK, output_dir=output_dir)
    if output_dir:
        writers.ensure_directory(output_dir)
    try:
        config = validate_config(load_config(config_path), base_dir)
    except serializers.ValidationError as error:
        outcome.exit_code = EXIT_INVALID
        return _fail(outcome, validation_error(error))
    except ConfigurationError as error:
        outcome.exit_code = EXIT_INVALID
        return _fail(outcome, error.as_dict())

    outcome.output_dir = output_dir or default_output_dir(config_path, config,
                                                          base_dir)
    writers.ensure_directory(outcome.output_dir)
    run = ScenarioRun(config, outcome.output_dir, workers=workers,
                      base_dir=base_dir)
    logger.info("scenario %s: mode %s, %d paths, seed %d", config_path,
                run.mode, config["mc"]["n_paths"], config["mc"]["seed"])

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        failure = None
        try:
            outcome.summary = run.execute()
        except StochflowError as error:
            failure = error
            outcome.exit_code = exit_code_for(error)
            logger.error("scenario failed: %s", error)
    captured = [_warning_record(m) for m in caught]
    escalated = [m for m in caught if issubclass(m.category, STRICT_WARNINGS)]
    outcome.warnings = captured
    for record in captured:
        logger.warning("%s: %s", record["category"], record["message"])

    if failure is None and strict:
        failed_check = run.mode == DRIFTLESS and not run.summary["passed"]
        if escalated or failed_check:
            reasons = [r["message"] for r in map(_warning_record, escalated)]
            if failed_check:
                reasons.append("The driftless representation check failed.")
            failure = StrictModeFailure("Strict mode: %s" % " ".join(reasons),
                                      warnings=[_warning_record(m)
                                                for m in escalated])
            outcome.exit_code = EXIT_STRICT

    writers.write_json(run.path("metadata.json"),
                       metadata(config, run, captured, outcome.exit_code))
    outcome.artifacts = list(run.artifacts)
    if failure is not None:
        return _fail(outcome, failure.as_dict())
    logger.info("scenario %s finished: %s", config_path,
                ", ".join(sorted(run.artifacts)))
    return outcome


def validate_scenario(config_path):
    """The resolved config of ``config_path``; raises like ``run_scenario``."""
    config_path = str(config_path)
    base_dir = os.path.dirname(os.path.abspath(config_path))
    return validate_config(load_config(config_path), base_dir)
