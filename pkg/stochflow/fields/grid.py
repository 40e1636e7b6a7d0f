"""
Fields sampled on uniform grids.

Values are interpolated with prefiltered B-splines (cubic by default)
so that gradients are continuous. On the torus the splines wrap around;
in free space the field is taken to vanish outside the box.
"""
import io
import json
import logging
import threading

import numpy as np
from scipy import ndimage

from stochflow.conf import settings
from stochflow.core.exceptions import ConfigurationError, DimensionError
from stochflow.fields.base import VelocityField, VorticityField, as_points
from stochflow.fields.domain import Domain
from stochflow.fields.operators import (curl_of_gradient, fd_gradient,
                                        spectral_gradient, wavenumbers)

logger = logging.getLogger(__name__)

FORMAT = "stochflow-grid"


class GridField(object):
    """
    ``values`` has the grid shape, optionally followed by one trailing
    component axis. Node ``(i, j, ...)`` sits at ``origin + index *
    spacing`` with origin and spacing given by the domain.

    Values never change after construction. Spline coefficients and
    derivative grids are built on first use under a lock, so worker
    threads can share one field.
    """

    def __init__(self, values, domain, order=None):
        values = np.asarray(values, dtype=float)
        if values.ndim not in (domain.dim, domain.dim + 1):
            raise DimensionError("Grid values of shape %r do not fit a %dD "
                                 "domain" % (values.shape, domain.dim))
        self.values = values
        self.domain = domain
        self.order = int(order or settings.FIELDS_INTERPOLATION_ORDER)
        axes = domain.axes(self.shape)
        self.origin = np.array([a[0] for a in axes])
        if domain.is_periodic:
            self.spacing = np.asarray(domain.period) / np.asarray(self.shape)
        else:
            self.spacing = np.array([a[1] - a[0] for a in axes])
        self._coefficients = {}
        self._derivatives = None
        self._lock = threading.Lock()

    @property
    def dim(self):
        return self.domain.dim

    @property
    def shape(self):
        return self.values.shape[:self.domain.dim]

    @property
    def components(self):
        if self.values.ndim == self.domain.dim:
            return None
        return self.values.shape[-1]

    @property
    def mode(self):
        return "grid-wrap" if self.domain.is_periodic else "grid-constant"

    @classmethod
    def sample(cls, func, domain, shape, order=None):
        """Sample ``func`` on the nodes of a ``shape`` grid over ``domain``."""
        nodes = domain.nodes(shape)
        values = np.asarray(func(nodes), dtype=float)
        values = values.reshape(tuple(shape) + values.shape[1:])
        return cls(values, domain, order=order)

    def nodes(self):
        return self.domain.nodes(self.shape)

    def _spline(self, array, key):
        if self.order <= 1:
            return array
        coefficients = self._coefficients.get(key)
        if coefficients is None:
            with self._lock:
                if key not in self._coefficients:
                    self._coefficients[key] = ndimage.spline_filter(
                        array, order=self.order, mode=self.mode)
                coefficients = self._coefficients[key]
        return coefficients

    def _component_arrays(self, values):
        if values.ndim == self.dim:
            return [values]
        flat = values.reshape(self.shape + (-1,))
        return [flat[..., c] for c in range(flat.shape[-1])]

    def _interpolate(self, values, points, tag):
        points = as_points(points, self.dim)
        if self.domain.is_periodic:
            points = self.domain.wrap(points)
        coordinates = ((points - self.origin) / self.spacing).T
        out = [ndimage.map_coordinates(
                   self._spline(array, (tag, c)), coordinates,
                   order=self.order, mode=self.mode, cval=0.0,
                   prefilter=False)
               for c, array in enumerate(self._component_arrays(values))]
        result = np.stack(out, axis=-1)
        tail = values.shape[self.dim:]
        return result.reshape((points.shape[0],) + tail)

    def __call__(self, points):
        return self._interpolate(self.values, points, "values")

    def derivatives(self):
        """Grid of first derivatives, derivative axis last."""
        if self._derivatives is None:
            with self._lock:
                if self._derivatives is None:
                    self._derivatives = self._differentiate()
        return self._derivatives

    def _differentiate(self):
        if self.domain.is_periodic:
            return spectral_gradient(self.values, self.domain.period)
        return fd_gradient(self.values, self.spacing)

    def gradient(self, points):
        return self._interpolate(self.derivatives(), points, "gradient")

    def integral(self):
        """Sum over the grid times the cell volume."""
        return self.values.sum(axis=tuple(range(self.dim))) * np.prod(
            self.spacing)

    def header(self):
        return {"format": FORMAT, "domain": self.domain.as_dict(),
                "shape": list(self.shape), "components": self.components,
                "order": self.order}

    def to_csv(self, path):
        """
        One ``# `` prefixed JSON header line, then one row per node in
        row-major order with one column per component. Floats are
        written with ``repr`` so reading back is bit exact.
        """
        rows = self.values.reshape(int(np.prod(self.shape)), -1)
        with open(path, "w") as handle:
            handle.write("# %s\n" % json.dumps(self.header(), sort_keys=True))
            for row in rows:
                handle.write(",".join(repr(float(v)) for v in row) + "\n")

    @classmethod
    def from_csv(cls, path):
        with open(path) as handle:
            first = handle.readline()
            if not first.startswith("# "):
                raise ConfigurationError("%s has no grid header line" % path,
                                         path=str(path))
            header = json.loads(first[2:])
            rows = np.loadtxt(io.StringIO(handle.read()), delimiter=",",
                              dtype=float, ndmin=2)
        return cls._from_header(header, rows, path)

    def to_json(self, path):
        data = dict(self.header(),
                    values=[repr(float(v)) for v in self.values.ravel()])
        with open(path, "w") as handle:
            json.dump(data, handle, sort_keys=True)

    @classmethod
    def from_json(cls, path):
        with open(path) as handle:
            data = json.load(handle)
        values = np.array([float(v) for v in data.pop("values")])
        return cls._from_header(data, values, path)

    @classmethod
    def load(cls, path):
        path = str(path)
        if path.endswith(".json"):
            return cls.from_json(path)
        return cls.from_csv(path)

    @classmethod
    def _from_header(cls, header, values, path):
        if header.get("format") != FORMAT:
            raise ConfigurationError("%s is not a grid field file" % path,
                                     path=str(path))
        shape = tuple(header["shape"])
        if header.get("components"):
            shape = shape + (header["components"],)
        values = np.asarray(values, dtype=float)
        if values.size != int(np.prod(shape)):
            raise ConfigurationError("%s holds %d values, expected %d"
                                     % (path, values.size, np.prod(shape)),
                                     path=str(path))
        return cls(values.reshape(shape), Domain.from_dict(header["domain"]),
                   order=header.get("order"))


class GridVorticityField(VorticityField):

    def __init__(self, grid):
        self.grid = grid
        self.domain = grid.domain
        self.dim = grid.dim
        if not self.domain.is_periodic:
            lower, sides = self.domain.box()
            self.support = (lower + sides / 2.0,
                            0.5 * float(np.linalg.norm(sides)))

    @classmethod
    def sample(cls, vorticity, domain, shape, order=None):
        return cls(GridField.sample(vorticity, domain, shape, order=order))

    def __call__(self, points):
        return self.grid(points)

    def gradient(self, points):
        return self.grid.gradient(points)

    def circulation(self):
        return self.grid.integral()

    def describe(self):
        return {"type": "GridVorticityField", "grid": self.grid.header()}


class GridVelocityField(VelocityField):
    """
    Velocity known on one or more time slices. Between slices values
    and gradients are interpolated linearly in time; outside the stored
    range the nearest slice is used.
    """

    def __init__(self, slices, times=None):
        if isinstance(slices, GridField):
            slices = [slices]
        self.slices = list(slices)
        if times is None:
            times = [0.0] * len(self.slices)
        if len(times) != len(self.slices):
            raise ValueError("Need one time per velocity slice.")
        self.times = [float(t) for t in times]
        if self.times != sorted(self.times):
            raise ValueError("Velocity slices must be in time order.")
        self.domain = self.slices[0].domain
        self.dim = self.domain.dim
        self.steady = len(self.slices) == 1
        self.has_stream = self.dim == 2 and self.domain.is_periodic
        self._streams = {}
        self._lock = threading.Lock()

    @classmethod
    def sample(cls, velocity, domain, shape, times=(0.0,), order=None):
        slices = [GridField.sample(lambda p, t=t: velocity(t, p), domain,
                                   shape, order=order) for t in times]
        return cls(slices, times=list(times))

    def _weights(self, time):
        if self.steady or time <= self.times[0]:
            return [(1.0, 0)]
        if time >= self.times[-1]:
            return [(1.0, len(self.times) - 1)]
        upper = int(np.searchsorted(self.times, time, side="right"))
        lower = upper - 1
        span = self.times[upper] - self.times[lower]
        theta = (time - self.times[lower]) / span
        return [(1.0 - theta, lower), (theta, upper)]

    def _blend(self, time, evaluate):
        total = None
        for weight, index in self._weights(time):
            if weight == 0.0:
                continue
            part = weight * evaluate(self.slices[index])
            total = part if total is None else total + part
        return total

    def __call__(self, time, points):
        points = self.points(points)
        return self._blend(time, lambda grid: grid(points))

    def gradient(self, time, points):
        points = self.points(points)
        return self._blend(time, lambda grid: grid.gradient(points))

    def _stream_grid(self, index):
        with self._lock:
            if index not in self._streams:
                self._streams[index] = self._solve_stream(index)
        return self._streams[index]

    def _solve_stream(self, index):
        grid = self.slices[index]
        omega = curl_of_gradient(grid.derivatives())
        k1, k2 = wavenumbers(grid.shape, grid.domain.period)
        k_squared = k1 ** 2 + k2 ** 2
        k_squared[0, 0] = 1.0
        # -lap psi = omega, mean of psi dropped
        transform = np.fft.fft2(omega) / k_squared
        transform[0, 0] = 0.0
        return GridField(np.real(np.fft.ifft2(transform)), grid.domain,
                         order=grid.order)

    def stream(self, time, points):
        if not self.has_stream:
            return super(GridVelocityField, self).stream(time, points)
        points = self.points(points)
        total = 0.0
        for weight, index in self._weights(time):
            total = total + weight * self._stream_grid(index)(points)
        return total

    def vorticity_grid(self, index=-1):
        grid = self.slices[index]
        return GridField(curl_of_gradient(grid.derivatives()), grid.domain,
                         order=grid.order)

    def describe(self):
        return {"type": "GridVelocityField", "times": self.times,
                "grid": self.slices[0].header()}
