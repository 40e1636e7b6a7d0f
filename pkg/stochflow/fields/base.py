"""
Field protocols shared by analytic and grid-sampled fields.

Points are always passed as (N, dim) arrays. Gradients follow the
deformation-tensor layout ``G[..., i, j] = d v_i / d x_j``.
"""
import numpy as np

from stochflow.core.exceptions import DimensionError

FD_STEP = 1e-5


def as_points(points, dim):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[-1] != dim:
        raise DimensionError("Expected %dD points, got shape %r"
                             % (dim, points.shape), dim=dim)
    return points


def central_difference(func, points, step=FD_STEP):
    """
    Central-difference Jacobian of ``func`` at ``points``. Returns
    (N, dim) for scalar-valued ``func`` and (N, c, dim) otherwise.
    """
    dim = points.shape[-1]
    columns = []
    for j in range(dim):
        shift = np.zeros(dim)
        shift[j] = step
        columns.append((np.asarray(func(points + shift))
                        - np.asarray(func(points - shift))) / (2 * step))
    return np.stack(columns, axis=-1)


class Field(object):
    dim = 2
    domain = None

    def points(self, points):
        return as_points(points, self.dim)

    def describe(self):
        return {"type": type(self).__name__, "dim": self.dim}


class ScalarField(Field):
    """A time-independent scalar field f with gradient."""

    def __call__(self, points):
        raise NotImplementedError

    def gradient(self, points):
        points = self.points(points)
        return central_difference(self, points)


class VelocityField(Field):
    """
    A time-dependent velocity u(t, x). Subclasses implement ``__call__``
    and usually ``gradient``; 2D fields may offer a stream function with
    u = perp_grad(psi) = (d2 psi, -d1 psi).
    """

    steady = False
    has_stream = False

    def __call__(self, time, points):
        raise NotImplementedError

    def gradient(self, time, points):
        points = self.points(points)
        return central_difference(lambda p: self(time, p), points)

    def stream(self, time, points):
        raise NotImplementedError("%s has no stream function"
                                  % type(self).__name__)

    def stream_function(self, time):
        """The stream function frozen at ``time`` as a ScalarField."""
        if self.dim != 2 or not self.has_stream:
            raise DimensionError("Only 2D fields with a stream function "
                                 "have one to freeze.")
        return StreamFunction(self, time)

    def vorticity(self, time):
        """The curl of this field at ``time`` as a VorticityField."""
        return CurlOf(self, time)


class VorticityField(Field):
    """
    Vorticity at a fixed time: a scalar in 2D, the adjoint vector of
    the vorticity 2-form in 3D.

    ``support`` is ``(center, radius)`` when the field vanishes (to
    rounding) outside a ball, and ``None`` otherwise.
    """

    support = None

    @property
    def components(self):
        return 1 if self.dim == 2 else 3

    def __call__(self, points):
        raise NotImplementedError

    def gradient(self, points):
        points = self.points(points)
        return central_difference(self, points)

    def __add__(self, other):
        return LinearCombination([(1.0, self), (1.0, other)])

    def __mul__(self, factor):
        return LinearCombination([(float(factor), self)])

    __rmul__ = __mul__


class StreamFunction(ScalarField):

    def __init__(self, velocity, time):
        self.velocity = velocity
        self.time = time
        self.dim = velocity.dim
        self.domain = velocity.domain

    def __call__(self, points):
        return self.velocity.stream(self.time, self.points(points))

    def gradient(self, points):
        # u = (d2 psi, -d1 psi)
        u = self.velocity(self.time, self.points(points))
        return np.stack([-u[:, 1], u[:, 0]], axis=-1)


class CurlOf(VorticityField):

    def __init__(self, velocity, time):
        self.velocity = velocity
        self.time = time
        self.dim = velocity.dim
        self.domain = velocity.domain

    def __call__(self, points):
        from stochflow.fields.operators import curl
        return curl(self.velocity, self.time, self.points(points))


class LinearCombination(VorticityField):

    def __init__(self, terms):
        flat = []
        for weight, field in terms:
            if isinstance(field, LinearCombination):
                flat.extend((weight * w, f) for w, f in field.terms)
            else:
                flat.append((weight, field))
        dims = {field.dim for _, field in flat}
        if len(dims) != 1:
            raise DimensionError("Cannot combine fields of different "
                                 "dimension.")
        self.terms = flat
        self.dim = dims.pop()
        self.domain = flat[0][1].domain
        supports = [field.support for _, field in flat]
        if all(s is not None for s in supports):
            centers = np.array([s[0] for s in supports], dtype=float)
            center = centers.mean(axis=0)
            radius = max(np.linalg.norm(c - center) + s[1]
                         for c, s in zip(centers, supports))
            self.support = (center, radius)

    def __call__(self, points):
        points = self.points(points)
        return sum(w * np.asarray(f(points)) for w, f in self.terms)

    def gradient(self, points):
        points = self.points(points)
        return sum(w * np.asarray(f.gradient(points)) for w, f in self.terms)

    def describe(self):
        return {"type": "LinearCombination",
                "terms": [[w, f.describe()] for w, f in self.terms]}
