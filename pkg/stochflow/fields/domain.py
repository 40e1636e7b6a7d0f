from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from stochflow.core.exceptions import DimensionError, UnsupportedDomainError

FREE_SPACE = "free-space"
TORUS = "periodic-torus"

DOMAIN_KINDS = (FREE_SPACE, TORUS)


@dataclass(frozen=True)
class Domain:
    """
    A flat domain: all of R^n, or the torus R^n / (period Z^n).

    Free space carries an ``extent`` used only when a field has to be
    sampled on a finite box, ``[-extent, extent]`` along every axis.
    """

    kind: str
    dim: int
    period: Optional[Tuple[float, ...]] = None
    extent: float = 5.0

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise UnsupportedDomainError("Unknown domain kind %r" % self.kind,
                                         kind=self.kind)
        if self.dim not in (2, 3):
            raise DimensionError("Only 2D and 3D domains are supported.",
                                 dim=self.dim)
        if self.kind == TORUS:
            if self.period is None or len(self.period) != self.dim:
                raise UnsupportedDomainError(
                    "A torus needs one period per axis.", period=self.period)
            if min(self.period) <= 0:
                raise UnsupportedDomainError("Periods must be positive.",
                                             period=self.period)

    @classmethod
    def free_space(cls, dim, extent=5.0):
        return cls(kind=FREE_SPACE, dim=dim, extent=float(extent))

    @classmethod
    def torus(cls, dim, period=2 * np.pi):
        if np.isscalar(period):
            period = (float(period),) * dim
        return cls(kind=TORUS, dim=dim, period=tuple(float(p) for p in period))

    @property
    def is_periodic(self):
        return self.kind == TORUS

    @property
    def scale(self):
        """Characteristic length: the largest period, or the box extent."""
        if self.is_periodic:
            return max(self.period)
        return self.extent

    @property
    def volume(self):
        if self.is_periodic:
            return float(np.prod(self.period))
        return float((2 * self.extent) ** self.dim)

    def wrap(self, points):
        """Reduce periodic coordinates to [0, period)."""
        if not self.is_periodic:
            return points
        period = np.asarray(self.period)
        wrapped = np.mod(points, period)
        # np.mod can round a tiny negative value up to exactly the period.
        return np.where(wrapped >= period, 0.0, wrapped)

    def minimal_image(self, delta):
        if not self.is_periodic:
            return delta
        period = np.asarray(self.period)
        return delta - period * np.round(delta / period)

    def box(self):
        """Lower corner and side lengths of the sampling box."""
        if self.is_periodic:
            return np.zeros(self.dim), np.asarray(self.period)
        return (np.full(self.dim, -self.extent),
                np.full(self.dim, 2 * self.extent))

    def axes(self, shape):
        """
        Node coordinates along each axis for a grid of ``shape``. Torus
        grids leave out the right end point, free-space boxes keep it.
        """
        if len(shape) != self.dim:
            raise DimensionError("Grid shape %r does not match a %dD domain"
                                 % (tuple(shape), self.dim))
        lower, sides = self.box()
        if self.is_periodic:
            return [lower[i] + sides[i] * np.arange(n) / n
                    for i, n in enumerate(shape)]
        return [np.linspace(lower[i], lower[i] + sides[i], n)
                for i, n in enumerate(shape)]

    def nodes(self, shape):
        """All grid nodes as an (N, dim) array in row-major order."""
        mesh = np.meshgrid(*self.axes(shape), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def as_dict(self):
        data = {"kind": self.kind, "dim": self.dim}
        if self.is_periodic:
            data["period"] = list(self.period)
        else:
            data["extent"] = self.extent
        return data

    @classmethod
    def from_dict(cls, data):
        if data["kind"] == TORUS:
            return cls.torus(int(data["dim"]), data.get("period", 2 * np.pi))
        return cls.free_space(int(data["dim"]), data.get("extent", 5.0))
