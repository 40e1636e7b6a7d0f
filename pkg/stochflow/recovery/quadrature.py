"""
Quadrature over diffusion time s for integrals of the form
int_0^inf f(s) ds, where f is bounded near zero and decays at least
like 1/s^2 for large s.
"""
from dataclasses import dataclass

import numpy as np

from stochflow.conf import settings


def length_scale(vorticity, domain=None):
    """
    Length over which ``vorticity`` varies: the radius of its support
    when it has one, else the domain scale.
    """
    domain = domain or vorticity.domain
    if domain is not None and domain.is_periodic:
        return float(min(domain.period)) / (2 * np.pi)
    if vorticity.support is not None and vorticity.support[1] > 0:
        return float(vorticity.support[1])
    if domain is not None:
        return float(domain.extent)
    return 1.0


@dataclass(frozen=True)
class SQuadrature:
    """
    Geometric nodes between ``s_min`` and ``s_max`` with trapezoid
    weights in ln s. The first weight also covers [0, s_min] with the
    integrand frozen at its first node.
    """

    s_min: float
    s_max: float
    n_nodes: int

    def __post_init__(self):
        if not 0 < self.s_min < self.s_max:
            raise ValueError("Need 0 < s_min < s_max.")
        if self.n_nodes < 2:
            raise ValueError("Need at least two quadrature nodes.")

    @classmethod
    def for_field(cls, vorticity, domain=None, n_nodes=None):
        domain = domain or vorticity.domain
        scale = length_scale(vorticity, domain)
        s_min = settings.RECOVERY_S_MIN_FACTOR * scale ** 2
        if domain is not None and domain.is_periodic:
            s_max = float(max(domain.period)) ** 2
        else:
            s_max = settings.RECOVERY_S_MAX_FACTOR * scale ** 2
        return cls(s_min=s_min, s_max=max(s_max, 10 * s_min),
                   n_nodes=int(n_nodes or settings.RECOVERY_S_NODES))

    @property
    def nodes(self):
        return np.geomspace(self.s_min, self.s_max, self.n_nodes)

    @property
    def weights(self):
        nodes = self.nodes
        step = np.log(self.s_max / self.s_min) / (self.n_nodes - 1)
        weights = nodes * step
        weights[0] *= 0.5
        weights[-1] *= 0.5
        weights[0] += self.s_min
        return weights

    def tail(self, last_value):
        """Bound on int_{s_max}^inf f ds for f decaying like 1/s^2."""
        return self.s_max * np.abs(last_value)

    def integrate(self, values):
        """Integrate node values given along the leading axis."""
        values = np.asarray(values, dtype=float)
        return np.tensordot(self.weights, values, axes=(0, 0))

    def as_dict(self):
        return {"s_min": self.s_min, "s_max": self.s_max,
                "n_nodes": self.n_nodes}
