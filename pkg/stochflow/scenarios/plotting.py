"""
Static figures written beside the result files. They are for looking at
only; nothing reads them back.
"""
import logging

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from stochflow.conf import settings  # noqa: E402

logger = logging.getLogger(__name__)


def _save(fig, path):
    fig.savefig(path, dpi=int(settings.SCENARIO_PLOT_DPI),
                bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    logger.debug("wrote %s", path)
    return path


def _magnitude(values, dim):
    if values.ndim == dim:
        return values, "value"
    return np.sqrt(np.sum(values ** 2, axis=-1)), "magnitude"


def plot_grid_field(path, grid, title):
    """
    Colour map of a grid field; a vector field shows its magnitude and a
    3D field its mid-plane across the last axis.
    """
    values, label = _magnitude(grid.values, grid.dim)
    lower, sides = grid.domain.box()
    if grid.dim == 3:
        values = values[:, :, values.shape[2] // 2]
        title = "%s (z mid-plane)" % title
    fig, ax = plt.subplots(figsize=(5, 4.5))
    image = ax.imshow(values.T, origin="lower", cmap="RdBu_r",
                      extent=(lower[0], lower[0] + sides[0],
                              lower[1], lower[1] + sides[1]))
    fig.colorbar(image, ax=ax, label=label)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    return _save(fig, path)


def plot_point_estimates(path, points, estimate, title):
    """Estimates at planar target points, coloured by value."""
    points = np.atleast_2d(points)
    mean = np.asarray(estimate.mean).reshape(len(points), -1)
    values = mean[:, 0] if mean.shape[1] == 1 else np.linalg.norm(mean,
                                                                   axis=1)
    fig, ax = plt.subplots(figsize=(5, 4.5))
    scatter = ax.scatter(points[:, 0], points[:, 1], c=values, cmap="viridis")
    fig.colorbar(scatter, ax=ax,
                 label="estimate" if mean.shape[1] == 1 else "magnitude")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    return _save(fig, path)


def plot_diagnostics(path, states):
    times = [s.time for s in states]
    fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(6, 5))
    top.plot(times, [s.diagnostics.kinetic_energy for s in states], "o-")
    top.set_ylabel("kinetic energy")
    bottom.plot(times, [s.diagnostics.enstrophy for s in states], "o-",
                color="tab:red")
    bottom.set_ylabel("enstrophy")
    bottom.set_xlabel("t")
    return _save(fig, path)


def plot_energy(path, rate, fitted):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(rate.times, rate.energies, yerr=rate.energy_stderr, fmt="o",
                label="estimate")
    ax.plot(rate.times, fitted, "-",
            label="fit, rate %.4g" % rate.rate)
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("mean |B|^2 at probes")
    ax.legend()
    return _save(fig, path)


def plot_particles(path, ensemble, domain):
    positions = ensemble.positions
    fig, ax = plt.subplots(figsize=(5, 5))
    for track in positions[:, :, :2]:
        ax.plot(track[:, 0], track[:, 1], lw=0.6)
    if domain.is_periodic:
        lower, sides = domain.box()
        ax.set_xlim(lower[0], lower[0] + sides[0])
        ax.set_ylim(lower[1], lower[1] + sides[1])
    ax.set_aspect("equal")
    ax.set_title("particle tracks")
    return _save(fig, path)
