from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MCEstimate:
    """
    Monte Carlo mean with its standard error.

    ``mean`` and ``stderr`` share a shape: one row per target point,
    followed by the component axes of the estimated quantity.
    ``n_paths`` is the requested ensemble size per target and
    ``n_excluded`` the number of paths dropped per target.
    """

    mean: np.ndarray
    stderr: np.ndarray
    n_paths: int
    n_excluded: np.ndarray

    def z_score(self, expected):
        return z_scores(self.mean, self.stderr, expected)

    def __add__(self, other):
        return MCEstimate(
            mean=self.mean + other.mean,
            stderr=np.sqrt(self.stderr ** 2 + other.stderr ** 2),
            n_paths=self.n_paths,
            n_excluded=np.maximum(self.n_excluded, other.n_excluded),
        )

    def scaled(self, factor):
        return MCEstimate(
            mean=self.mean * factor,
            stderr=self.stderr * np.abs(factor),
            n_paths=self.n_paths,
            n_excluded=self.n_excluded,
        )


def z_scores(mean, stderr, expected):
    """
    Signed distance of ``mean`` from ``expected`` in standard errors.
    Exact agreement with a zero standard error scores 0, any other
    deviation with a zero standard error scores infinity.
    """
    mean = np.asarray(mean, dtype=float)
    stderr = np.asarray(stderr, dtype=float)
    delta = mean - np.asarray(expected, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(stderr > 0, delta / np.where(stderr > 0, stderr, 1.0),
                     np.where(np.abs(delta) <= 1e-13 * (1 + np.abs(mean)),
                              0.0, np.inf))
    return z


def combined_z_scores(first, second):
    """Z-scores of the difference of two independent estimates."""
    return z_scores(first.mean - second.mean,
                    np.sqrt(first.stderr ** 2 + second.stderr ** 2), 0.0)


def summarize(samples, valid=None, antithetic=False):
    """
    Reduce per-path samples to an ``MCEstimate``.

    ``samples`` has shape (targets, paths, *components). With
    ``antithetic`` the path axis holds base paths in its first half and
    their mirrored partners in the second half; each pair is averaged
    before the variance is taken, and a pair is dropped when either
    partner is invalid. Reductions run along a fixed axis order so the
    result does not depend on how the paths were produced.
    """
    samples = np.asarray(samples, dtype=float)
    n_targets, n_paths = samples.shape[:2]
    if valid is None:
        valid = np.ones((n_targets, n_paths), dtype=bool)

    if antithetic:
        half = n_paths // 2
        samples = 0.5 * (samples[:, :half] + samples[:, half:2 * half])
        valid = valid[:, :half] & valid[:, half:2 * half]

    extra = (1,) * (samples.ndim - 2)
    weights = valid.reshape(valid.shape + extra).astype(float)
    counts = valid.sum(axis=1)
    safe_counts = np.maximum(counts, 1).reshape((n_targets,) + extra)

    clean = np.where(weights > 0, samples, 0.0)
    mean = clean.sum(axis=1) / safe_counts
    deviation = np.where(weights > 0, samples - mean[:, None], 0.0)
    dof = np.maximum(counts - 1, 1).reshape((n_targets,) + extra)
    variance = (deviation ** 2).sum(axis=1) / dof
    stderr = np.sqrt(variance / safe_counts)

    if antithetic:
        excluded = n_paths - 2 * counts
    else:
        excluded = n_paths - counts
    return MCEstimate(mean=mean, stderr=stderr, n_paths=n_paths,
                      n_excluded=excluded)
