"""
Counter-based random streams.

A stream is addressed by ``(master_seed, stream_id, block)`` and backed
by a Philox generator whose 128-bit key packs the three numbers, so any
block can be regenerated on its own and on any worker without touching
the others.
"""
from dataclasses import dataclass, replace

import numpy as np

from stochflow.conf import settings
from stochflow.core.exceptions import ConfigurationError

PHILOX = "philox4x64-10"

_SEED_LIMIT = 2 ** 64
_STREAM_LIMIT = 2 ** 32


@dataclass(frozen=True)
class RandomSource:
    master_seed: int
    stream_id: int = 0
    algorithm: str = PHILOX

    def __post_init__(self):
        if self.algorithm != PHILOX:
            raise ConfigurationError(
                "Unsupported random algorithm %r" % self.algorithm,
                algorithm=self.algorithm)
        if not 0 <= int(self.master_seed) < _SEED_LIMIT:
            raise ConfigurationError("master seed must fit in 64 bits",
                                     master_seed=self.master_seed)
        if not 0 <= int(self.stream_id) < _STREAM_LIMIT:
            raise ConfigurationError("stream id must fit in 32 bits",
                                     stream_id=self.stream_id)

    @classmethod
    def from_seed(cls, seed, stream_id=0):
        return cls(master_seed=int(seed), stream_id=int(stream_id),
                   algorithm=settings.SDE_RNG_ALGORITHM)

    def spawn(self, stream_id):
        """A sibling source on another stream of the same seed."""
        return replace(self, stream_id=int(stream_id) % _STREAM_LIMIT)

    def key(self, block=0):
        return (int(self.master_seed)
                | (int(self.stream_id) << 64)
                | ((int(block) % _STREAM_LIMIT) << 96))

    def generator(self, block=0):
        return np.random.Generator(np.random.Philox(key=self.key(block)))

    def as_dict(self):
        return {"algorithm": self.algorithm, "master_seed": self.master_seed,
                "stream_id": self.stream_id}


@dataclass(frozen=True)
class WienerIncrements:
    """
    Brownian increments for a block of paths, shape
    (n_steps, n_paths, dim), each entry distributed as N(0, dt).
    """

    increments: np.ndarray
    dt: float

    @property
    def n_steps(self):
        return self.increments.shape[0]

    @property
    def n_paths(self):
        return self.increments.shape[1]

    @classmethod
    def draw(cls, source, block, n_steps, n_paths, dim, dt):
        normals = source.generator(block).standard_normal(
            (n_steps, n_paths, dim))
        return cls(increments=normals * np.sqrt(dt), dt=dt)

    def mirrored(self):
        return WienerIncrements(increments=-self.increments, dt=self.dt)


def path_blocks(n_paths, block_size=None):
    """
    Split ``range(n_paths)`` into the fixed stream blocks used for
    drawing increments. Yields ``(block, start, stop)``.
    """
    block_size = int(block_size or settings.SDE_PATHS_PER_STREAM)
    for block, start in enumerate(range(0, n_paths, block_size)):
        yield block, start, min(start + block_size, n_paths)


def standard_normals(source, n_rows, shape, block_size=None, block_offset=0):
    """
    Draw ``n_rows`` independent standard normal arrays of ``shape`` with
    the same block layout as path increments, so the result does not
    depend on how callers batch their rows. Blocks are numbered from
    ``block_offset``.
    """
    out = np.empty((n_rows,) + tuple(shape))
    for block, start, stop in path_blocks(n_rows, block_size):
        out[start:stop] = source.generator(block_offset + block).standard_normal(
            (stop - start,) + tuple(shape))
    return out


def blocks_needed(n_rows, block_size=None):
    block_size = int(block_size or settings.SDE_PATHS_PER_STREAM)
    return -(-int(n_rows) // block_size)
