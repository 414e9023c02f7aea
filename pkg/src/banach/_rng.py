"""Seed handling and the fixed-chunk determinism contract.

Every Monte Carlo routine in the package draws from substreams derived
deterministically from a single 64-bit root seed and a chunk index.  The
chunk size is a package constant, not a tuning knob: chunk boundaries fix
which numbers each sample sees, so replays are bit-exact and independent
of how many workers process the chunks.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

CHUNK = 4096


def as_generator(rng) -> np.random.Generator:
    """Coerce an int seed, SeedSequence or Generator into a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, np.random.SeedSequence):
        return np.random.default_rng(rng)
    if isinstance(rng, (int, np.integer)):
        if rng < 0:
            raise DomainError("seed must be non-negative")
        return np.random.default_rng(int(rng))
    raise DomainError(f"cannot interpret rng of type {type(rng).__name__}")


def root_seed(rng) -> int:
    """Extract a 64-bit root seed from an int or a Generator.

    Integers pass through unchanged, which is the recommended way to call
    the estimators: the chunked substreams (and hence every reported
    number) are then a pure function of the seed.  Passing a Generator is
    allowed for convenience; one draw is consumed to obtain the root.
    """
    if isinstance(rng, (int, np.integer)):
        if rng < 0:
            raise DomainError("seed must be non-negative")
        return int(rng)
    gen = as_generator(rng)
    return int(gen.integers(0, 2**63 - 1))


def chunk_generator(seed: int, index: int) -> np.random.Generator:
    """Generator for chunk `index` of the stream rooted at `seed`."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def chunk_sizes(n_samples: int, chunk: int = CHUNK):
    """Split n_samples into the fixed chunk layout."""
    sizes = []
    left = int(n_samples)
    while left > 0:
        take = min(chunk, left)
        sizes.append(take)
        left -= take
    return sizes


def gaussian_chunks(n: int, n_samples: int, seed: int):
    """Yield chunks of i.i.d. standard normal rows, shape (chunk, n)."""
    for i, size in enumerate(chunk_sizes(n_samples)):
        gen = chunk_generator(seed, i)
        yield gen.standard_normal((size, n))


def sphere_chunks(n: int, n_samples: int, seed: int):
    """Yield chunks of uniform unit vectors on S^{n-1}, shape (chunk, n)."""
    for block in gaussian_chunks(n, n_samples, seed):
        norms = np.linalg.norm(block, axis=1)
        # a zero draw has probability zero; nudge instead of resampling so
        # the stream layout stays aligned with the chunk index
        norms[norms < 1e-300] = 1.0
        yield block / norms[:, None]
