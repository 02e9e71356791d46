"""Deterministic replicate streams and the parallel replicate runner.

Replicates are grouped into fixed-size chunks.  Chunk ``j`` of stream ``s``
under seed ``seed`` always draws from
``SeedSequence(seed, spawn_key=(s, j))``, so a result depends only on
``(seed, stream, reps)`` and never on how chunks are spread over workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable

import numpy as np

from ..errors import DomainError

CHUNK = 250

# named streams keep calibration, validation and main runs independent
STREAMS = {
    "main": 0,
    "calibration": 1,
    "validation": 2,
    "pilot": 3,
    "mgf": 4,
    "hoeffding": 5,
}


def stream_id(stream: int | str) -> int:
    if isinstance(stream, str):
        try:
            return STREAMS[stream]
        except KeyError:
            raise DomainError(f"unknown stream {stream!r}; known: {sorted(STREAMS)}") from None
    if stream < 0:
        raise DomainError("stream ids must be nonnegative")
    return int(stream)


def chunk_rng(seed: int, stream: int | str, chunk: int) -> np.random.Generator:
    if seed < 0:
        raise DomainError(f"seed must be nonnegative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(stream_id(stream), chunk)))


def _chunk_sizes(reps: int, chunk: int) -> list[int]:
    full, rest = divmod(reps, chunk)
    return [chunk] * full + ([rest] if rest else [])


def _run_block(kernel, seed, stream, start, sizes):
    return [kernel(chunk_rng(seed, stream, start + j), size) for j, size in enumerate(sizes)]


def run_replicates(
    kernel: Callable[[np.random.Generator, int], np.ndarray],
    reps: int,
    seed: int,
    stream: int | str = "main",
    workers: int = 1,
    chunk: int = CHUNK,
) -> np.ndarray:
    """Run ``kernel(rng, count)`` over all chunks and stack results in order.

    ``kernel`` must return an array with leading dimension ``count`` and be
    picklable when ``workers > 1``.
    """
    if reps < 1:
        raise DomainError(f"reps must be positive, got {reps}")
    if workers < 1:
        raise DomainError(f"workers must be positive, got {workers}")
    sizes = _chunk_sizes(reps, chunk)
    workers = min(workers, len(sizes))
    if workers == 1:
        parts = _run_block(kernel, seed, stream, 0, sizes)
    else:
        # contiguous blocks of chunks, one per worker, reassembled in order
        bounds = np.linspace(0, len(sizes), workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_block, kernel, seed, stream, int(a), sizes[a:b])
                for a, b in zip(bounds[:-1], bounds[1:])
            ]
            parts = [part for f in futures for part in f.result()]
    return np.concatenate(parts, axis=0)
