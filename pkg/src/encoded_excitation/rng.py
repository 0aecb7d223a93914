"""Counter-based random streams for Monte-Carlo trials.

Trial ``i`` of a run with seed ``s`` always draws from the same Philox
stream, keyed by ``s`` with ``i`` in the counter, so results do not depend
on trial order or on how trials are split between worker processes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterator

import numpy as np

_MASK64 = (1 << 64) - 1


def trial_rng(seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    if seed < 0 or trial < 0 or stream < 0:
        raise ValueError("seed, trial and stream must be non-negative")
    counter = [0, 0, stream & _MASK64, trial & _MASK64]
    return np.random.Generator(np.random.Philox(key=seed & ((1 << 128) - 1), counter=counter))


def trial_rngs(seed: int, trials: int, *, start: int = 0, stream: int = 0) -> Iterator[np.random.Generator]:
    for i in range(start, start + trials):
        yield trial_rng(seed, i, stream)


def _run_chunk(fn, seed, start, stop, stream):
    return [fn(trial_rng(seed, i, stream)) for i in range(start, stop)]


def map_trials(fn: Callable[[np.random.Generator], object], seed: int, trials: int, *,
               workers: int = 1, stream: int = 0) -> np.ndarray:
    """Evaluate ``fn(rng)`` for every trial and stack the results in trial order.

    ``fn`` must be picklable (a module-level function or a partial of one)
    when ``workers > 1``.
    """
    if trials < 0:
        raise ValueError("trials must be non-negative")
    if workers <= 1 or trials < 2:
        return np.asarray(_run_chunk(fn, seed, 0, trials, stream))
    bounds = np.linspace(0, trials, min(workers, trials) + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_chunk, fn, seed, int(a), int(b), stream) for a, b in zip(bounds[:-1], bounds[1:])]
        parts = [f.result() for f in futures]
    return np.asarray([x for part in parts for x in part])
