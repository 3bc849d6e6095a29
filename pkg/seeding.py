"""
Seeded substreams for trial-parallel experiments.

A stream is identified by (seed, *keys). String keys are hashed with BLAKE2b
so experiment ids map to stable 64-bit words; the words feed a SeedSequence
which drives a counter-based Philox generator. The same identifiers give the
same draws no matter which thread runs the trial.
"""

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, TypeVar, Union

import numpy as np

from routing_errors import ParameterError

logger = logging.getLogger("Seeding")

SeedLike = Union[int, np.random.Generator, None]
T = TypeVar("T")


def _key_word(key: Union[int, str]) -> int:
    if isinstance(key, (bool, np.bool_)):
        return int(key)
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ParameterError(f"Stream keys must be non-negative, got {key}")
        return int(key)
    digest = hashlib.blake2b(str(key).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def make_rng(seed: SeedLike, *keys: Union[int, str]) -> np.random.Generator:
    """
    Build the generator for one substream.

    Args:
        seed: root seed, or an existing Generator (returned as-is when no keys
            are given, otherwise used to draw a root seed)
        keys: experiment id, trial index, and any other stream labels

    Returns:
        numpy Generator backed by Philox
    """
    if isinstance(seed, np.random.Generator):
        if not keys:
            return seed
        seed = int(seed.integers(0, 2**63 - 1))
    if seed is None:
        seed = 0
    if int(seed) < 0:
        raise ParameterError(f"Seed must be non-negative, got {seed}")
    entropy = [int(seed)] + [_key_word(k) for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed: SeedLike, *keys: Union[int, str]) -> int:
    """Integer seed for a substream, for APIs that take plain ints."""
    return int(make_rng(seed, *keys).integers(0, 2**63 - 1))


def random_permutation(n: int, seed: SeedLike, *keys: Union[int, str]) -> np.ndarray:
    return make_rng(seed, *keys).permutation(n)


def map_trials(
    func: Callable[[int, np.random.Generator], T],
    trials: int,
    seed: SeedLike,
    experiment_id: str,
    workers: Optional[int] = None,
) -> List[T]:
    """
    Run func(trial_index, rng) for every trial and return results in trial order.

    Each trial gets make_rng(seed, experiment_id, trial_index), so the output
    does not depend on the worker count.
    """
    if trials < 0:
        raise ParameterError(f"trials must be >= 0, got {trials}")
    if isinstance(seed, np.random.Generator):
        seed = derive_seed(seed)
    rngs = [make_rng(seed, experiment_id, t) for t in range(trials)]

    if workers is None:
        from routing_config import get_settings
        workers = get_settings().workers

    if workers <= 1 or trials <= 1:
        return [func(t, rngs[t]) for t in range(trials)]

    logger.debug(f"{experiment_id}: {trials} trials on {workers} workers")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {t: pool.submit(func, t, rngs[t]) for t in range(trials)}
        return [futures[t].result() for t in sorted(futures)]
