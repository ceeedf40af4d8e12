"""
Random regular expander families from the pairing (configuration) model.

Each size draws from its own generator seeded by (seed, n), so sizes can be
sampled in any order or in parallel and still give the same graphs.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import numpy as np

from app.config import settings
from app.errors import InvalidParams, SamplingExhausted
from .regular_graph import RegularGraph, build_regular_graph, is_connected
from .spectrum import laplacian_spectrum

logger = logging.getLogger(__name__)


def size_rng(seed: int, n: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(n)]))


def _pairing_attempt(n: int, k: int, rng: np.random.Generator) -> Optional[np.ndarray]:
    stubs = rng.permutation(np.repeat(np.arange(n), k))
    pairs = np.sort(stubs.reshape(-1, 2), axis=1)
    if np.any(pairs[:, 0] == pairs[:, 1]):
        return None
    if np.unique(pairs, axis=0).shape[0] != pairs.shape[0]:
        return None
    return pairs


def sample_expander(
    n: int,
    k: int,
    gap_threshold: float,
    seed: int,
    max_attempts: Optional[int] = None,
) -> RegularGraph:
    max_attempts = max_attempts or settings.max_sampling_attempts
    rng = size_rng(seed, n)
    rejected = {"loop_or_multi": 0, "disconnected": 0, "gap": 0}

    for attempt in range(1, max_attempts + 1):
        pairs = _pairing_attempt(n, k, rng)
        if pairs is None:
            rejected["loop_or_multi"] += 1
            continue
        graph = build_regular_graph(n, k, pairs.tolist())
        if not is_connected(graph):
            rejected["disconnected"] += 1
            continue
        lambda1 = laplacian_spectrum(graph).lambda1
        if lambda1 < gap_threshold:
            rejected["gap"] += 1
            logger.debug(f"n={n}: attempt {attempt} rejected, lambda1={lambda1:.4g} < {gap_threshold}")
            continue
        logger.info(f"Sampled {k}-regular graph on {n} vertices after {attempt} attempts, lambda1={lambda1:.6g}")
        return graph

    raise SamplingExhausted(
        f"no simple connected {k}-regular graph on {n} vertices with lambda1 >= {gap_threshold} "
        f"after {max_attempts} attempts (rejections: {rejected})"
    )


def generate_expander_family(
    sizes: Sequence[int],
    k: int,
    gap_threshold: float = None,
    seed: int = None,
    max_attempts: Optional[int] = None,
    jobs: int = 1,
) -> List[RegularGraph]:
    gap_threshold = settings.gap_threshold if gap_threshold is None else gap_threshold
    seed = settings.default_seed if seed is None else seed

    if k <= 0:
        raise InvalidParams(f"degree must be positive, got {k}")
    if gap_threshold <= 0:
        raise InvalidParams(f"gap threshold must be positive, got {gap_threshold}")
    for n in sizes:
        if (n * k) % 2 != 0:
            raise InvalidParams(f"n*k = {n}*{k} is odd, no {k}-regular graph on {n} vertices")
        if n <= k:
            raise InvalidParams(f"a simple {k}-regular graph needs more than {k} vertices, got {n}")

    def _sample(n: int) -> RegularGraph:
        return sample_expander(n, k, gap_threshold, seed, max_attempts)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sample, sizes))
    return [_sample(n) for n in sizes]
