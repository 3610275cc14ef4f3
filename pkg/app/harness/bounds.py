import concurrent.futures
import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from app.errors import HarnessError

logger = logging.getLogger(__name__)

_CHUNK = 1000


def _check_domain(M: float, delta: float) -> None:
    if not M > 0:
        raise HarnessError(f"bound M must be positive, got {M}")
    if not 0 < delta < 1:
        raise HarnessError(f"delta must lie in (0, 1), got {delta}")


def hoeffding_epsilon(M: float, T: int, delta: float) -> float:
    """Deviation of a mean of T draws in [-M, M] exceeded with probability at most delta."""
    _check_domain(M, delta)
    if T < 1:
        raise HarnessError(f"T must be at least 1, got {T}")
    return M * math.sqrt(2.0 * math.log(2.0 / delta) / T)


def required_games(M: float, gap: float, delta: float) -> int:
    """Games needed to separate two players whose mean contributions differ by `gap`."""
    _check_domain(M, delta)
    if not gap > 0:
        raise HarnessError(f"gap must be positive, got {gap}")
    return math.ceil(8.0 * M * M * math.log(4.0 / delta) / (gap * gap))


def binomial_slack(delta: float, trials: int, k: float = 3.0) -> float:
    return k * math.sqrt(delta * (1.0 - delta) / trials)


@dataclass(frozen=True)
class BoundedSampler:
    """Draws i.i.d. contributions; `mean` is their exact expectation."""
    draw: Callable[[np.random.Generator, tuple], np.ndarray]
    mean: float


def uniform_sampler(M: float = 1.0) -> BoundedSampler:
    return BoundedSampler(draw=lambda rng, size: rng.uniform(-M, M, size=size), mean=0.0)


def constant_sampler(value: float) -> BoundedSampler:
    return BoundedSampler(draw=lambda rng, size: np.full(size, float(value)), mean=float(value))


def concentration_trial(sampler: BoundedSampler, M: float, T: int, delta: float, trials: int,
                        seed: int = 0, workers: int = 1) -> float:
    """
    Fraction of trials whose sample mean of T draws misses the true mean by
    more than the Hoeffding epsilon. Each chunk of trials owns its own
    generator spawned from `seed`.
    """
    if trials < 1:
        raise HarnessError("need at least one trial")
    epsilon = hoeffding_epsilon(M, T, delta)
    sizes = [min(_CHUNK, trials - start) for start in range(0, trials, _CHUNK)]
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def chunk(args) -> int:
        size, stream = args
        draws = np.asarray(sampler.draw(np.random.default_rng(stream), (size, T)), dtype=np.float64)
        if np.any(np.abs(draws) > M):
            raise HarnessError(f"sampler produced a value outside [-{M}, {M}]")
        return int(np.count_nonzero(np.abs(draws.mean(axis=1) - sampler.mean) > epsilon))

    if workers <= 1:
        violations = sum(chunk(item) for item in zip(sizes, streams))
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            violations = sum(executor.map(chunk, zip(sizes, streams)))
    rate = violations / trials
    logger.info("Hoeffding check T=%d delta=%g: %d/%d violations (eps=%.4f)", T, delta, violations, trials, epsilon)
    return rate
