"""Reproducible Monte Carlo plumbing.

Trials are split into fixed-size chunks; chunk i draws from
``default_rng(SeedSequence([seed, i]))`` regardless of which worker runs it,
and partial results are reduced in chunk order.  Outputs are therefore a
pure function of (seed, trials) — worker count and scheduling cannot change
a single bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

CHUNK = 1 << 16


@dataclass(frozen=True)
class SimulationResult:
    mean_length: float
    error_rate: float
    stderr_length: float
    stderr_error: float
    trials: int

    def as_dict(self) -> dict:
        return {
            "mean_length": self.mean_length,
            "error_rate": self.error_rate,
            "stderr_length": self.stderr_length,
            "stderr_error": self.stderr_error,
            "trials": self.trials,
        }


def chunk_sizes(trials: int) -> list[int]:
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}", "trials")
    full, rem = divmod(trials, CHUNK)
    return [CHUNK] * full + ([rem] if rem else [])


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def run_chunked(worker, trials: int, seed: int, workers: int = 1) -> list:
    """Run ``worker(rng, size)`` per chunk, returning results in chunk order."""
    sizes = chunk_sizes(trials)
    if workers <= 1 or len(sizes) <= 1:
        return [worker(chunk_rng(seed, i), size) for i, size in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(
            pool.map(lambda args: worker(chunk_rng(seed, args[0]), args[1]), enumerate(sizes))
        )


def summarize_value_and_error(partials, trials: int) -> SimulationResult:
    """Reduce per-chunk (sum_v, sum_v2, n_errors) triples, in order."""
    sum_v = 0.0
    sum_v2 = 0.0
    n_err = 0.0
    for pv, pv2, pe in partials:
        sum_v += pv
        sum_v2 += pv2
        n_err += pe
    mean = sum_v / trials
    var = max(sum_v2 / trials - mean * mean, 0.0)
    p = n_err / trials
    return SimulationResult(
        mean_length=mean,
        error_rate=p,
        stderr_length=math.sqrt(var / trials),
        stderr_error=math.sqrt(max(p * (1.0 - p), 0.0) / trials),
        trials=trials,
    )
