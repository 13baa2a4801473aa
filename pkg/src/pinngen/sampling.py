"""Seeded generation of collocation points and network initializations.

All randomness flows through numpy's PCG64 generator so any result can be
reproduced from the recorded integer seed alone; ``RNG_ALGORITHM`` is written
into every results document.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jet_mlp import MlpArchitecture
from .problem import Interval

RNG_ALGORITHM = "numpy-PCG64"

__all__ = ["CollocationSet", "latin_hypercube", "init_params", "RNG_ALGORITHM"]


@dataclass(frozen=True)
class CollocationSet:
    """Sorted interior points where the equation residual is penalized."""

    points: np.ndarray
    domain: Interval
    seed: int

    def __len__(self) -> int:
        return self.points.size


def latin_hypercube(n: int, domain: Interval, seed: int) -> CollocationSet:
    """One uniform draw inside each of n equal-width strata of the domain.

    Points come back sorted ascending; the stratified construction is already
    ordered, so sorting costs nothing and the stratum identity of point i is
    simply i.
    """
    if n < 1:
        raise ValueError(f"need at least one collocation point, got n={n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    width = domain.length / n
    pts = domain.lo + (np.arange(n) + rng.random(n)) * width
    # a zero draw in the first stratum would sit exactly on the boundary
    pts[pts <= domain.lo] = np.nextafter(domain.lo, domain.hi)
    return CollocationSet(points=pts, domain=domain, seed=int(seed))


def init_params(arch: MlpArchitecture, seed: int) -> np.ndarray:
    """Glorot-uniform weights (the usual pairing with tanh), zero biases."""
    rng = np.random.Generator(np.random.PCG64(seed))
    dims = arch.layer_dims
    chunks = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        chunks.append(rng.uniform(-bound, bound, size=fan_in * fan_out))
        chunks.append(np.zeros(fan_out))
    return np.concatenate(chunks)
