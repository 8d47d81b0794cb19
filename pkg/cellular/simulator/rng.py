"""Counter-based random streams: one Philox key per (seed, stream index)."""

from typing import Union

import numpy as np

from cellular.exceptions import InvalidParameterError

RngLike = Union[int, np.random.Generator]


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    if seed < 0 or stream < 0:
        raise InvalidParameterError("seed and stream index must be non-negative")
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def as_rng(rng: RngLike, stream: int = 0) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(int(rng), stream)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) entries."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)
