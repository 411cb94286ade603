"""Scalar random variates and seedable substreams.

Complex chi-square convention: ``Cchi2_q`` is Gamma(q, 1), i.e. the squared
norm of a q-dimensional circular complex normal vector with unit-variance
entries. Its mean is ``q``.
"""
from __future__ import annotations

from typing import Union

import numpy as np

__all__ = [
    "RngStream",
    "as_generator",
    "draw_standard_complex_normal",
    "draw_complex_chi_square",
    "draw_noncentral_complex_chi_square_1",
]


class RngStream:
    """Random source identified by ``(seed, stream_id)``.

    The underlying generator is PCG64 seeded through ``SeedSequence`` with the
    stream id as spawn key, so distinct ids give non-overlapping sequences
    and the draws are a pure function of the pair.
    """

    __slots__ = ("seed", "stream_id", "generator")

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise ValueError("seed and stream_id must be nonnegative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def substream(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


StreamLike = Union[RngStream, np.random.Generator, int, None]


def as_generator(stream: StreamLike) -> np.random.Generator:
    if isinstance(stream, RngStream):
        return stream.generator
    if isinstance(stream, np.random.Generator):
        return stream
    return np.random.default_rng(stream)


def draw_standard_complex_normal(stream: StreamLike, size=None):
    """Circular complex normal with ``E|z|^2 = 1`` (variance 1/2 per part)."""
    rng = as_generator(stream)
    shape = () if size is None else (size,) if np.isscalar(size) else tuple(size)
    # interleaved (re, im) pairs viewed as complex128
    z = rng.standard_normal(shape + (2,)).view(np.complex128)[..., 0]
    z *= np.sqrt(0.5)
    return z if shape else complex(z)


def draw_complex_chi_square(q, stream: StreamLike, size=None):
    """Central complex chi-square with ``q`` degrees of freedom, Gamma(q, 1)."""
    q_arr = np.asarray(q)
    if np.any(q_arr < 1) or np.any(q_arr != np.floor(q_arr)):
        raise ValueError(f"degrees of freedom must be positive integers, got {q!r}")
    return as_generator(stream).gamma(q_arr.astype(float), 1.0, size)


def draw_noncentral_complex_chi_square_1(delta, stream: StreamLike, size=None):
    """``|z|^2`` with ``z ~ CN(sqrt(delta), 1)``; ``delta`` may be an array."""
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0):
        raise ValueError("noncentrality must be nonnegative")
    if size is None:
        size = delta.shape
    z = draw_standard_complex_normal(stream, size)
    return np.abs(z + np.sqrt(delta)) ** 2
