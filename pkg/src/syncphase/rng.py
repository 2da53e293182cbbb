"""Deterministic, counter-based Gaussian streams.

Reproducibility contract: the noise consumed by draw ``d`` of a Monte-Carlo
run is a pure function of ``(master_seed, d, channel)`` — no global state, no
dependence on batching, chunking or worker count.  Each (draw, channel) pair
owns a private Philox-4x64 counter block, and standard normals are produced by
applying the inverse normal CDF to the counter-based uniform stream.

Channels:
    CH_PHASE    multiplicative phase-noise samples
    CH_ADDITIVE additive noise samples
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

CH_PHASE = 0
CH_ADDITIVE = 1

_MASK64 = (1 << 64) - 1
# Fixed key salt (64-bit golden ratio); keeps the key space disjoint from the
# bare user seed and gives Philox a full 128-bit key.
_KEY_SALT = 0x9E3779B97F4A7C15

# random() yields (w >> 11) * 2^-53 for a raw 64-bit word w; adding 2^-54
# centers each lattice cell so u lies in the OPEN interval (0, 1) and ndtri
# stays finite.
_HALF_STEP = 2.0 ** -54


def _generator(seed: int, draw_index: int, channel: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, _KEY_SALT], dtype=np.uint64)
    counter = np.array([0, draw_index & _MASK64, channel, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def uniforms(seed: int, draw_index: int, channel: int, count: int) -> np.ndarray:
    """Counter-based uniforms on (0, 1) for one (draw, channel) substream."""
    if count < 0:
        raise ValueError("count must be non-negative")
    return _generator(seed, draw_index, channel).random(count) + _HALF_STEP


def standard_normals(seed: int, draw_index: int, channel: int, count: int) -> np.ndarray:
    """Standard normal samples for one (draw, channel) substream."""
    return ndtri(uniforms(seed, draw_index, channel, count))


def standard_normals_block(
    seed: int, first_draw: int, n_draws: int, channel: int, count: int
) -> np.ndarray:
    """Stack per-draw substreams into an (n_draws, count) matrix.

    Row ``j`` is bit-identical to ``standard_normals(seed, first_draw + j,
    channel, count)`` — batching is layout only, never a different stream.
    """
    if n_draws < 0:
        raise ValueError("n_draws must be non-negative")
    u = np.empty((n_draws, count))
    for j in range(n_draws):
        u[j] = _generator(seed, first_draw + j, channel).random(count)
    u += _HALF_STEP
    return ndtri(u)
