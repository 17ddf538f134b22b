"""Counter-based Gaussian draws for reproducible trajectory simulation.

Every random quantity is a pure function of (seed, stream, index): step k of
a trajectory owns a fixed range of Philox counter blocks, so a whole
trajectory can be drawn in one vectorized call while any single step remains
independently addressable. Normals are produced by inverse-CDF on the raw
64-bit output, which consumes a fixed number of words per draw (rejection
samplers would not), keeping the counter arithmetic exact.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

# Philox emits 4 uint64 words per counter increment.
_WORDS_PER_BLOCK = 4

# Disjoint counter regions. Step draws live near zero and never exceed
# ~2^40 blocks for any realistic trajectory, so offsets at 2^128 are safe.
STREAM_STEPS = 0
STREAM_INITIAL_STATE = 1 << 128
STREAM_AUXILIARY = 1 << 129


def _blocks_per_step(n_per_step: int) -> int:
    return (n_per_step + _WORDS_PER_BLOCK - 1) // _WORDS_PER_BLOCK


def _to_unit_interval(raw: np.ndarray) -> np.ndarray:
    # 53-bit mantissa, shifted into the open interval (0, 1) so ndtri is finite.
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def raw_words(seed: int, counter: int, n_words: int) -> np.ndarray:
    return Philox(key=seed, counter=counter).random_raw(n_words)


def standard_normals(seed: int, counter: int, n: int) -> np.ndarray:
    """n standard normals starting at the given counter block."""
    return ndtri(_to_unit_interval(raw_words(seed, counter, n)))


def step_normals(seed: int, k: int, n_per_step: int, stream: int = STREAM_STEPS) -> np.ndarray:
    """The n_per_step normals owned by step k."""
    counter = stream + k * _blocks_per_step(n_per_step)
    return standard_normals(seed, counter, n_per_step)


def batch_step_normals(
    seed: int, n_steps: int, n_per_step: int, stream: int = STREAM_STEPS
) -> np.ndarray:
    """Normals for steps 0..n_steps-1 at once, shape (n_steps, n_per_step).

    Row k equals step_normals(seed, k, n_per_step) exactly: each step's
    region is padded to a whole number of counter blocks.
    """
    if n_steps == 0:
        return np.empty((0, n_per_step))
    words = _blocks_per_step(n_per_step) * _WORDS_PER_BLOCK
    raw = raw_words(seed, stream, n_steps * words).reshape(n_steps, words)
    return ndtri(_to_unit_interval(raw[:, :n_per_step]))


def draw_increments(
    seed: int, k: int, q: int, r: int, h: float
) -> tuple[np.ndarray, np.ndarray]:
    """Input and noise increments (dU_k, dW_k) for step k, each N(0, h I).

    Pure function of (seed, k): the same values the batched trajectory
    simulation uses at step k.
    """
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h}")
    g = step_normals(seed, k, q + r) * np.sqrt(h)
    return g[:q], g[q:]


def increments(
    seed: int, n_steps: int, q: int, r: int, h: float
) -> tuple[np.ndarray, np.ndarray]:
    """All increments for a trajectory: arrays of shape (n_steps, q) and (n_steps, r)."""
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h}")
    g = batch_step_normals(seed, n_steps, q + r) * np.sqrt(h)
    return g[:, :q], g[:, q:]


def initial_state(seed: int, p: int) -> np.ndarray:
    """Standard-normal initial state, drawn from a counter region disjoint
    from the step increments of the same seed."""
    return standard_normals(seed, STREAM_INITIAL_STATE, p)


def auxiliary_step_normals(seed: int, n_steps: int, n_per_step: int) -> np.ndarray:
    """Extra per-step normals (exact-integrator conditional draws)."""
    return batch_step_normals(seed, n_steps, n_per_step, stream=STREAM_AUXILIARY)
