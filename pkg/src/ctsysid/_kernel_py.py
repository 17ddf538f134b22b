"""Numpy fallback for the trajectory recursion kernel.

Same contract as the compiled version in _kernel_cy.pyx; the recursion is
inherently serial, so this fallback pays one Python-level iteration per
step. Fine for development and small runs, roughly two orders of magnitude
slower than the extension on long trajectories.
"""

from __future__ import annotations

import numpy as np


def linear_recursion(
    step_matrix: np.ndarray,
    drive: np.ndarray,
    x0: np.ndarray,
    overflow_cap: float,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Run X_{k+1} = X_k + (step_matrix @ X_k + drive[k]).

    Returns (states, increments, n_done) where states has shape
    (n_done + 1, p), increments holds the per-step deltas exactly as
    computed, and n_done < len(drive) only if some ||X_k|| exceeded
    overflow_cap or went non-finite (truncation, not an error).
    """
    n_steps, p = drive.shape
    states = np.empty((n_steps + 1, p))
    increments = np.empty((n_steps, p))
    states[0] = x0
    x = np.array(x0, dtype=float, copy=True)
    cap_sq = overflow_cap * overflow_cap

    for k in range(n_steps):
        delta = step_matrix @ x + drive[k]
        increments[k] = delta
        x = x + delta
        states[k + 1] = x
        norm_sq = float(x @ x)
        if not np.isfinite(norm_sq) or norm_sq > cap_sq:
            return states[: k + 2], increments[: k + 1], k + 1
    return states, increments, n_steps
