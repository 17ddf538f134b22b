"""Least-squares identification of the open-loop matrix from one trajectory.

The estimate is A_hat = M^T V^{-1} built from left-endpoint Riemann sums
V = sum_k X_k X_k^T h (sample covariance) and M = sum_k X_k (dX_k -
kappa B dU_k)^T. Left-endpoint is not a convenience: it is the Ito
convention, and under Euler-Maruyama it makes the error identity

    A_hat - A* = C S^T V^{-1},    S = sum_k X_k dW_k^T

hold to machine accuracy, which the oracle check exploits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .simulate import SimConfig, SystemSpec, Trajectory, simulate_trajectory

# lambda_min(V) <= RANK_RTOL * lambda_max(V) switches to the pseudoinverse.
# Numerical-rank threshold: healthy unstable runs legitimately reach
# eigenvalue ratios of a few eps (lambda_max grows like e^{2 lambda_1 T}
# while lambda_min grows like T), so anything much coarser would truncate
# exactly the runs the estimator is supposed to handle.
RANK_RTOL = 1e-15


class OracleUnavailableError(RuntimeError):
    """Raised when an oracle computation needs noise increments or the
    source trajectory and the accumulator does not carry them."""


@dataclass
class CovarianceAccumulator:
    """Running discrete integrals over a trajectory prefix.

    cov is V_T, cross is the estimator numerator, noise_cross is the
    oracle martingale S_T (present only when the trajectory exposes dW).
    Accumulators over contiguous disjoint segments merge by addition.
    """

    cov: np.ndarray
    cross: np.ndarray
    noise_cross: Optional[np.ndarray]
    elapsed: float
    count: int
    step: float
    kappa_b: np.ndarray
    source: Optional[Trajectory] = field(default=None, repr=False)

    @property
    def p(self) -> int:
        return self.cov.shape[0]

    def __add__(self, other: "CovarianceAccumulator") -> "CovarianceAccumulator":
        if self.cov.shape != other.cov.shape or self.step != other.step:
            raise ValueError("cannot merge accumulators of different systems")
        noise = None
        if self.noise_cross is not None and other.noise_cross is not None:
            noise = self.noise_cross + other.noise_cross
        return CovarianceAccumulator(
            cov=self.cov + other.cov,
            cross=self.cross + other.cross,
            noise_cross=noise,
            elapsed=self.elapsed + other.elapsed,
            count=self.count + other.count,
            step=self.step,
            kappa_b=self.kappa_b,
            source=None,
        )


def accumulate(traj: Trajectory) -> CovarianceAccumulator:
    """Left-endpoint sums over every step of the trajectory."""
    if traj.n_steps < 1:
        raise ValueError("trajectory has no steps to accumulate")
    left = traj.states[:-1]
    h = traj.step
    cov = h * (left.T @ left)
    cross = left.T @ (traj.increments - traj.input_increments @ traj.kappa_b.T)
    noise = left.T @ traj.noise_increments if traj.noise_increments.size else None
    return CovarianceAccumulator(
        cov=cov,
        cross=cross,
        noise_cross=noise,
        elapsed=traj.n_steps * h,
        count=traj.n_steps,
        step=h,
        kappa_b=traj.kappa_b,
        source=traj,
    )


def accumulate_checkpoints(
    traj: Trajectory, checkpoint_steps: Sequence[int]
) -> list[CovarianceAccumulator]:
    """Accumulator snapshots after each checkpoint step count, single pass.

    Checkpoints beyond the trajectory's (possibly truncated) length are
    clamped to the final step; callers detect this via count.
    """
    steps = list(checkpoint_steps)
    if any(s <= 0 for s in steps) or any(b > a for a, b in zip(steps[1:], steps)):
        raise ValueError("checkpoints must be positive and increasing")
    left_all = traj.states[:-1]
    resid = traj.increments - traj.input_increments @ traj.kappa_b.T
    has_noise = traj.noise_increments.size > 0
    h = traj.step

    out: list[CovarianceAccumulator] = []
    cov = np.zeros((traj.p, traj.p))
    cross = np.zeros((traj.p, traj.p))
    noise = np.zeros((traj.p, traj.noise_increments.shape[1])) if has_noise else None
    prev = 0
    for s in steps:
        stop = min(s, traj.n_steps)
        if stop > prev:
            seg = slice(prev, stop)
            left = left_all[seg]
            cov = cov + h * (left.T @ left)
            cross = cross + left.T @ resid[seg]
            if has_noise:
                noise = noise + left.T @ traj.noise_increments[seg]
            prev = stop
        out.append(
            CovarianceAccumulator(
                cov=cov.copy(),
                cross=cross.copy(),
                noise_cross=None if noise is None else noise.copy(),
                elapsed=stop * h,
                count=stop,
                step=h,
                kappa_b=traj.kappa_b,
                source=traj,
            )
        )
    return out


@dataclass(frozen=True)
class Estimate:
    """The least-squares estimate with conditioning diagnostics.

    err_spectral and scaled_err are populated only when ground truth was
    supplied; used_pseudoinverse marks a rank-deficient sample covariance.
    """

    A_hat: np.ndarray
    min_eig_V: float
    max_eig_V: float
    cond_V: float
    used_pseudoinverse: bool
    elapsed: float
    err_spectral: Optional[float] = None
    scaled_err: Optional[float] = None

    def format_record(self) -> str:
        lines = [f"T = {self.elapsed!r}"]
        for i, row in enumerate(self.A_hat):
            lines.append(f"A_hat[{i}] = " + " ".join(repr(float(v)) for v in row))
        lines.append(f"min_eig_V = {self.min_eig_V!r}")
        lines.append(f"max_eig_V = {self.max_eig_V!r}")
        lines.append(f"cond_V = {self.cond_V!r}")
        lines.append(f"used_pseudoinverse = {self.used_pseudoinverse}")
        if self.err_spectral is not None:
            lines.append(f"err_spectral = {self.err_spectral!r}")
            lines.append(f"scaled_err = {self.scaled_err!r}")
        return "\n".join(lines) + "\n"


def _solve_gram(cov: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, bool, np.ndarray]:
    """V^{-1} rhs through a symmetric factorization, with pseudoinverse
    fallback below the rank tolerance. Returns (solution, used_pinv, eigs)."""
    sym = 0.5 * (cov + cov.T)
    eigs = np.linalg.eigvalsh(sym)
    if eigs[0] > RANK_RTOL * max(eigs[-1], 0.0) and eigs[0] > 0.0:
        try:
            solution = cho_solve(cho_factor(sym, lower=True), rhs)
            return solution, False, eigs
        except np.linalg.LinAlgError:
            pass  # numerically singular after all; fall through to pinv
    vals, vecs = np.linalg.eigh(sym)
    keep = vals > RANK_RTOL * max(vals[-1], 0.0)
    inv_vals = np.zeros_like(vals)
    inv_vals[keep] = 1.0 / vals[keep]
    solution = vecs @ (inv_vals[:, None] * (vecs.T @ rhs))
    return solution, True, eigs


def estimate(
    acc: CovarianceAccumulator, truth: Optional[SystemSpec] = None
) -> Estimate:
    """A_hat = cross^T V^{-1}; pseudoinverse before V becomes nonsingular."""
    if acc.count < 1:
        raise ValueError("empty accumulator")
    solution, used_pinv, eigs = _solve_gram(acc.cov, acc.cross)
    a_hat = solution.T
    err = scaled = None
    if truth is not None:
        err = float(np.linalg.norm(a_hat - truth.A, 2))
        scaled = float(np.sqrt(acc.elapsed) * err)
    min_eig = float(eigs[0])
    max_eig = float(eigs[-1])
    return Estimate(
        A_hat=a_hat,
        min_eig_V=min_eig,
        max_eig_V=max_eig,
        cond_V=float(max_eig / min_eig) if min_eig > 0 else float("inf"),
        used_pseudoinverse=used_pinv,
        elapsed=acc.elapsed,
        err_spectral=err,
        scaled_err=scaled,
    )


def error_identity_residual(
    est: Estimate, acc: CovarianceAccumulator, truth: SystemSpec
) -> float:
    """Defect of the error identity A_hat - A* = C S^T V^{-1}, as a
    spectral norm.

    Evaluated in the factored form ||V^{-1} (M - V A*^T - S C^T)||_2 with
    the inner defect accumulated from per-step rows: algebraically the
    same quantity, but it avoids differencing two independently solved
    ill-conditioned systems, which would drown the identity in
    eps * cond(V) noise on unstable runs.
    """
    if acc.noise_cross is None:
        raise OracleUnavailableError("accumulator has no noise increments (dW)")
    traj = acc.source
    if traj is None:
        raise OracleUnavailableError(
            "error identity needs the source trajectory (merged accumulators drop it)"
        )
    n = acc.count
    left = traj.states[:n]
    defect_rows = (
        traj.increments[:n]
        - left @ (traj.step * truth.A).T
        - traj.input_increments[:n] @ traj.kappa_b.T
        - traj.noise_increments[:n] @ truth.C.T
    )
    defect = left.T @ defect_rows
    solved, _, _ = _solve_gram(acc.cov, defect)
    return float(np.linalg.norm(solved, 2))


@dataclass(frozen=True)
class SeriesPoint:
    """One checkpoint of a single-pass scaled-error series."""

    elapsed: float
    estimate: Estimate
    accumulator: CovarianceAccumulator
    truncated: bool

    @property
    def err_spectral(self) -> Optional[float]:
        return self.estimate.err_spectral

    @property
    def scaled_err(self) -> Optional[float]:
        return self.estimate.scaled_err


def scaled_error_series(
    spec: SystemSpec, config: SimConfig, checkpoints: Sequence[float]
) -> list[SeriesPoint]:
    """Estimate at each checkpoint time of one trajectory, single pass.

    Checkpoints must be increasing and within the horizon. Checkpoints that
    fall beyond a truncation point are flagged rather than dropped; they
    repeat the data available up to the truncation.
    """
    times = [float(t) for t in checkpoints]
    if any(b <= a for a, b in zip(times, times[1:])) or not times:
        raise ValueError("checkpoints must be non-empty and increasing")
    if times[0] <= 0 or times[-1] > config.horizon_actual + 0.5 * config.step:
        raise ValueError("checkpoints must lie in (0, horizon]")
    traj = simulate_trajectory(spec, config)
    steps = [max(1, int(round(t / config.step))) for t in times]
    out = []
    for target, acc in zip(steps, accumulate_checkpoints(traj, steps)):
        est = estimate(acc, truth=spec)
        out.append(
            SeriesPoint(
                elapsed=acc.elapsed,
                estimate=est,
                accumulator=acc,
                truncated=acc.count < target,
            )
        )
    return out
