"""Single-trajectory simulation of the controlled linear SDE.

The system is dX = (A X + B U) dt + C dW driven by the randomized input
U = kappa dU/dt, which only ever enters through its integrated Gaussian
increments. Two integrators are provided: Euler-Maruyama, which makes the
discrete least-squares error identity exact, and an exact discretization
of the linear dynamics for validating growth rates on unstable systems.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import IO, Optional

import numpy as np

from . import _rng
from ._kernel import backend_name, linear_recursion
from .linalg import (
    SpectrumSummary,
    StructuralConstants,
    matrix_exponential,
    spectrum_summary,
    structural_constants,
)

EULER_MARUYAMA = "euler-maruyama"
EXACT_LTI = "exact-lti"

draw_increments = _rng.draw_increments


@dataclass(frozen=True)
class SystemSpec:
    """Ground-truth system: open-loop matrix, input/noise coefficients,
    initial state, and the input gain kappa >= 1."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    x0: np.ndarray
    kappa: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "A", np.array(self.A, dtype=float))
        object.__setattr__(self, "B", np.atleast_2d(np.array(self.B, dtype=float)))
        object.__setattr__(self, "C", np.atleast_2d(np.array(self.C, dtype=float)))
        object.__setattr__(self, "x0", np.atleast_1d(np.array(self.x0, dtype=float)))
        p = self.A.shape[0]
        if self.A.shape != (p, p):
            raise ValueError(f"A must be square, got {self.A.shape}")
        if self.B.shape[0] != p or self.C.shape[0] != p or self.x0.shape != (p,):
            raise ValueError(
                f"dimension mismatch: A {self.A.shape}, B {self.B.shape}, "
                f"C {self.C.shape}, x0 {self.x0.shape}"
            )
        for name in ("A", "B", "C", "x0"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")
        if not np.isfinite(self.kappa) or self.kappa < 1:
            raise ValueError(f"kappa must be >= 1, got {self.kappa}")

    @property
    def p(self) -> int:
        return self.A.shape[0]

    @property
    def q(self) -> int:
        return self.B.shape[1]

    @property
    def r(self) -> int:
        return self.C.shape[1]

    @property
    def kappa_b(self) -> np.ndarray:
        """The observed input matrix kappa * B (all the estimator needs)."""
        return self.kappa * self.B

    def spectrum(self, tol: float = 1e-9) -> SpectrumSummary:
        return spectrum_summary(self.A, tol=tol)

    def structural(self) -> StructuralConstants:
        """Structural constants; raises AssumptionViolation if B B^T is singular."""
        return structural_constants(self.A, self.B, self.C, self.kappa)

    def with_initial_state(self, x0) -> "SystemSpec":
        return replace(self, x0=np.asarray(x0, dtype=float))


@dataclass(frozen=True)
class SimConfig:
    """Simulation horizon, step, integrator and seeding.

    The horizon is rounded to a whole number of steps; `n_steps` and
    `horizon_actual` expose the adjusted grid.
    """

    horizon: float
    step: float = 1e-3
    integrator: str = EULER_MARUYAMA
    overflow_cap: float = 1e12
    seed: int = 0

    def __post_init__(self):
        if not (self.horizon > 0 and np.isfinite(self.horizon)):
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if not (0 < self.step <= self.horizon):
            raise ValueError(f"step must satisfy 0 < h <= horizon, got {self.step}")
        if self.integrator not in (EULER_MARUYAMA, EXACT_LTI):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.overflow_cap <= 0:
            raise ValueError("overflow_cap must be positive")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.horizon / self.step)))

    @property
    def horizon_actual(self) -> float:
        return self.n_steps * self.step


@dataclass
class Trajectory:
    """A simulated path with everything the estimator and the oracles need.

    `increments` holds the per-step state deltas exactly as the recursion
    computed them; states satisfy X_{k+1} = X_k + increments[k] to one ulp.
    `noise_increments` (dW) are oracle data: a real estimator never sees
    them, and they are marked as oracle columns on export.
    """

    times: np.ndarray
    states: np.ndarray
    increments: np.ndarray
    input_increments: np.ndarray
    noise_increments: np.ndarray
    kappa_b: np.ndarray
    step: float
    integrator: str
    seed: int
    truncated: bool = False
    truncation_index: Optional[int] = None
    spec: Optional[SystemSpec] = field(default=None, repr=False)

    @property
    def n_steps(self) -> int:
        return self.increments.shape[0]

    @property
    def p(self) -> int:
        return self.states.shape[1]

    def segment(self, start: int, stop: int) -> "Trajectory":
        """Steps [start, stop) as a trajectory segment (views, not copies)."""
        if not (0 <= start < stop <= self.n_steps):
            raise ValueError(f"invalid segment [{start}, {stop}) of {self.n_steps} steps")
        return Trajectory(
            times=self.times[start : stop + 1],
            states=self.states[start : stop + 1],
            increments=self.increments[start:stop],
            input_increments=self.input_increments[start:stop],
            noise_increments=self.noise_increments[start:stop],
            kappa_b=self.kappa_b,
            step=self.step,
            integrator=self.integrator,
            seed=self.seed,
            truncated=self.truncated and stop == self.n_steps,
            truncation_index=self.truncation_index if stop == self.n_steps else None,
            spec=self.spec,
        )

    def export_columns(self, out: IO[str]) -> None:
        """Columnar dump, one row per sample; dW columns are oracle-only."""
        p, q, r = self.p, self.input_increments.shape[1], self.noise_increments.shape[1]
        header = (
            ["k", "t"]
            + [f"X_{i + 1}" for i in range(p)]
            + [f"dU_{i + 1}" for i in range(q)]
            + [f"dW_{i + 1}_oracle" for i in range(r)]
            + ["truncated"]
        )
        out.write(",".join(header) + "\n")
        n = self.n_steps
        for k in range(n + 1):
            row = [str(k), repr(float(self.times[k]))]
            row += [repr(float(v)) for v in self.states[k]]
            if k < n:
                row += [repr(float(v)) for v in self.input_increments[k]]
                row += [repr(float(v)) for v in self.noise_increments[k]]
            else:
                row += [""] * (q + r)
            row.append("1" if (self.truncated and k == n) else "0")
            out.write(",".join(row) + "\n")

    def save(self, path) -> None:
        with open(path, "w", newline="") as out:
            self.export_columns(out)


def _exact_step_model(spec: SystemSpec, h: float):
    """One-step transition and the joint draw for the exact integrator.

    Returns (F - I, K/sqrt(h), Lc) where F = e^{Ah}, K is the cross
    covariance of the state innovation with the recorded increments, and
    Lc Lc^T is the innovation covariance conditional on those increments
    (Van Loan augmented-exponential construction throughout).
    """
    a, p = spec.A, spec.p
    scaled_input = spec.kappa_b
    stacked = np.hstack([scaled_input, spec.C])  # p x (q+r)

    transition = matrix_exponential(a, h)

    aug = np.zeros((2 * p, 2 * p))
    aug[:p, :p] = a
    aug[:p, p:] = np.eye(p)
    phi1 = matrix_exponential(aug, h)[:p, p:]  # int_0^h e^{Au} du

    noise_cov = scaled_input @ scaled_input.T + spec.C @ spec.C.T
    van_loan = np.zeros((2 * p, 2 * p))
    van_loan[:p, :p] = -a
    van_loan[:p, p:] = noise_cov
    van_loan[p:, p:] = a.T
    big = matrix_exponential(van_loan, h)
    innovation_cov = big[p:, p:].T @ big[:p, p:]

    cross = phi1 @ stacked  # Cov(innovation, [dU; dW])
    conditional = innovation_cov - cross @ cross.T / h
    conditional = 0.5 * (conditional + conditional.T)
    vals, vecs = np.linalg.eigh(conditional)
    conditional_sqrt = vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None)))

    return transition - np.eye(p), cross / np.sqrt(h), conditional_sqrt


def simulate_trajectory(spec: SystemSpec, config: SimConfig) -> Trajectory:
    """Simulate one path; deterministic given (spec, config).

    Euler-Maruyama steps are X_{k+1} = X_k + h A X_k + kappa B dU_k + C dW_k.
    The exact integrator draws the state innovation jointly with (dU, dW)
    so the recorded increments keep their N(0, hI) law. A state norm above
    overflow_cap truncates the trajectory with a flag; unstable runs are
    expected to get there eventually and partial data stays useful.
    """
    n = config.n_steps
    h = config.step
    gauss = _rng.batch_step_normals(config.seed, n, spec.q + spec.r)
    sqrt_h = np.sqrt(h)
    du = sqrt_h * gauss[:, : spec.q]
    dw = sqrt_h * gauss[:, spec.q :]

    if config.integrator == EULER_MARUYAMA:
        step_matrix = h * spec.A
        drive = du @ spec.kappa_b.T + dw @ spec.C.T
    else:
        step_matrix, cross_scaled, conditional_sqrt = _exact_step_model(spec, h)
        extra = _rng.auxiliary_step_normals(config.seed, n, spec.p)
        drive = gauss @ cross_scaled.T + extra @ conditional_sqrt.T

    states, increments, n_done = linear_recursion(
        step_matrix, drive, spec.x0, config.overflow_cap
    )
    truncated = n_done < n
    return Trajectory(
        times=np.arange(n_done + 1) * h,
        states=states,
        increments=increments,
        input_increments=du[:n_done],
        noise_increments=dw[:n_done],
        kappa_b=spec.kappa_b,
        step=h,
        integrator=config.integrator,
        seed=config.seed,
        truncated=truncated,
        truncation_index=n_done if truncated else None,
        spec=spec,
    )


def kernel_backend() -> str:
    """Which recursion kernel is active ("cython" or "python")."""
    return backend_name()
