"""Dense small-matrix numerics: exponentials, spectra, Jordan structure.

Everything here is a pure function of its inputs. Matrices are modest
(tens of rows, not thousands), so dense LAPACK-backed routines are the
right tool; the one algorithm implemented from scratch is the scaling and
squaring matrix exponential, which the rest of the package treats as a
primitive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


class Regime(str, Enum):
    """Stability trichotomy by the largest eigenvalue real part."""

    STABLE = "stable"
    MARGINALLY_STABLE = "marginally-stable"
    UNSTABLE = "unstable"


class EigensolverError(RuntimeError):
    """Eigenvalue iteration failed to converge."""


class AssumptionViolation(ValueError):
    """The input excitation matrix is not positive definite (c <= 0)."""


def _as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError("matrix dimension must be at least 1")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def spectral_norm(m) -> float:
    a = np.asarray(m, dtype=complex if np.iscomplexobj(m) else float)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def op_norm_inf(m) -> float:
    """Operator infinity norm: max absolute row sum."""
    a = np.asarray(m)
    if a.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(a), axis=1)))


# Pade approximant orders and 1-norm thresholds for the scaling and squaring
# method (Higham 2005, "The scaling and squaring method revisited").
_PADE_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}

_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (
        17643225600.0,
        8821612800.0,
        2075673600.0,
        302702400.0,
        30270240.0,
        2162160.0,
        110880.0,
        3960.0,
        90.0,
        1.0,
    ),
    13: (
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ),
}


def _pade_low_order(a: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    b = _PADE_COEFFS[order]
    n = a.shape[0]
    ident = np.eye(n)
    powers = [ident, a @ a]
    while len(powers) < (order + 1) // 2:
        powers.append(powers[1] @ powers[-1])
    # u collects odd coefficients (times a), v the even ones.
    u = b[1] * ident
    v = b[0] * ident
    for j, pw in enumerate(powers[1:], start=1):
        u = u + b[2 * j + 1] * pw
        v = v + b[2 * j] * pw
    return a @ u, v


def _pade_13(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    b = _PADE_COEFFS[13]
    n = a.shape[0]
    ident = np.eye(n)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
         + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
    return u, v


def matrix_exponential(m, t: float = 1.0) -> np.ndarray:
    """e^{M t} by Pade approximation with scaling and squaring.

    Accurate to ~1e-13 relative for ||M t||_2 up to several tens. Raises
    OverflowError if the result leaves the representable range instead of
    returning infinities.
    """
    a = _as_square(m)
    if not np.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    a = a * float(t)
    norm1 = float(np.linalg.norm(a, 1))
    if not np.isfinite(norm1):
        raise OverflowError("matrix exponential argument overflows")

    for order in (3, 5, 7, 9):
        if norm1 <= _PADE_THETA[order]:
            u, v = _pade_low_order(a, order)
            result = np.linalg.solve(v - u, v + u)
            break
    else:
        n_squarings = max(0, int(math.ceil(math.log2(norm1 / _PADE_THETA[13]))))
        scaled = a / (2.0**n_squarings)
        u, v = _pade_13(scaled)
        result = np.linalg.solve(v - u, v + u)
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(n_squarings):
                result = result @ result

    if not np.all(np.isfinite(result)):
        raise OverflowError(
            f"matrix exponential overflowed (argument 1-norm {norm1:.3g})"
        )
    return result


def eigen_real_parts(m) -> np.ndarray:
    """Real parts of all eigenvalues, repeated by multiplicity, descending."""
    a = _as_square(m)
    try:
        vals = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(
            f"eigenvalue iteration failed to converge on a "
            f"{a.shape[0]}x{a.shape[0]} matrix: {exc}"
        ) from exc
    return np.sort(vals.real)[::-1]


def classify_stability(m, tol: float = 1e-9) -> Regime:
    """Stable, marginally stable, or unstable by the sign of the largest
    eigenvalue real part, with an absolute tolerance band around zero."""
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    lam1 = float(eigen_real_parts(m)[0])
    return classify_lambda1(lam1, tol)


def classify_lambda1(lam1: float, tol: float = 1e-9) -> Regime:
    if lam1 < -tol:
        return Regime.STABLE
    if lam1 > tol:
        return Regime.UNSTABLE
    return Regime.MARGINALLY_STABLE


def _cluster_eigenvalues(vals: np.ndarray, tol_abs: float) -> list[np.ndarray]:
    """Greedy single-linkage clustering of complex eigenvalues."""
    order = np.lexsort((vals.imag, vals.real))
    clusters: list[list[int]] = []
    for idx in order:
        placed = False
        for cl in clusters:
            if any(abs(vals[idx] - vals[j]) <= tol_abs for j in cl):
                cl.append(idx)
                placed = True
                break
        if not placed:
            clusters.append([idx])
    return [vals[cl] for cl in clusters]


@dataclass(frozen=True)
class JordanStructure:
    """Largest Jordan block size with a conditioning warning.

    ill_conditioned is set when halving or doubling the clustering
    tolerance changes the eigenvalue clustering, i.e. the answer is
    sensitive to the tolerance choice.
    """

    l_star: int
    n_clusters: int
    ill_conditioned: bool


def largest_jordan_block(m, tol: float = 1e-6) -> JordanStructure:
    """Size of the largest Jordan block, by rank stabilization of powers.

    Eigenvalues within tol * ||M||_2 of each other are treated as one
    eigenvalue; for each cluster the block size is the smallest k at which
    rank((M - lambda I)^k) becomes stationary. Exact Jordan forms are
    numerically unstable, so the result carries a warning flag instead of
    failing when the clustering is tolerance-sensitive.
    """
    a = _as_square(m)
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    p = a.shape[0]
    scale = max(spectral_norm(a), 1e-300)
    tol_abs = tol * scale

    try:
        vals = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigenvalue iteration failed: {exc}") from exc

    clusters = _cluster_eigenvalues(vals, tol_abs)
    warn = any(
        len(_cluster_eigenvalues(vals, f * tol_abs)) != len(clusters)
        for f in (0.5, 2.0)
    )

    l_star = 1
    for cl in clusters:
        mult = len(cl)
        if mult == 1:
            continue
        lam = complex(np.mean(cl))
        shifted = a.astype(complex) - lam * np.eye(p)
        base_norm = max(spectral_norm(shifted), 1e-300)
        normalized = shifted / base_norm
        rank_tol = min(tol_abs / base_norm, 0.5)

        power = normalized.copy()
        prev_rank = p
        size = mult
        eps_floor = 64 * p * float(np.finfo(float).eps)
        for k in range(1, mult + 1):
            sv = np.linalg.svd(power, compute_uv=False)
            thr = max(rank_tol**k, eps_floor) * max(1.0, float(sv[0]))
            rank = int(np.sum(sv > thr))
            if rank == prev_rank:
                size = k - 1
                break
            prev_rank = rank
            if k == mult or rank <= p - mult:
                size = k
                break
            power = power @ normalized
        l_star = max(l_star, size)

    return JordanStructure(l_star=l_star, n_clusters=len(clusters), ill_conditioned=warn)


@dataclass(frozen=True)
class SpectrumSummary:
    """Ordered eigenvalue real parts with the derived stability facts."""

    real_parts: np.ndarray
    regime: Regime
    l_star: int
    jordan_warning: bool

    @property
    def lambda1(self) -> float:
        return float(self.real_parts[0])


def spectrum_summary(m, tol: float = 1e-9, jordan_tol: float = 1e-6) -> SpectrumSummary:
    real_parts = eigen_real_parts(m)
    structure = largest_jordan_block(m, tol=jordan_tol)
    return SpectrumSummary(
        real_parts=real_parts,
        regime=classify_lambda1(float(real_parts[0]), tol),
        l_star=structure.l_star,
        jordan_warning=structure.ill_conditioned,
    )


@dataclass(frozen=True)
class StructuralConstants:
    """System constants consumed by every closed-form bound.

    c is the smallest eigenvalue of B B^T (the excitation floor), beta and
    p_star are the eigenbasis-weighted norms of the stacked coefficient
    matrices [B, C] and [kappa B, C], and cond_P reports the conditioning
    of the eigenvector basis those two depend on (near-defective systems
    make P nearly singular, and the bounds correspondingly loose).
    """

    c: float
    beta: float
    p_star: float
    norm_A2: float
    norm_L2: float
    norm_L_inf: float
    norm_C2: float
    p: int
    q: int
    r: int
    kappa: float
    cond_P: float


def structural_constants(a, b, c_mat, kappa: float) -> StructuralConstants:
    """Evaluate the structural constants of a system (a, b, c_mat, kappa).

    Raises AssumptionViolation unless B B^T is positive definite.
    """
    a = _as_square(a)
    b = np.atleast_2d(np.asarray(b, dtype=float))
    c_mat = np.atleast_2d(np.asarray(c_mat, dtype=float))
    p = a.shape[0]
    if b.shape[0] != p or c_mat.shape[0] != p:
        raise ValueError(
            f"row mismatch: A is {p}x{p}, B has {b.shape[0]} rows, C has {c_mat.shape[0]}"
        )
    if kappa < 1:
        raise ValueError(f"input gain kappa must be >= 1, got {kappa}")

    bbt = b @ b.T
    c_min = float(np.linalg.eigvalsh(0.5 * (bbt + bbt.T))[0])
    if c_min <= 0:
        raise AssumptionViolation(
            f"B B^T must be positive definite; smallest eigenvalue {c_min:.3g}"
        )

    stacked = np.hstack([b, c_mat])          # L = [B, C]
    scaled_stack = np.hstack([kappa * b, c_mat])  # H = [kappa B, C]

    try:
        _, vecs = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigenvalue iteration failed: {exc}") from exc
    basis = np.linalg.inv(vecs)  # rows express states in eigen coordinates

    return StructuralConstants(
        c=c_min,
        beta=op_norm_inf(vecs) * op_norm_inf(basis) * op_norm_inf(stacked),
        p_star=op_norm_inf(scaled_stack) * op_norm_inf(basis),
        norm_A2=spectral_norm(a),
        norm_L2=spectral_norm(stacked),
        norm_L_inf=op_norm_inf(stacked),
        norm_C2=spectral_norm(c_mat),
        p=p,
        q=b.shape[1],
        r=c_mat.shape[1],
        kappa=float(kappa),
        cond_P=float(np.linalg.cond(vecs)),
    )
