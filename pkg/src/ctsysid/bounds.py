"""Closed-form finite-time bounds: self-normalized radius, iterated-logarithm
envelopes, covariance eigenvalue bounds, and the regime-dependent error rates.

Conventions. All bounds take the raw confidence level delta; any union
bound across checkpoints is the caller's business. Where the source
analysis states only an order, the evaluators return the explicit
constant-bearing expression when one exists (the covariance coefficients
below) and the bare rate with unit constants otherwise (theorem1_rate);
reports record which constants went in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import zeta

from .linalg import Regime, SpectrumSummary, StructuralConstants

_LOG12 = math.log(12.0)

RegimeLike = Union[Regime, str]


def _as_regime(regime: RegimeLike) -> Regime:
    if isinstance(regime, Regime):
        return regime
    return Regime(regime)


def _check_delta(delta: float, closed: bool = False) -> float:
    hi_ok = delta <= 1.0 if closed else delta < 1.0
    if not (0.0 < delta and hi_ok and np.isfinite(delta)):
        bound = "(0, 1]" if closed else "(0, 1)"
        raise ValueError(f"delta must be in {bound}, got {delta}")
    return float(delta)


def _logdet_chol(m: np.ndarray, name: str) -> float:
    try:
        chol = np.linalg.cholesky(0.5 * (m + m.T))
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"{name} must be positive definite") from exc
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def _logdet_dominating(m: np.ndarray, floor: float) -> float:
    """log det of a matrix known to dominate floor * I in the semidefinite
    order. Cholesky when it succeeds; once the condition number crosses
    1/eps (unstable sample covariances get there) the factorization breaks
    down and the eigenvalues are used with the exact spectral floor, which
    can only understate the determinant."""
    sym = 0.5 * (m + m.T)
    try:
        chol = np.linalg.cholesky(sym)
        return 2.0 * float(np.sum(np.log(np.diag(chol))))
    except np.linalg.LinAlgError:
        vals = np.maximum(np.linalg.eigvalsh(sym), floor)
        return float(np.sum(np.log(vals)))


def self_normalized_radius(v_bar, v, r_dim: int, delta: float) -> float:
    """Time-uniform radius for the normalized martingale norm:
    sqrt(8 log(12^r_dim det(v_bar)^(1/2) / (delta det(v)^(1/2)))).

    r_dim is the dimension in the exponent: the noise dimension r for the
    plain martingale, q + r for the concatenated input-and-noise process.
    Log-determinants go through Cholesky factors, so unstable sample
    covariances with astronomically large determinants do not overflow.
    """
    delta = _check_delta(delta, closed=True)
    if r_dim < 1:
        raise ValueError(f"exponent dimension must be >= 1, got {r_dim}")
    v_bar = np.asarray(v_bar, dtype=float)
    v = np.asarray(v, dtype=float)
    logdet_v = _logdet_chol(v, "V")
    floor = float(np.linalg.eigvalsh(0.5 * (v + v.T))[0])
    logdet_vbar = _logdet_dominating(v_bar, floor)
    gap = np.linalg.eigvalsh(0.5 * ((v_bar - v) + (v_bar - v).T))[0]
    if gap < -1e-10 * max(1.0, float(np.linalg.norm(v_bar, 2))):
        raise ValueError("V_bar must dominate V in the semidefinite order")
    arg = r_dim * _LOG12 + 0.5 * (logdet_vbar - logdet_v) - math.log(delta)
    return math.sqrt(8.0 * max(arg, 0.0))


def normalized_martingale_norm(cov, cross, regularizer=None) -> float:
    """The self-normalized statistic ||(V + V0)^(-1/2) S||_2 that the radius
    bounds, with V0 = I by default.

    Computed in the eigenbasis of V + V0. Since V is positive semidefinite,
    the true spectrum of V + I sits at or above one; computed eigenvalues
    are floored there, which only matters once cond(V) approaches 1/eps and
    eigensolver noise would otherwise turn the square root imaginary.
    """
    cov = np.asarray(cov, dtype=float)
    reg = np.eye(cov.shape[0]) if regularizer is None else np.asarray(regularizer, float)
    floor = float(np.linalg.eigvalsh(0.5 * (reg + reg.T))[0])
    if floor <= 0:
        raise ValueError("regularizer must be positive definite")
    v_bar = cov + reg
    vals, vecs = np.linalg.eigh(0.5 * (v_bar + v_bar.T))
    vals = np.maximum(vals, floor)
    half_inv = vecs @ (vecs.T / np.sqrt(vals)[:, None])
    return float(np.linalg.norm(half_inv @ np.asarray(cross, dtype=float), 2))


def lil_envelope(t, delta: float, s: float = 2.0, eta: float = math.e):
    """Finite-time law-of-iterated-logarithm boundary for standard Brownian
    motion: crossing probability over all t > 0 is at most delta.

    Vectorized over t. Requires s > 1 and eta > 1; zeta(s) is the Riemann
    zeta function.
    """
    delta = _check_delta(delta)
    if not s > 1:
        raise ValueError(f"s must exceed 1, got {s}")
    if not eta > 1:
        raise ValueError(f"eta must exceed 1, got {eta}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    floored = np.maximum(t_arr, 1.0)
    coef = (eta**0.25 + eta**-0.25) / math.sqrt(2.0)
    inner = s * np.log(np.log(eta * floored)) + math.log(
        float(zeta(s)) / (delta * math.log(eta) ** s)
    )
    if np.any(inner < 0):
        raise ValueError("boundary is imaginary for these (s, eta, delta)")
    out = coef * np.sqrt(floored * inner)
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def quadratic_variation_clock(lam: float, h: float, l: int, t: float) -> float:
    """Deterministic clock alpha(t) = h^2 int_0^t s^(2l) e^(2 lam s) ds.

    This is the quadratic variation of the scalar integral
    int_0^t e^(lam(t-u)) (t-u)^l h dV_u, the time change under which it is
    a standard Brownian motion. Closed form via the exponential-polynomial
    antiderivative; a power series takes over near lam = 0 where the
    closed form cancels catastrophically.
    """
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    if l < 0 or int(l) != l:
        raise ValueError(f"l must be a nonnegative integer, got {l}")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    l = int(l)
    if t == 0.0:
        return 0.0
    two_lam = 2.0 * lam
    n = 2 * l
    if abs(two_lam * t) <= 0.5:
        # int_0^t s^n e^(a s) ds = sum_m a^m t^(n+m+1) / (m! (n+m+1))
        total = 0.0
        term_pow = 1.0  # a^m / m!
        for m in range(0, 60):
            total += term_pow * t ** (n + m + 1) / (n + m + 1)
            term_pow *= two_lam / (m + 1)
        return h * h * total
    a = -two_lam
    fact_n = math.factorial(n)
    terms = [
        t ** (n - i) * fact_n / (a ** (i + 1) * math.factorial(n - i))
        for i in range(n + 1)
    ]
    value = h * h * (fact_n / a ** (n + 1) - math.exp(two_lam * t) * math.fsum(terms))
    return max(value, 0.0)


def _stable_clock_limit(lam1: float, h: float) -> float:
    # sup_t alpha_{lam1, h}(t) for lam1 < 0 at polynomial order zero.
    return h * h / (-2.0 * lam1)


def _loglog_bracket(level: float, delta: float) -> float:
    # 2 log log(e * level) + log(4/delta); the eta = e iterated-logarithm
    # term, finite for every level >= 1 (a bare log log is not).
    return 2.0 * math.log1p(math.log(level)) + math.log(4.0 / delta)


def state_envelope(regime: RegimeLike, lam1: float, h: float, t, delta: float):
    """High-probability uniform envelope for the scalar integral
    x_t = int_0^t e^(lam1 (t-u)) h dV_u, by regime of lam1.

    Unstable and marginally stable envelopes grow with t (the marginal
    form needs t >= 1); the stable envelope is a constant, driven by the
    finite limit l0 of the quadratic-variation clock. Vectorized over t.
    """
    delta = _check_delta(delta)
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    regime = _as_regime(regime)
    t_arr = np.asarray(t, dtype=float)
    scalar_in = np.isscalar(t) or t_arr.ndim == 0

    if regime is Regime.UNSTABLE:
        if lam1 <= 0:
            raise ValueError(f"unstable envelope needs lam1 > 0, got {lam1}")
        if np.any(t_arr < 0):
            raise ValueError("t must be nonnegative")
        inner = 2.0 * lam1 * t_arr + 1.0 + math.log(h * h / (2.0 * lam1))
        if np.any(inner <= 0):
            raise ValueError("envelope undefined: log argument not positive")
        bracket = 2.0 * np.log(inner) + math.log(4.0 / delta)
        if np.any(bracket < 0):
            raise ValueError("envelope undefined for these parameters")
        out = h * math.sqrt(2.0 / lam1) * np.exp(lam1 * t_arr) * np.sqrt(bracket)
    elif regime is Regime.MARGINALLY_STABLE:
        if np.any(t_arr < 1):
            raise ValueError("marginally stable envelope needs t >= 1")
        inner = np.log(t_arr) + 2.0 * math.log(h) + 1.0
        if np.any(inner <= 0):
            raise ValueError("envelope undefined: log argument not positive")
        bracket = 2.0 * np.log(inner) + math.log(4.0 / delta)
        if np.any(bracket < 0):
            raise ValueError("envelope undefined for these parameters")
        out = 2.0 * h * np.sqrt(t_arr) * np.sqrt(bracket)
    else:
        if lam1 >= 0:
            raise ValueError(f"stable envelope needs lam1 < 0, got {lam1}")
        level = max(_stable_clock_limit(lam1, h), 1.0)
        const = math.sqrt(2.0 * level * _loglog_bracket(level, delta))
        out = np.full_like(t_arr, const, dtype=float)
    return float(out) if scalar_in else out


def covmax_coef_unstable(
    consts: StructuralConstants, l_star: int, lam1: float, t: float, delta: float
) -> float:
    """Coefficient C_u(t, delta) of the unstable covariance growth
    t^(2 l* - 1) e^(2 lam1 t)."""
    delta = _check_delta(delta)
    if lam1 <= 0:
        raise ValueError("unstable coefficient needs lam1 > 0")
    dims = consts.q + consts.r
    inner = 2.0 * lam1 * t + 1.0 + math.log(consts.p_star**2 / (2.0 * lam1))
    if inner <= 0:
        raise ValueError("coefficient undefined: log argument not positive")
    bracket = 2.0 * math.log(inner) + math.log(4.0 * consts.p * l_star * dims / delta)
    return (8.0 / lam1) * consts.beta**2 * consts.p * math.e**2 * consts.kappa**2 * dims * bracket


def covmax_coef_marginal(
    consts: StructuralConstants, l_star: int, t: float, delta: float
) -> float:
    """Coefficient C_s(t, delta) of the marginally stable growth t^(2 l*)."""
    delta = _check_delta(delta)
    if t < 1:
        raise ValueError("marginal coefficient needs t >= 1")
    dims = consts.q + consts.r
    inner = math.log(t) + 2.0 * math.log(consts.p_star) + 1.0
    if inner <= 0:
        raise ValueError("coefficient undefined: log argument not positive")
    bracket = 2.0 * math.log(inner) + math.log(4.0 * consts.p * l_star * dims / delta)
    return 9.0 * consts.beta**2 * consts.p * math.e**2 * consts.kappa**2 * dims**2 * bracket


def covmax_coef_stable(
    consts: StructuralConstants, l_star: int, lam1: float, delta: float
) -> float:
    """Coefficient D_s(delta) of the stable linear growth t."""
    delta = _check_delta(delta)
    if lam1 >= 0:
        raise ValueError("stable coefficient needs lam1 < 0")
    dims = consts.q + consts.r
    level = max(_stable_clock_limit(lam1, consts.p_star), 1.0)
    bracket = 2.0 * level * _loglog_bracket(level, delta / (consts.p * l_star * dims))
    return 4.0 * consts.beta**2 * consts.p * math.e**2 * consts.kappa**2 * dims**2 * bracket


def covmax_bound(
    regime: RegimeLike,
    consts: StructuralConstants,
    l_star: int,
    lam1: float,
    horizon: float,
    delta: float,
) -> float:
    """High-probability upper bound on lambda_max(V_T) for the regime."""
    regime = _as_regime(regime)
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if regime is Regime.UNSTABLE:
        coef = covmax_coef_unstable(consts, l_star, lam1, horizon, delta)
        return coef * horizon ** (2 * l_star - 1) * math.exp(2.0 * lam1 * horizon)
    if regime is Regime.MARGINALLY_STABLE:
        coef = covmax_coef_marginal(consts, l_star, horizon, delta)
        return coef * horizon ** (2 * l_star)
    coef = covmax_coef_stable(consts, l_star, lam1, delta)
    return coef * horizon


# Guard against division by a vanishing lam1 in the unstable branch of C4.
_LAM1_GUARD = 1e-12


def covmin_floor_constant(consts: StructuralConstants, lam1: float, p: int) -> float:
    """The constant C4 in lambda_min(V_T) >= C4 T c kappa^2.

    C4 = min(1/6, 1/(6 ||A||), c / (24 ||L|| sqrt(lam1 p))^2); the third
    term exists only in the unstable branch of the argument and is omitted
    for lam1 <= 0.
    """
    terms = [1.0 / 6.0]
    if consts.norm_A2 > 0:
        terms.append(1.0 / (6.0 * consts.norm_A2))
    if lam1 > 0:
        denom = (24.0 * consts.norm_L2) ** 2 * max(lam1, _LAM1_GUARD) * p
        terms.append(consts.c / denom)
    return min(terms)


def covmin_bound(consts: StructuralConstants, lam1: float, p: int, horizon: float) -> float:
    """High-probability lower bound C4 * T * c * kappa^2 on lambda_min(V_T),
    valid in every stability regime."""
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if consts.c <= 0:
        raise ValueError("excitation constant c must be positive")
    return covmin_floor_constant(consts, lam1, p) * horizon * consts.c * consts.kappa**2


def theorem1_rate(
    regime: RegimeLike,
    p: int,
    norm_c2: float,
    c: float,
    kappa: float,
    horizon: float,
    delta: float,
    l_star: int = 1,
) -> float:
    """Regime-dependent squared-error rate guarantee, constants set to one.

    Stable: p ||C||^2 (log T - log delta) / (c T kappa^2); marginally
    stable carries the extra largest-Jordan-block factor l* (the refined
    form of the worst-case p^2); unstable trades the log T for T. These
    are order statements: meaningful in slopes and ratios, not levels.
    """
    delta = _check_delta(delta)
    regime = _as_regime(regime)
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if c <= 0:
        raise ValueError("excitation constant c must be positive")
    base = norm_c2**2 / (c * horizon * kappa**2)
    if regime is Regime.UNSTABLE:
        return p * base * (horizon - math.log(delta))
    log_term = math.log(horizon) - math.log(delta)
    if regime is Regime.MARGINALLY_STABLE:
        return l_star * p * base * log_term
    return p * base * log_term


@dataclass(frozen=True)
class BoundReport:
    """Every closed-form bound at one (T, delta), with the constants used."""

    horizon: float
    delta: float
    regime: Regime
    y_radius: float
    covmax_bound: float
    covmin_bound: float
    theorem1_bound: float
    constants_used: dict

    def to_record(self) -> dict:
        rec = {
            "T": self.horizon,
            "delta": self.delta,
            "regime": self.regime.value,
            "y_radius": self.y_radius,
            "covmax_bound": self.covmax_bound,
            "covmin_bound": self.covmin_bound,
            "theorem1_bound": self.theorem1_bound,
        }
        rec.update({f"const_{k}": v for k, v in sorted(self.constants_used.items())})
        return rec

    def format_record(self) -> str:
        return "".join(f"{k} = {v!r}\n" for k, v in self.to_record().items())


def build_bound_report(
    consts: StructuralConstants,
    spectrum: SpectrumSummary,
    horizon: float,
    delta: float,
    exponent_dim: Optional[int] = None,
) -> BoundReport:
    """Evaluate every bound for a system at one (T, delta).

    The radius here is data-free: det(V_bar)^(1/2) is replaced by its
    high-probability bound (1 + covmax)^(p/2), the same expansion the
    error-rate proof uses. Radii against a simulated covariance come from
    self_normalized_radius directly. exponent_dim defaults to q + r, the
    concatenated-process form.
    """
    delta = _check_delta(delta)
    lam1 = spectrum.lambda1
    regime = spectrum.regime
    l_star = spectrum.l_star
    r_dim = (consts.q + consts.r) if exponent_dim is None else int(exponent_dim)

    cov_hi = covmax_bound(regime, consts, l_star, lam1, horizon, delta)
    cov_lo = covmin_bound(consts, lam1, consts.p, horizon)
    radius_arg = r_dim * _LOG12 + 0.5 * consts.p * math.log1p(cov_hi) - math.log(delta)
    report = BoundReport(
        horizon=horizon,
        delta=delta,
        regime=regime,
        y_radius=math.sqrt(8.0 * radius_arg),
        covmax_bound=cov_hi,
        covmin_bound=cov_lo,
        theorem1_bound=theorem1_rate(
            regime, consts.p, consts.norm_C2, consts.c, consts.kappa, horizon, delta, l_star
        ),
        constants_used={
            "beta": consts.beta,
            "p_star": consts.p_star,
            "c": consts.c,
            "l_star": l_star,
            "lambda1": lam1,
            "norm_C2": consts.norm_C2,
            "norm_L2": consts.norm_L2,
            "norm_A2": consts.norm_A2,
            "p": consts.p,
            "q": consts.q,
            "r": consts.r,
            "kappa": consts.kappa,
        },
    )
    return report
