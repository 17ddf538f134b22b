"""Acceptance suite: every primary criterion at its stated tolerance.

Each test prints one [PASS]/[FAIL] line (run with `pytest -s` to see them
on success). Expensive simulations are shared through module fixtures; a
test that triggers a fixture build pays for it inside its own runtime
budget, so the stated budgets hold end to end.
"""

import math
import time

import numpy as np
import pytest

from ctsysid.bounds import (
    lil_envelope,
    normalized_martingale_norm,
    self_normalized_radius,
)
from ctsysid.estimator import (
    accumulate_checkpoints,
    error_identity_residual,
    estimate,
)
from ctsysid.experiments import (
    ExperimentConfig,
    reactor_system,
    run_experiment,
    scalar_ou_system,
)
from ctsysid.linalg import eigen_real_parts
from ctsysid.simulate import SimConfig, SystemSpec, simulate_trajectory

DT = 1e-3
HORIZON = 50.0
N_SEEDS = 20
CHECKPOINTS = list(range(1, 51))
STEPS = [int(round(t / DT)) for t in CHECKPOINTS]

REGIME_ARMS = [(5.0, 1.0), (10.0, 2.0), (15.0, 5.0)]
ALL_ARMS = REGIME_ARMS + [(15.0, 1.0)]


def report(name: str, passed: bool, detail: str) -> None:
    print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    assert passed, f"{name}: {detail}"


def run_arm(z: float, kappa: float, n_seeds: int = N_SEEDS) -> dict:
    errs = np.empty((n_seeds, len(CHECKPOINTS)))
    lmin = np.empty_like(errs)
    lmax = np.empty_like(errs)
    resid_rel = np.empty(n_seeds)
    for i in range(n_seeds):
        spec = reactor_system(z, seed=i, kappa=kappa)
        traj = simulate_trajectory(spec, SimConfig(horizon=HORIZON, step=DT, seed=i))
        accs = accumulate_checkpoints(traj, STEPS)
        for j, acc in enumerate(accs):
            est = estimate(acc, truth=spec)
            errs[i, j] = est.err_spectral
            lmin[i, j] = est.min_eig_V
            lmax[i, j] = est.max_eig_V
        final_est = estimate(accs[-1], truth=spec)
        resid = error_identity_residual(final_est, accs[-1], spec)
        resid_rel[i] = resid / np.linalg.norm(final_est.A_hat, 2)
    return {"errs": errs, "lmin": lmin, "lmax": lmax, "resid_rel": resid_rel}


@pytest.fixture(scope="module")
def sweep():
    data = {}
    start = time.perf_counter()
    for z, kappa in ALL_ARMS:
        data[(z, kappa)] = run_arm(z, kappa)
    data["build_seconds"] = time.perf_counter() - start
    return data


def test_spectral_ground_truth():
    start = time.perf_counter()
    lam_5 = eigen_real_parts(reactor_system(5).A)[0]
    lam_10 = eigen_real_parts(reactor_system(10).A)[0]
    lam_15 = eigen_real_parts(reactor_system(15).A)[0]
    elapsed = time.perf_counter() - start
    ok = (
        abs(lam_5 - (-0.3928)) <= 1e-3
        and abs(lam_10) <= 1e-6
        and abs(lam_15 - 0.2779) <= 1e-3
        and elapsed < 1.0
    )
    report(
        "spectral-ground-truth",
        ok,
        f"lambda1(z=5)={lam_5:.4f}, lambda1(z=10)={lam_10:.2e}, "
        f"lambda1(z=15)={lam_15:.4f}, {elapsed:.3f}s",
    )


def test_exact_error_identity(sweep):
    start = time.perf_counter()
    worst = max(float(sweep[arm]["resid_rel"].max()) for arm in REGIME_ARMS)
    elapsed = time.perf_counter() - start + sweep["build_seconds"]
    ok = worst <= 1e-10 and elapsed < 60.0
    report(
        "exact-error-identity",
        ok,
        f"max relative residual over 3 regimes x {N_SEEDS} seeds = {worst:.2e}, "
        f"{elapsed:.1f}s",
    )


def test_noiseless_exactness():
    start = time.perf_counter()
    worst = 0.0
    for z, _ in REGIME_ARMS:
        base = reactor_system(z, seed=0, kappa=1.0)
        spec = SystemSpec(A=base.A, B=base.B, C=np.zeros((3, 1)), x0=base.x0, kappa=1.0)
        traj = simulate_trajectory(spec, SimConfig(horizon=10.0, step=DT, seed=0))
        for acc in accumulate_checkpoints(traj, [int(round(10.0 / DT))]):
            est = estimate(acc, truth=spec)
            assert not est.used_pseudoinverse
            worst = max(
                worst, float(np.linalg.norm(est.A_hat - spec.A, 2) / np.linalg.norm(spec.A, 2))
            )
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8
    report(
        "noiseless-exactness",
        ok,
        f"max relative error with C=0 across regimes = {worst:.2e}, {elapsed:.1f}s",
    )


def test_rate_check(sweep):
    start = time.perf_counter()
    t_grid = np.array(CHECKPOINTS, dtype=float)
    mask = (t_grid >= 10.0) & (t_grid <= 50.0)
    log_t = np.log(t_grid[mask])

    slopes = {}
    for z, kappa in [(5.0, 1.0), (10.0, 2.0)]:
        per_seed = [
            float(np.polyfit(log_t, np.log(sweep[(z, kappa)]["errs"][i, mask]), 1)[0])
            for i in range(N_SEEDS)
        ]
        slopes[(z, kappa)] = float(np.median(per_seed))

    err_k5 = float(np.median(sweep[(15.0, 5.0)]["errs"][:, -1]))
    err_k1 = float(np.median(sweep[(15.0, 1.0)]["errs"][:, -1]))
    elapsed = time.perf_counter() - start + sweep["build_seconds"]

    ok = (
        all(-0.75 <= s <= -0.25 for s in slopes.values())
        and err_k5 < err_k1
        and elapsed < 300.0
    )
    report(
        "rate-check",
        ok,
        f"slopes z5={slopes[(5.0, 1.0)]:.3f}, z10={slopes[(10.0, 2.0)]:.3f} "
        f"(need [-0.75,-0.25]); z15 median err@50: kappa5={err_k5:.4f} < "
        f"kappa1={err_k1:.4f}; {elapsed:.1f}s",
    )


def test_lemma1_coverage():
    start = time.perf_counter()
    delta = 0.1
    n_seeds = 500
    fractions = {}
    for label, make_spec in [
        ("scalar-ou", lambda seed: scalar_ou_system()),
        ("reactor-z5", lambda seed: reactor_system(5, seed=seed, kappa=1.0)),
    ]:
        violations = 0
        for seed in range(n_seeds):
            spec = make_spec(seed)
            traj = simulate_trajectory(spec, SimConfig(horizon=HORIZON, step=DT, seed=seed))
            identity = np.eye(spec.p)
            violated = False
            for acc in accumulate_checkpoints(traj, STEPS):
                stat = normalized_martingale_norm(acc.cov, acc.noise_cross)
                radius = self_normalized_radius(acc.cov + identity, identity, spec.r, delta)
                if stat > radius:
                    violated = True
                    break
            violations += violated
        fractions[label] = violations / n_seeds
    elapsed = time.perf_counter() - start
    ok = all(f <= delta for f in fractions.values()) and elapsed < 600.0
    report(
        "lemma1-coverage",
        ok,
        f"violation fractions {fractions} (delta={delta}, {n_seeds} seeds), {elapsed:.1f}s",
    )


def test_lil_coverage():
    start = time.perf_counter()
    delta = 0.1
    n_paths = 500
    step = HORIZON / 10_000
    spec = SystemSpec(A=[[0.0]], B=[[0.0]], C=[[1.0]], x0=[0.0])
    crossings = 0
    boundary = None
    for seed in range(n_paths):
        traj = simulate_trajectory(spec, SimConfig(horizon=HORIZON, step=step, seed=seed))
        if boundary is None:
            boundary = lil_envelope(traj.times[1:], delta)
        if np.any(traj.states[1:, 0] >= boundary):
            crossings += 1
    fraction = crossings / n_paths
    elapsed = time.perf_counter() - start
    ok = fraction <= delta
    report(
        "lil-coverage",
        ok,
        f"boundary crossing fraction = {fraction:.3f} <= {delta} "
        f"({n_paths} Brownian paths, 1e4 steps), {elapsed:.1f}s",
    )


def test_lemma2_growth(sweep):
    # unstable: (1/T) log lambda_max(V_T) at T = 50 tracks 2 lambda_1
    growth = np.log(sweep[(15.0, 5.0)]["lmax"][:, -1]) / 50.0
    med_growth = float(np.median(growth))
    target = 0.5558
    unstable_ok = abs(med_growth - target) <= 0.2 * target

    # stable: lambda_max(V_T) / T stays bounded
    ratio_50 = float(np.median(sweep[(5.0, 1.0)]["lmax"][:, 49] / 50.0))
    ratio_25 = float(np.median(sweep[(5.0, 1.0)]["lmax"][:, 24] / 25.0))
    stable_ok = ratio_50 <= 3.0 * ratio_25 and ratio_25 <= 3.0 * ratio_50

    report(
        "lemma2-growth",
        unstable_ok and stable_ok,
        f"z15 median (1/T)log lambda_max = {med_growth:.4f} vs 2*lambda1 = {target}; "
        f"z5 lambda_max/T at 50 vs 25: {ratio_50:.3f} vs {ratio_25:.3f}",
    )


def test_lemma3_floor(sweep):
    details = []
    ok = True
    for z, kappa in REGIME_ARMS:
        consts = reactor_system(z, kappa=kappa).structural()
        scale_50 = 50.0 * consts.c * kappa**2
        scale_25 = 25.0 * consts.c * kappa**2
        floor_50 = float(np.min(sweep[(z, kappa)]["lmin"][:, 49]) / scale_50)
        floor_25 = float(np.min(sweep[(z, kappa)]["lmin"][:, 24]) / scale_25)
        ok = ok and floor_50 > 0 and floor_50 >= 0.5 * floor_25
        details.append(f"z{int(z)}: @50={floor_50:.4f} @25={floor_25:.4f}")
    report(
        "lemma3-floor",
        ok,
        "min over seeds of lambda_min(V_T)/(T c kappa^2): " + "; ".join(details),
    )


def test_fig1_determinism(tmp_path):
    start = time.perf_counter()
    config = ExperimentConfig(
        experiment="fig1",
        z_values=(5.0, 10.0, 15.0),
        kappa={5.0: 1.0, 10.0: 2.0, 15.0: 5.0},
        trajectories=4,
        horizon=12.0,
        checkpoint_stride=1.0,
        dt=DT,
        delta=0.1,
        seed_base=77,
    )
    run_experiment(config, tmp_path / "first")
    run_experiment(config, tmp_path / "second")
    same = all(
        (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()
        for name in ("results.csv", "metadata.json")
    )
    elapsed = time.perf_counter() - start
    report(
        "fig1-determinism",
        same,
        f"two runs byte-identical (results.csv, metadata.json), {elapsed:.1f}s",
    )
