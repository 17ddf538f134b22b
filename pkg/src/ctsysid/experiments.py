"""Configuration-driven experiment runner.

Reproduces the reactor benchmark (scaled estimation error versus horizon,
twenty trajectories per regime) and the Monte-Carlo validations of the
closed-form bounds, emitting deterministic CSV tables plus a JSON metadata
sidecar. Reruns with an identical configuration are byte-identical.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from ._kernel import backend_name
from ._rng import initial_state
from .bounds import (
    covmax_bound,
    covmin_bound,
    lil_envelope,
    normalized_martingale_norm,
    self_normalized_radius,
    state_envelope,
)
from .estimator import accumulate_checkpoints, estimate
from .linalg import Regime
from .simulate import SimConfig, SystemSpec, simulate_trajectory

EXPERIMENTS = ("fig1", "lemma1-mc", "lil-mc", "eig-growth", "envelope-mc")

REACTOR_KAPPA = {5.0: 1.0, 10.0: 2.0, 15.0: 5.0}

RESULT_COLUMNS = [
    "experiment",
    "z",
    "regime",
    "kappa",
    "seed",
    "T",
    "err_spectral",
    "scaled_err",
    "lambda_min_V",
    "lambda_max_V",
    "y_radius",
    "covmin_bound",
    "covmax_bound",
    "truncated",
]

COVERAGE_COLUMNS = ["experiment", "system", "seed", "T", "statistic", "value", "bound", "violated"]


def reactor_system(z: float, seed: Optional[int] = None, kappa: Optional[float] = None) -> SystemSpec:
    """The three-state reactor benchmark system at parameter z.

    z controls stability: 5 is stable, 10 marginally stable, 15 unstable.
    kappa defaults to the benchmark pairing {5: 1, 10: 2, 15: 5}. When a
    seed is given the initial state is standard normal under that seed,
    otherwise zero.
    """
    a = np.array([[-1.0, 0.0, -float(z)], [2.0, -2.0, 0.0], [0.0, 3.0, -3.0]])
    scale = np.eye(3) / 5.0
    if kappa is None:
        kappa = REACTOR_KAPPA.get(float(z), 1.0)
    x0 = initial_state(seed, 3) if seed is not None else np.zeros(3)
    return SystemSpec(A=a, B=scale, C=scale, x0=x0, kappa=float(kappa))


def scalar_ou_system(kappa: float = 1.0) -> SystemSpec:
    """Scalar mean-reverting system dX = -X dt + kappa dU + dW, X0 = 0."""
    return SystemSpec(A=[[-1.0]], B=[[1.0]], C=[[1.0]], x0=[0.0], kappa=kappa)


def brownian_system() -> SystemSpec:
    """Standard Brownian motion as a degenerate system (no drift, no input)."""
    return SystemSpec(A=[[0.0]], B=[[0.0]], C=[[1.0]], x0=[0.0], kappa=1.0)


def scalar_unstable_system(growth: float = 0.3) -> SystemSpec:
    """Scalar unstable diffusion dX = growth * X dt + dW, X0 = 0."""
    return SystemSpec(A=[[float(growth)]], B=[[0.0]], C=[[1.0]], x0=[0.0], kappa=1.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; mirrors the key = value config file."""

    experiment: str = "fig1"
    z_values: tuple = (5.0, 10.0, 15.0)
    kappa: dict = field(default_factory=lambda: dict(REACTOR_KAPPA))
    trajectories: int = 20
    horizon: float = 50.0
    checkpoint_stride: float = 1.0
    dt: float = 1e-3
    delta: float = 0.1
    seed_base: int = 0
    out: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(
                f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}"
            )
        if self.trajectories < 1 or self.workers < 1:
            raise ValueError("trajectories and workers must be positive")
        if not (0 < self.dt <= self.horizon):
            raise ValueError("dt must satisfy 0 < dt <= horizon")
        if not (0 < self.checkpoint_stride <= self.horizon):
            raise ValueError("checkpoint_stride must lie in (0, horizon]")
        if not (0 < self.delta < 1):
            raise ValueError("delta must be in (0, 1)")
        missing = [z for z in self.z_values if float(z) not in self.kappa]
        if self.experiment in ("fig1", "eig-growth", "lemma1-mc") and missing:
            raise ValueError(f"kappa map does not cover z values {missing}")

    @property
    def checkpoint_times(self) -> list:
        n = int(round(self.horizon / self.checkpoint_stride))
        return [(i + 1) * self.checkpoint_stride for i in range(n)]

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "z_values": list(self.z_values),
            "kappa": {_format_number(k): v for k, v in sorted(self.kappa.items())},
            "trajectories": self.trajectories,
            "horizon": self.horizon,
            "checkpoint_stride": self.checkpoint_stride,
            "dt": self.dt,
            "delta": self.delta,
            "seed_base": self.seed_base,
            "out": self.out,
            "workers": self.workers,
        }


class ConfigError(ValueError):
    pass


def _parse_scalar(text: str):
    try:
        value = float(text)
    except ValueError as exc:
        raise ConfigError(f"expected a number, got {text!r}") from exc
    return value


def parse_config(text: str) -> ExperimentConfig:
    """Parse the key = value configuration format.

    Lists are comma separated (z_values = 5, 10, 15); the kappa map uses
    colon pairs (kappa = 5:1, 10:2, 15:5). '#' starts a comment.
    """
    fields: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "experiment":
            fields[key] = value
        elif key == "out":
            fields[key] = value
        elif key == "z_values":
            fields[key] = tuple(_parse_scalar(v) for v in value.split(",") if v.strip())
        elif key == "kappa":
            pairs = {}
            for item in value.split(","):
                if not item.strip():
                    continue
                if ":" not in item:
                    raise ConfigError(f"line {lineno}: kappa entries are z:value pairs")
                z_txt, k_txt = item.split(":", 1)
                pairs[_parse_scalar(z_txt)] = _parse_scalar(k_txt)
            fields[key] = pairs
        elif key in ("trajectories", "seed_base", "workers"):
            fields[key] = int(_parse_scalar(value))
        elif key in ("horizon", "checkpoint_stride", "dt", "delta"):
            fields[key] = _parse_scalar(value)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    try:
        return ExperimentConfig(**fields)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def _format_number(x) -> str:
    x = float(x)
    if math.isfinite(x) and x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _format_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, columns: list, rows: list) -> None:
    with open(path, "w", newline="") as out:
        out.write(",".join(columns) + "\n")
        for row in rows:
            out.write(",".join(_format_cell(row[c]) for c in columns) + "\n")


def _covmax_or_none(spectrum, consts, t: float, delta: float) -> Optional[float]:
    # The marginally stable coefficient is undefined below t = 1.
    try:
        return covmax_bound(spectrum.regime, consts, spectrum.l_star, spectrum.lambda1, t, delta)
    except ValueError:
        return None


def _z_sort_key(value) -> tuple:
    try:
        return (0, float(value), "")
    except (TypeError, ValueError):
        return (1, 0.0, str(value))


def _map_seeds(config: ExperimentConfig, worker: Callable[[int], tuple]) -> list:
    seeds = [config.seed_base + i for i in range(config.trajectories)]
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(worker, seeds))
    return [worker(s) for s in seeds]


def _reactor_sweep(config: ExperimentConfig, kappa_override: Optional[float], with_coverage: bool):
    """Shared engine of fig1 and eig-growth: per (z, seed, T) estimates,
    data radii and closed-form bounds."""
    rows: list = []
    coverage: list = []
    meta_x0: dict = {}
    checkpoint_times = config.checkpoint_times
    for z in config.z_values:
        kappa = kappa_override if kappa_override is not None else config.kappa[float(z)]
        base = reactor_system(z, kappa=kappa)
        consts = base.structural()
        spectrum = base.spectrum()
        regime = spectrum.regime.value
        bound_lo = {
            t: covmin_bound(consts, spectrum.lambda1, consts.p, t) for t in checkpoint_times
        }
        bound_hi = {t: _covmax_or_none(spectrum, consts, t, config.delta) for t in checkpoint_times}
        steps = [max(1, int(round(t / config.dt))) for t in checkpoint_times]
        exponent = consts.q + consts.r
        identity = np.eye(base.p)

        def run_seed(seed: int, z=z, kappa=kappa, base=base):
            system = base.with_initial_state(initial_state(seed, base.p))
            traj = simulate_trajectory(
                system, SimConfig(horizon=config.horizon, step=config.dt, seed=seed)
            )
            seed_rows = []
            seed_cov = []
            for target_t, target_n, acc in zip(
                checkpoint_times, steps, accumulate_checkpoints(traj, steps)
            ):
                est = estimate(acc, truth=system)
                radius = self_normalized_radius(
                    acc.cov + identity, identity, exponent, config.delta
                )
                seed_rows.append(
                    {
                        "experiment": config.experiment,
                        "z": _format_number(z),
                        "regime": regime,
                        "kappa": _format_number(kappa),
                        "seed": seed,
                        "T": float(target_t),
                        "err_spectral": est.err_spectral,
                        "scaled_err": math.sqrt(float(target_t)) * est.err_spectral,
                        "lambda_min_V": est.min_eig_V,
                        "lambda_max_V": est.max_eig_V,
                        "y_radius": radius,
                        "covmin_bound": bound_lo[target_t],
                        "covmax_bound": bound_hi[target_t],
                        "truncated": acc.count < target_n,
                    }
                )
                if with_coverage:
                    seed_cov.append(
                        {
                            "experiment": config.experiment,
                            "system": f"reactor-z{_format_number(z)}",
                            "seed": seed,
                            "T": float(target_t),
                            "statistic": "lambda_min_over_bound",
                            "value": est.min_eig_V / bound_lo[target_t],
                            "bound": 1.0,
                            "violated": est.min_eig_V < bound_lo[target_t],
                        }
                    )
                    if bound_hi[target_t] is not None:
                        seed_cov.append(
                            {
                                "experiment": config.experiment,
                                "system": f"reactor-z{_format_number(z)}",
                                "seed": seed,
                                "T": float(target_t),
                                "statistic": "lambda_max_over_bound",
                                "value": est.max_eig_V / bound_hi[target_t],
                                "bound": 1.0,
                                "violated": est.max_eig_V > bound_hi[target_t],
                            }
                        )
            return system.x0, seed_rows, seed_cov

        for seed, (x0, seed_rows, seed_cov) in zip(
            [config.seed_base + i for i in range(config.trajectories)],
            _map_seeds(config, lambda s: run_seed(s)),
        ):
            meta_x0[f"z={_format_number(z)},kappa={_format_number(kappa)},seed={seed}"] = list(x0)
            rows.extend(seed_rows)
            coverage.extend(seed_cov)
    return rows, coverage, meta_x0


def _run_lemma1_mc(config: ExperimentConfig, kappa_override: Optional[float]):
    """Coverage of the self-normalized radius over integer checkpoints,
    for the scalar OU system and each configured reactor."""
    rows: list = []
    coverage: list = []
    meta_x0: dict = {}
    checkpoint_times = config.checkpoint_times
    systems = [("ou", scalar_ou_system(), None)]
    for z in config.z_values:
        kappa = kappa_override if kappa_override is not None else config.kappa[float(z)]
        systems.append((f"reactor-z{_format_number(z)}", reactor_system(z, kappa=kappa), z))

    for label, base, z in systems:
        regime = base.spectrum().regime.value
        consts = base.structural()
        spectrum = base.spectrum()
        steps = [max(1, int(round(t / config.dt))) for t in checkpoint_times]
        identity = np.eye(base.p)
        bound_lo = {
            t: covmin_bound(consts, spectrum.lambda1, consts.p, t) for t in checkpoint_times
        }
        bound_hi = {t: _covmax_or_none(spectrum, consts, t, config.delta) for t in checkpoint_times}

        def run_seed(seed: int, base=base):
            system = (
                base.with_initial_state(initial_state(seed, base.p)) if z is not None else base
            )
            traj = simulate_trajectory(
                system, SimConfig(horizon=config.horizon, step=config.dt, seed=seed)
            )
            seed_rows = []
            worst = 0.0
            for target_t, acc in zip(checkpoint_times, accumulate_checkpoints(traj, steps)):
                est = estimate(acc, truth=system)
                stat = normalized_martingale_norm(acc.cov, acc.noise_cross)
                radius = self_normalized_radius(
                    acc.cov + identity, identity, system.r, config.delta
                )
                worst = max(worst, stat / radius)
                seed_rows.append(
                    {
                        "experiment": config.experiment,
                        "z": _format_number(z) if z is not None else label,
                        "regime": regime,
                        "kappa": _format_number(system.kappa),
                        "seed": seed,
                        "T": float(target_t),
                        "err_spectral": est.err_spectral,
                        "scaled_err": math.sqrt(float(target_t)) * est.err_spectral,
                        "lambda_min_V": est.min_eig_V,
                        "lambda_max_V": est.max_eig_V,
                        "y_radius": radius,
                        "covmin_bound": bound_lo[target_t],
                        "covmax_bound": bound_hi[target_t],
                        "truncated": acc.count < int(round(target_t / config.dt)),
                    }
                )
            cov_row = {
                "experiment": config.experiment,
                "system": label,
                "seed": seed,
                "T": float(checkpoint_times[-1]),
                "statistic": "sup_normalized_martingale_over_radius",
                "value": worst,
                "bound": 1.0,
                "violated": worst > 1.0,
            }
            return (system.x0 if z is not None else None), seed_rows, [cov_row]

        for seed, (x0, seed_rows, seed_cov) in zip(
            [config.seed_base + i for i in range(config.trajectories)],
            _map_seeds(config, lambda s: run_seed(s)),
        ):
            if x0 is not None:
                meta_x0[f"system={label},seed={seed}"] = list(x0)
            rows.extend(seed_rows)
            coverage.extend(seed_cov)
    return rows, coverage, meta_x0


def _run_lil_mc(config: ExperimentConfig, kappa_override: Optional[float]):
    """Fraction of standard Brownian paths crossing the iterated-logarithm
    boundary (s = 2, eta = e)."""
    rows: list = []
    coverage: list = []
    base = brownian_system()
    steps = [max(1, int(round(t / config.dt))) for t in config.checkpoint_times]

    def run_seed(seed: int):
        traj = simulate_trajectory(
            base, SimConfig(horizon=config.horizon, step=config.dt, seed=seed)
        )
        path = traj.states[1:, 0]
        grid = traj.times[1:]
        boundary = lil_envelope(grid, config.delta)
        ratio = float(np.max(path / boundary))
        seed_rows = []
        for target_t, acc in zip(config.checkpoint_times, accumulate_checkpoints(traj, steps)):
            est = estimate(acc, truth=base)
            radius = self_normalized_radius(
                acc.cov + np.eye(1), np.eye(1), base.r, config.delta
            )
            seed_rows.append(
                {
                    "experiment": config.experiment,
                    "z": "bm",
                    "regime": Regime.MARGINALLY_STABLE.value,
                    "kappa": "1",
                    "seed": seed,
                    "T": float(target_t),
                    "err_spectral": est.err_spectral,
                    "scaled_err": math.sqrt(float(target_t)) * est.err_spectral,
                    "lambda_min_V": est.min_eig_V,
                    "lambda_max_V": est.max_eig_V,
                    "y_radius": radius,
                    "covmin_bound": None,
                    "covmax_bound": None,
                    "truncated": False,
                }
            )
        cov_row = {
            "experiment": config.experiment,
            "system": "brownian",
            "seed": seed,
            "T": float(config.checkpoint_times[-1]),
            "statistic": "sup_path_over_lil_boundary",
            "value": ratio,
            "bound": 1.0,
            "violated": ratio > 1.0,
        }
        return None, seed_rows, [cov_row]

    for _, seed_rows, seed_cov in _map_seeds(config, run_seed):
        rows.extend(seed_rows)
        coverage.extend(seed_cov)
    return rows, coverage, {}


def _run_envelope_mc(config: ExperimentConfig, kappa_override: Optional[float]):
    """Coverage of the unstable state envelope for dX = 0.3 X dt + dW."""
    rows: list = []
    coverage: list = []
    growth = 0.3
    base = scalar_unstable_system(growth)

    def run_seed(seed: int):
        traj = simulate_trajectory(
            base, SimConfig(horizon=config.horizon, step=config.dt, seed=seed)
        )
        grid = traj.times[1:]
        envelope = state_envelope(Regime.UNSTABLE, growth, 1.0, grid, config.delta)
        ratio = float(np.max(np.abs(traj.states[1:, 0]) / envelope))
        cov_row = {
            "experiment": config.experiment,
            "system": f"scalar-unstable-{growth}",
            "seed": seed,
            "T": float(config.horizon),
            "statistic": "sup_state_over_envelope",
            "value": ratio,
            "bound": 1.0,
            "violated": ratio > 1.0,
        }
        return None, [], [cov_row]

    for _, seed_rows, seed_cov in _map_seeds(config, run_seed):
        rows.extend(seed_rows)
        coverage.extend(seed_cov)
    return rows, coverage, {}


_RUNNERS = {
    "fig1": lambda cfg, ko: _reactor_sweep(cfg, ko, with_coverage=False),
    "eig-growth": lambda cfg, ko: _reactor_sweep(cfg, ko, with_coverage=True),
    "lemma1-mc": _run_lemma1_mc,
    "lil-mc": _run_lil_mc,
    "envelope-mc": _run_envelope_mc,
}


def run_experiment(
    config: ExperimentConfig,
    out_dir,
    kappa_override: Optional[float] = None,
) -> dict:
    """Run one experiment and write results.csv, metadata.json and, for the
    Monte-Carlo experiments, coverage.csv. Returns the row lists."""
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)

    rows, coverage, meta_x0 = _RUNNERS[config.experiment](config, kappa_override)
    rows.sort(key=lambda r: (_z_sort_key(r["z"]), r["kappa"], r["seed"], r["T"]))
    coverage.sort(key=lambda r: (r["system"], r["seed"], r["T"], r["statistic"]))

    _write_csv(out_path / "results.csv", RESULT_COLUMNS, rows)
    if coverage:
        _write_csv(out_path / "coverage.csv", COVERAGE_COLUMNS, coverage)

    metadata = {
        "config": config.to_dict(),
        "kappa_override": kappa_override,
        "kernel_backend": backend_name(),
        "package_version": __version__,
        "initial_states": meta_x0,
    }
    with open(out_path / "metadata.json", "w", newline="") as out:
        json.dump(metadata, out, indent=2, sort_keys=True)
        out.write("\n")
    return {"rows": rows, "coverage": coverage}


def _read_csv(path: Path) -> list:
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def summarize(in_dir) -> dict:
    """Aggregate a results directory: per-group scaled-error quantiles,
    log-log error slopes over T in [10, 50], and coverage fractions."""
    in_path = Path(in_dir)
    rows = _read_csv(in_path / "results.csv")
    if not rows:
        raise ValueError(f"no rows in {in_path / 'results.csv'}")

    groups: dict = {}
    for row in rows:
        groups.setdefault((row["experiment"], row["z"], row["kappa"]), []).append(row)

    summary: dict = {"groups": {}, "coverage": {}}
    for key in sorted(groups):
        grp = groups[key]
        by_t: dict = {}
        by_seed: dict = {}
        for row in grp:
            if row["err_spectral"] == "":
                continue
            t = float(row["T"])
            by_t.setdefault(t, []).append(float(row["scaled_err"]))
            by_seed.setdefault(row["seed"], []).append((t, float(row["err_spectral"])))
        med_by_t = {
            t: float(np.median(vals)) for t, vals in sorted(by_t.items())
        }
        quart_by_t = {
            t: (float(np.percentile(vals, 25)), float(np.percentile(vals, 75)))
            for t, vals in sorted(by_t.items())
        }
        slopes = []
        for pts in by_seed.values():
            sel = [(t, e) for t, e in pts if 10.0 <= t <= 50.0 and e > 0]
            if len(sel) >= 3:
                log_t = np.log([t for t, _ in sel])
                log_e = np.log([e for _, e in sel])
                slopes.append(float(np.polyfit(log_t, log_e, 1)[0]))
        summary["groups"]["experiment={},z={},kappa={}".format(*key)] = {
            "n_rows": len(grp),
            "median_scaled_err_by_T": med_by_t,
            "quartiles_scaled_err_by_T": quart_by_t,
            "median_loglog_slope": float(np.median(slopes)) if slopes else None,
        }

    coverage_path = in_path / "coverage.csv"
    if coverage_path.exists():
        cov_rows = _read_csv(coverage_path)
        per_system: dict = {}
        for row in cov_rows:
            key = (row["system"], row["statistic"])
            per_system.setdefault(key, {}).setdefault(row["seed"], False)
            if row["violated"] == "1":
                per_system[key][row["seed"]] = True
        for (system, statistic), seeds in sorted(per_system.items()):
            frac = sum(seeds.values()) / len(seeds)
            summary["coverage"][f"system={system},statistic={statistic}"] = {
                "seeds": len(seeds),
                "violation_fraction": frac,
            }
    return summary


def format_summary(summary: dict) -> str:
    lines = []
    for key, grp in summary["groups"].items():
        lines.append(f"[{key}]")
        lines.append(f"rows = {grp['n_rows']}")
        slope = grp["median_loglog_slope"]
        lines.append(f"median_loglog_slope = {slope!r}")
        med = grp["median_scaled_err_by_T"]
        if med:
            last_t = max(med)
            lines.append(f"median_scaled_err_at_T={_format_number(last_t)} = {med[last_t]!r}")
        lines.append("")
    for key, cov in summary["coverage"].items():
        lines.append(f"[{key}]")
        lines.append(f"seeds = {cov['seeds']}")
        lines.append(f"violation_fraction = {cov['violation_fraction']!r}")
        lines.append("")
    return "\n".join(lines)
