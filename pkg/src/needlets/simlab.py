"""Monte-Carlo harness: calibrated noise, three estimators, loss tables.

One experiment sweeps (target, noise level) settings. Per setting it
calibrates epsilon from the target's blurred signal, draws `runs`
independent observations with derived per-run seeds, runs each configured
estimator on the same draws, and scores both weighted losses against the
true target values on the grid (so truncation bias is charged honestly).
Everything downstream of the config and master seed is deterministic.

The projection estimator's cutoff is chosen per setting: the N minimizing
the mean weighted RMSE over the setting's runs, mimicking a tuning curve
read off at its minimum. The adaptive filter and the thresholding
estimator use their own data-driven rules.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantError
from .estimators import (
    KAPPA_DEFAULT,
    make_adaptive_config,
    make_threshold_plan,
    need_d,
    svd_adaptive,
)
from .filters import POLYNOMIAL_SHAPE, make_filter, make_profile
from .frame import NODES_EXACT, NeedletFrame, build_frame, jacobi_basis
from .losses import weighted_loss
from .models import (
    SvdModel,
    calibrate_epsilon,
    coeffs_from_function,
    derive_seed,
    eval_e,
    sample_observation,
    wicksell_model,
)
from .targets import TARGET_NAMES, target_breakpoints, target_function

__all__ = [
    "ESTIMATOR_NAMES",
    "FrameSpec",
    "AdaptiveSpec",
    "NeedDSpec",
    "SimulationConfig",
    "CellResult",
    "SimulationReport",
    "RateTarget",
    "RateStudy",
    "run_experiment",
    "rate_study",
    "emit_report",
    "load_report",
]

ESTIMATOR_NAMES = ("svd-proj", "svd-adapt", "needd")


@dataclass(frozen=True)
class FrameSpec:
    alpha: float = 0.0
    beta: float = 1.0
    jmax: int = 8
    m: int = 2
    nodes_per_level: str = NODES_EXACT


@dataclass(frozen=True)
class AdaptiveSpec:
    gamma: float = 0.1
    logbase: float = math.e


@dataclass(frozen=True)
class NeedDSpec:
    kappa: float = KAPPA_DEFAULT


@dataclass(frozen=True)
class SimulationConfig:
    """Full experiment description; the constructor validates shape invariants.

    `targets` normally names the standard test signals; run_experiment also
    accepts synthetic coefficient targets under extra names (used by the
    noise-free exactness checks), so membership in the standard set is
    enforced when parsing external configs, not here.
    """

    targets: tuple[str, ...] = TARGET_NAMES
    rsnr: tuple[float, ...] = (3.0, 5.0, 7.0)
    n: int = 1024
    runs: int = 20
    estimators: tuple[str, ...] = ESTIMATOR_NAMES
    seed: int = 65537
    frame: FrameSpec = field(default_factory=FrameSpec)
    adaptive: AdaptiveSpec = field(default_factory=AdaptiveSpec)
    needd: NeedDSpec = field(default_factory=NeedDSpec)
    epsilon_override: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "rsnr", tuple(float(r) for r in self.rsnr))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.n < 64:
            raise ValueError(f"grid resolution must be >= 64, got {self.n}")
        if not self.targets or len(set(self.targets)) != len(self.targets):
            raise ValueError("targets must be a nonempty list without repeats")
        if not self.rsnr or any(r <= 0 for r in self.rsnr):
            raise ValueError("every rsnr level must be positive")
        bad = [e for e in self.estimators if e not in ESTIMATOR_NAMES]
        if bad or not self.estimators:
            raise ValueError(f"unknown estimators {bad}; choose from {ESTIMATOR_NAMES}")
        if self.epsilon_override is not None and not 0.0 <= self.epsilon_override < 1.0:
            raise ValueError(f"epsilon override must be in [0, 1), got {self.epsilon_override}")

    def to_dict(self) -> dict:
        return {
            "targets": list(self.targets),
            "rsnr": list(self.rsnr),
            "n": self.n,
            "runs": self.runs,
            "estimators": list(self.estimators),
            "seed": self.seed,
            "frame": {
                "alpha": self.frame.alpha,
                "beta": self.frame.beta,
                "jmax": self.frame.jmax,
                "m": self.frame.m,
                "nodes-per-level": self.frame.nodes_per_level,
            },
            "adaptive": {"gamma": self.adaptive.gamma, "logbase": self.adaptive.logbase},
            "needd": {"kappa": self.needd.kappa},
            "epsilon-override": self.epsilon_override,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "SimulationConfig":
        """Parse an external config mapping; unknown keys or targets are errors."""
        known = {
            "targets", "rsnr", "n", "runs", "estimators", "seed",
            "frame", "adaptive", "needd", "epsilon-override",
        }
        extra = set(raw) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        for name in raw.get("targets", ()):
            if name not in TARGET_NAMES:
                raise ValueError(f"unknown target {name!r}; choose from {TARGET_NAMES}")

        def sub(key, spec_cls, keymap):
            group = dict(raw.get(key) or {})
            bad = set(group) - set(keymap)
            if bad:
                raise ValueError(f"unknown {key} config keys: {sorted(bad)}")
            return spec_cls(**{attr: group[k] for k, attr in keymap.items() if k in group})

        kwargs = {k: raw[k] for k in ("targets", "rsnr", "n", "runs", "estimators", "seed") if k in raw}
        if raw.get("epsilon-override") is not None:
            kwargs["epsilon_override"] = float(raw["epsilon-override"])
        kwargs["frame"] = sub("frame", FrameSpec, {
            "alpha": "alpha", "beta": "beta", "jmax": "jmax", "m": "m",
            "nodes-per-level": "nodes_per_level",
        })
        kwargs["adaptive"] = sub("adaptive", AdaptiveSpec, {"gamma": "gamma", "logbase": "logbase"})
        kwargs["needd"] = sub("needd", NeedDSpec, {"kappa": "kappa"})
        return cls(**kwargs)


@dataclass(frozen=True)
class CellResult:
    """Per-run losses of one estimator in one (target, noise) setting."""

    target: str
    rsnr: float
    estimator: str
    epsilon: float
    seeds: tuple[int, ...]
    l1: np.ndarray
    rmse: np.ndarray
    n_star: int | None = None

    @property
    def mean_l1(self) -> float:
        return float(np.mean(self.l1))

    @property
    def mean_rmse(self) -> float:
        return float(np.mean(self.rmse))

    @property
    def stderr_l1(self) -> float:
        return _stderr(self.l1)

    @property
    def stderr_rmse(self) -> float:
        return _stderr(self.rmse)


def _stderr(x: np.ndarray) -> float:
    if x.size < 2:
        return 0.0
    return float(np.std(x, ddof=1) / math.sqrt(x.size))


@dataclass(frozen=True)
class SimulationReport:
    config: SimulationConfig
    cells: tuple[CellResult, ...]

    def cell(self, target: str, rsnr: float, estimator: str) -> CellResult:
        for c in self.cells:
            if c.target == target and c.estimator == estimator and c.rsnr == rsnr:
                return c
        raise KeyError((target, rsnr, estimator))


def _build_frame(spec: FrameSpec) -> NeedletFrame:
    filt = make_filter(make_profile(POLYNOMIAL_SHAPE, spec.m))
    return build_frame(jacobi_basis(spec.alpha, spec.beta), filt, spec.jmax, spec.nodes_per_level)


def _pad(coeffs: np.ndarray, size: int) -> np.ndarray:
    if coeffs.shape[0] > size:
        # only an identically-zero tail may be dropped; anything else would
        # silently change the target
        if np.any(coeffs[size:]):
            raise ValueError(
                f"coefficient target has support beyond index {size - 1}, "
                "outside the frame budget"
            )
        return np.asarray(coeffs[:size], dtype=float)
    out = np.zeros(size)
    out[: coeffs.shape[0]] = coeffs
    return out


def _projection_cell(ybars, e_vals, true_vals, n):
    """Cutoff index minimizing mean weighted RMSE over the runs, plus losses there."""
    grid_w = (1.0 / (4.0 * np.arange(1, n + 1) / n)) / n
    rmse_by_cut = np.zeros(e_vals.shape[0])
    for ybar in ybars:
        diff = np.cumsum(ybar[:, None] * e_vals, axis=0) - true_vals
        rmse_by_cut += np.sqrt((diff * diff) @ grid_w)
    n_star = int(np.argmin(rmse_by_cut))
    l1, rmse = [], []
    for ybar in ybars:
        fhat_vals = ybar[: n_star + 1] @ e_vals[: n_star + 1]
        l1.append(weighted_loss(true_vals, fhat_vals, n, 1))
        rmse.append(weighted_loss(true_vals, fhat_vals, n, 2))
    return n_star, np.asarray(l1), np.asarray(rmse)


def _adaptive_limit(model: SvdModel, ybar: np.ndarray, n: int) -> np.ndarray:
    # zero-noise limit of the blockwise filter: unit weights up to the n/2 cap
    fhat = np.zeros_like(ybar)
    top = min(n // 2, model.kmax)
    fhat[: top + 1] = ybar[: top + 1]
    return fhat


def run_experiment(config: SimulationConfig, coefficient_targets: dict | None = None) -> SimulationReport:
    """Run the full (target x noise x estimator) sweep of the config.

    coefficient_targets maps extra target names to coefficient vectors,
    letting tests probe exactly representable signals; their true grid
    values come from the basis expansion instead of a closed formula.
    """
    coefficient_targets = coefficient_targets or {}
    frame = _build_frame(config.frame)
    model = wicksell_model(kmax=frame.budget)
    n = config.n
    grid = np.arange(1, n + 1) / n
    e_vals = eval_e(model, model.kmax, grid)

    cells = []
    for target in config.targets:
        if target in coefficient_targets:
            f_coeffs = _pad(np.asarray(coefficient_targets[target], dtype=float), model.kmax + 1)
            true_vals = f_coeffs @ e_vals
        elif target in TARGET_NAMES:
            f = target_function(target)
            f_coeffs = coeffs_from_function(model, f, model.kmax, target_breakpoints(target))
            true_vals = f(grid)
        else:
            raise ValueError(f"unknown target {target!r} and no coefficients supplied")

        for rsnr in config.rsnr:
            if config.epsilon_override is not None:
                epsilon = config.epsilon_override
            else:
                epsilon = calibrate_epsilon(model, f_coeffs, rsnr, n)
            noise_id = f"rsnr={rsnr:g}"
            seeds = tuple(
                derive_seed(config.seed, r, target, noise_id) for r in range(config.runs)
            )
            obs_list = [
                sample_observation(model, f_coeffs, epsilon, np.random.default_rng(s))
                for s in seeds
            ]
            ybars = [obs.y / model.b for obs in obs_list]

            plan = None
            adapt_cfg = None
            if "needd" in config.estimators:
                plan = make_threshold_plan(frame, model, epsilon, kappa=config.needd.kappa)
            if "svd-adapt" in config.estimators and epsilon > 0.0:
                adapt_cfg = make_adaptive_config(
                    model, epsilon, n, config.adaptive.gamma, config.adaptive.logbase
                )

            for estimator in config.estimators:
                n_star = None
                if estimator == "svd-proj":
                    n_star, l1, rmse = _projection_cell(ybars, e_vals, true_vals, n)
                else:
                    l1, rmse = np.zeros(config.runs), np.zeros(config.runs)
                    for r, obs in enumerate(obs_list):
                        if estimator == "needd":
                            coeffs = _pad(need_d(frame, model, obs, plan).coeffs, model.kmax + 1)
                        elif epsilon > 0.0:
                            coeffs = svd_adaptive(model, obs, adapt_cfg)
                        else:
                            coeffs = _adaptive_limit(model, ybars[r], n)
                        fhat_vals = coeffs @ e_vals
                        l1[r] = weighted_loss(true_vals, fhat_vals, n, 1)
                        rmse[r] = weighted_loss(true_vals, fhat_vals, n, 2)
                cells.append(
                    CellResult(target, rsnr, estimator, float(epsilon), seeds, l1, rmse, n_star)
                )
    return SimulationReport(config, tuple(cells))


@dataclass(frozen=True)
class RateTarget:
    """Smoothness class indices and the theoretical rate exponent for it."""

    s: float
    pi: float
    r: float
    nu: float
    mu: float

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise ValueError(f"rate exponent must lie in (0, 1), got {self.mu}")


@dataclass(frozen=True)
class RateStudy:
    eps: tuple[float, ...]
    mean_rmse: tuple[float, ...]
    slope: float
    slope_stderr: float
    rate_target: RateTarget | None = None

    @property
    def gap(self) -> float | None:
        return None if self.rate_target is None else self.slope - self.rate_target.mu


def rate_study(
    model: SvdModel,
    frame: NeedletFrame,
    target_coeffs,
    eps_list,
    runs: int,
    rate_target: RateTarget | None = None,
    *,
    n: int = 1024,
    kappa: float = KAPPA_DEFAULT,
    master_seed: int = 65537,
) -> RateStudy:
    """Fit the log-log slope of mean thresholding RMSE against noise level.

    target_coeffs must be in-budget (exactly representable) so the measured
    decay reflects the noise, not a fixed truncation floor.
    """
    eps = [float(e) for e in eps_list]
    if len(eps) < 4:
        raise ValueError(f"need at least 4 noise levels, got {len(eps)}")
    if any(not 0.0 < e < 1.0 for e in eps):
        raise ValueError("every noise level must lie in (0, 1)")
    if runs < 10:
        raise ValueError(f"need at least 10 runs per level, got {runs}")

    f_coeffs = _pad(np.asarray(target_coeffs, dtype=float), model.kmax + 1)
    grid = np.arange(1, n + 1) / n
    e_vals = eval_e(model, model.kmax, grid)
    true_vals = f_coeffs @ e_vals

    means = []
    for epsilon in eps:
        plan = make_threshold_plan(frame, model, epsilon, kappa=kappa)
        losses = np.zeros(runs)
        for r in range(runs):
            seed = derive_seed(master_seed, r, f"rate-{model.kind}", f"eps={epsilon:g}")
            obs = sample_observation(model, f_coeffs, epsilon, np.random.default_rng(seed))
            coeffs = _pad(need_d(frame, model, obs, plan).coeffs, model.kmax + 1)
            losses[r] = weighted_loss(true_vals, coeffs @ e_vals, n, 2)
        means.append(float(np.mean(losses)))

    if any(m <= 0.0 for m in means):
        raise InvariantError("degenerate fit: a mean RMSE vanished, log is undefined")
    x = np.log(np.asarray(eps))
    y = np.log(np.asarray(means))
    sxx = float(np.sum((x - x.mean()) ** 2))
    if sxx <= 0.0:
        raise InvariantError("degenerate fit: noise levels do not vary")
    slope = float(np.sum((x - x.mean()) * (y - y.mean())) / sxx)
    resid = y - (y.mean() + slope * (x - x.mean()))
    stderr = float(math.sqrt(float(np.sum(resid**2)) / (len(eps) - 2) / sxx))
    return RateStudy(tuple(eps), tuple(means), slope, stderr, rate_target)


def _strip_suffix(stem: str) -> str:
    for suffix in (".csv", ".json"):
        if stem.endswith(suffix):
            return stem[: -len(suffix)]
    return stem


def _csv_table(path, report: SimulationReport, loss: str) -> None:
    cfg = report.config
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["target"]
            + [f"{est}/rsnr={r:g}" for est in cfg.estimators for r in cfg.rsnr]
        )
        reported = {c.target for c in report.cells}
        for target in cfg.targets:
            if target not in reported:
                continue
            row = [target]
            for est in cfg.estimators:
                for r in cfg.rsnr:
                    cell = report.cell(target, r, est)
                    value = cell.mean_l1 if loss == "l1" else cell.mean_rmse
                    row.append(f"{value:.6g}")
            writer.writerow(row)


def emit_report(report: SimulationReport, fmt: str, stem: str) -> list[str]:
    """Write the report; csv yields the two loss tables, json the full detail."""
    stem = _strip_suffix(stem)
    if fmt == "csv":
        paths = [f"{stem}_L1.csv", f"{stem}_RMSE.csv"]
        _csv_table(paths[0], report, "l1")
        _csv_table(paths[1], report, "rmse")
        return paths
    if fmt == "json":
        path = f"{stem}.json"
        payload = {
            "config": report.config.to_dict(),
            "cells": [
                {
                    "target": c.target,
                    "rsnr": c.rsnr,
                    "estimator": c.estimator,
                    "epsilon": c.epsilon,
                    "seeds": list(c.seeds),
                    "l1": [float(v) for v in c.l1],
                    "rmse": [float(v) for v in c.rmse],
                    "n_star": c.n_star,
                    "mean_l1": c.mean_l1,
                    "mean_rmse": c.mean_rmse,
                    "stderr_l1": c.stderr_l1,
                    "stderr_rmse": c.stderr_rmse,
                }
                for c in report.cells
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
        return [path]
    raise ValueError(f"unknown report format {fmt!r}; choose csv or json")


def load_report(path) -> SimulationReport:
    """Rebuild a SimulationReport from an emitted json file."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    config = SimulationConfig.from_dict(payload["config"])
    cells = tuple(
        CellResult(
            c["target"],
            float(c["rsnr"]),
            c["estimator"],
            float(c["epsilon"]),
            tuple(int(s) for s in c["seeds"]),
            np.asarray(c["l1"], dtype=float),
            np.asarray(c["rmse"], dtype=float),
            c.get("n_star"),
        )
        for c in payload["cells"]
    )
    return SimulationReport(config, cells)
