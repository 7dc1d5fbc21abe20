"""Estimators for sequence-space inverse problems.

Three families: hard-thresholded needlet coefficients of the naive inverse
(need_d), fixed-cutoff SVD projection with an oracle variant that reads the
truth, and a blockwise data-driven SVD filter. All consume a
SequenceObservation and return coefficients in the model's SVD basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError
from .frame import NeedletFrame, analyze, level_sigma, synthesize
from .models import SequenceObservation, SvdModel

__all__ = [
    "KAPPA_DEFAULT",
    "ThresholdPlan",
    "NeedDResult",
    "make_threshold_plan",
    "need_d",
    "svd_projection",
    "svd_projection_oracle",
    "make_blocks",
    "AdaptiveSvdConfig",
    "make_adaptive_config",
    "svd_adaptive",
]

KAPPA_DEFAULT = 0.75 * math.sqrt(2.0)


def _log(z: float, base: float) -> float:
    return math.log(z) / math.log(base)


@dataclass(frozen=True)
class ThresholdPlan:
    """Frozen thresholding schedule: keep |beta_j| >= kappa * t_eps * sigma[j].

    sigma has one entry per frame level (index 0 is the constant level);
    j_top is the last level kept at all.
    """

    kappa: float
    t_eps: float
    j_top: int
    sigma: np.ndarray

    def threshold(self, j: int) -> float:
        return self.kappa * self.t_eps * float(self.sigma[j + 1])


@dataclass(frozen=True)
class NeedDResult:
    """Thresholded frame coefficients per level plus the synthesized sequence."""

    beta: list
    coeffs: np.ndarray


def make_threshold_plan(
    frame: NeedletFrame,
    model: SvdModel,
    epsilon: float,
    kappa: float = KAPPA_DEFAULT,
    log_base: float = math.e,
) -> ThresholdPlan:
    """Resolve t_eps = eps*sqrt(log(1/eps)), the top level, and level deviations.

    The top level solves 2^{j(1+2nu)} <= t_eps^{-2} (the bias/variance
    crossover for ill-posedness degree nu), capped by the frame. epsilon = 0
    degenerates to interpolation: zero threshold, every level kept.
    """
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must be in [0, 1), got {epsilon}")
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if epsilon == 0.0:
        t_eps, j_top = 0.0, frame.j_max
    else:
        t_eps = epsilon * math.sqrt(_log(1.0 / epsilon, log_base))
        j_raw = math.floor(math.log2(t_eps ** (-2.0 / (1.0 + 2.0 * model.nu))))
        j_top = min(j_raw, frame.j_max)
    sigma = level_sigma(frame, model.b)
    return ThresholdPlan(float(kappa), float(t_eps), int(j_top), sigma)


def need_d(
    frame: NeedletFrame,
    model: SvdModel,
    obs: SequenceObservation,
    plan: ThresholdPlan,
) -> NeedDResult:
    """Hard-threshold the needlet analysis of the naive inverse Y_i/b_i.

    Levels above plan.j_top are dropped wholesale; at and below, a
    coefficient survives iff its magnitude reaches the plan's level
    threshold (the constant level included, at its own sigma).
    """
    budget = frame.budget
    if obs.kmax + 1 < budget:
        raise ValueError(f"need {budget} observed coefficients, got {obs.kmax + 1}")
    if model.kmax + 1 < budget:
        raise ValueError(f"model holds {model.kmax + 1} singular values, frame needs {budget}")
    ybar = obs.y[:budget] / model.b[:budget]
    beta = analyze(frame, ybar)
    kept = []
    for level_index, b in enumerate(beta):
        j = level_index - 1
        if j > plan.j_top:
            kept.append(np.zeros_like(b))
            continue
        thr = plan.threshold(j)
        kept.append(np.where(np.abs(b) >= thr, b, 0.0))
    return NeedDResult(kept, synthesize(frame, kept))


def svd_projection(model: SvdModel, obs: SequenceObservation, n_keep: int) -> np.ndarray:
    """Truncated naive inverse: fhat_i = Y_i/b_i for i <= n_keep, else 0."""
    if not 0 <= n_keep <= obs.kmax:
        raise ValueError(f"n_keep must be in 0..{obs.kmax}, got {n_keep}")
    fhat = np.zeros(obs.kmax + 1)
    sl = slice(0, n_keep + 1)
    fhat[sl] = obs.y[sl] / model.b[sl]
    return fhat


def svd_projection_oracle(
    model: SvdModel,
    obs: SequenceObservation,
    f_vals: np.ndarray,
    grid: np.ndarray,
    e_vals: np.ndarray | None = None,
) -> tuple[int, np.ndarray]:
    """Projection with the cutoff chosen a posteriori against the truth.

    Sweeps every cutoff N = 0..kmax/2, measures the weighted RMSE of the
    grid reconstruction against f_vals, and returns the minimizing cutoff
    (ties to the smaller N) with its coefficient estimate. Pass the
    (kmax+1, len(grid)) basis table e_vals when sweeping many runs on one
    grid; it is recomputed otherwise.
    """
    from .losses import weighted_loss
    from .models import eval_e

    top = obs.kmax // 2
    if e_vals is None:
        e_vals = eval_e(model, top, grid)
    ybar = obs.y[: top + 1] / model.b[: top + 1]
    cum = np.cumsum(ybar[:, None] * e_vals[: top + 1], axis=0)
    n_grid = grid.shape[0]
    best_n, best_loss = 0, math.inf
    for n_keep in range(top + 1):
        loss = weighted_loss(f_vals, cum[n_keep], n_grid, 2)
        if loss < best_loss:
            best_n, best_loss = n_keep, loss
    return best_n, svd_projection(model, obs, best_n)


def make_blocks(
    model: SvdModel, epsilon: float, log_base: float = math.e
) -> np.ndarray:
    """Geometrically growing block boundaries kappa_0 = 1 < kappa_1 < ...

    nu_eps = max(5, loglog(1/eps)) and rho_eps = 1/log(nu_eps) set the
    growth; boundaries extend until they pass the largest m whose cumulative
    inverse-squared singular values stay under eps^{-2} rho^{-3} (past that
    index the naive inverse is pure noise). The last boundary is the first
    one strictly beyond every usable index.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    nu_eps = max(5.0, _log(_log(1.0 / epsilon, log_base), log_base))
    rho = 1.0 / _log(nu_eps, log_base)
    # compare eps^{-2} rho^{-3} against the cumulative sums in log space:
    # the direct power overflows for epsilon below ~1e-154
    log_limit = -2.0 * math.log(epsilon) - 3.0 * math.log(rho)
    csum = np.cumsum(model.b[1:] ** (-2.0))
    m_usable = int(np.searchsorted(np.log(csum), log_limit, side="right"))
    boundaries = [1, math.ceil(nu_eps)]
    j = 2
    while boundaries[-1] <= m_usable:
        step = max(1, math.floor(nu_eps * rho * (1.0 + rho) ** (j - 1)))
        boundaries.append(boundaries[-1] + step)
        j += 1
    return np.asarray(boundaries, dtype=int)


@dataclass(frozen=True)
class AdaptiveSvdConfig:
    """Resolved blockwise filter: boundaries, per-block noise stats, cutoff.

    sigma2[j] is the noise energy eps^2 sum b_i^{-2} over block j, delta[j]
    the max/sum concentration ratio of the same weights; n_top is the last
    coefficient index the filter may keep (indices above get weight zero).
    """

    gamma: float
    epsilon: float
    boundaries: np.ndarray
    sigma2: np.ndarray
    delta: np.ndarray
    n_top: int


def make_adaptive_config(
    model: SvdModel,
    epsilon: float,
    n: int,
    gamma: float = 0.1,
    log_base: float = math.e,
) -> AdaptiveSvdConfig:
    """Precompute the blockwise filter for one (model, epsilon, n) setting.

    The keepable range ends at min(n/2, last boundary - 1): the resolution
    cap n/2 reflects that the grid cannot support more coefficients than
    half its points, whatever the noise level says.
    """
    if not 0.0 < gamma < 0.5:
        raise ValueError(f"gamma must be in (0, 1/2), got {gamma}")
    if n < 2:
        raise ValueError(f"grid resolution must be >= 2, got {n}")
    boundaries = make_blocks(model, epsilon, log_base)
    inv2 = model.b ** (-2.0)
    sigma2, delta = [], []
    for lo, hi in zip(boundaries[:-1], boundaries[1:]):
        hi_clip = min(int(hi), model.kmax + 1)
        if hi_clip <= lo:
            raise InvariantError(
                f"empty block [{int(lo)}, {int(hi)}) after clipping to kmax {model.kmax}"
            )
        w = inv2[int(lo) : hi_clip]
        total = float(np.sum(w))
        sigma2.append(epsilon * epsilon * total)
        delta.append(float(np.max(w)) / total)
    n_top = min(n // 2, int(boundaries[-1]) - 1)
    return AdaptiveSvdConfig(
        float(gamma),
        float(epsilon),
        boundaries,
        np.asarray(sigma2),
        np.asarray(delta),
        int(n_top),
    )


def svd_adaptive(
    model: SvdModel, obs: SequenceObservation, config: AdaptiveSvdConfig
) -> np.ndarray:
    """Blockwise shrinkage of the naive inverse.

    Within block j the weight is (1 - sigma2_j (1 + delta_j^gamma) / ||Y/b||^2)_+,
    constant across the block; index 0 sits below the first boundary and is
    kept with weight 1 (its noise is a single coordinate, never dominant).
    """
    if abs(obs.epsilon - config.epsilon) > 1e-12 * max(obs.epsilon, config.epsilon):
        raise ValueError(
            f"config built for epsilon {config.epsilon}, observation has {obs.epsilon}"
        )
    kmax = min(obs.kmax, model.kmax)
    ybar = obs.y[: kmax + 1] / model.b[: kmax + 1]
    lam = np.zeros(kmax + 1)
    lam[0] = 1.0
    for j, (lo, hi) in enumerate(zip(config.boundaries[:-1], config.boundaries[1:])):
        lo, hi = int(lo), min(int(hi), kmax + 1)
        if hi <= lo:
            raise InvariantError(f"empty block [{lo}, {int(config.boundaries[j + 1])})")
        block = ybar[lo:hi]
        energy = float(np.sum(block * block))
        if energy <= 0.0:
            continue
        penalty = config.sigma2[j] * (1.0 + config.delta[j] ** config.gamma)
        lam[lo:hi] = max(0.0, 1.0 - penalty / energy)
    if config.n_top < kmax:
        lam[config.n_top + 1 :] = 0.0
    return lam * ybar
