"""Needlet tight frames over orthonormal SVD bases.

A frame holds, per dyadic level j, the coefficient matrix of its needlets
in the underlying basis: psi[nu, i - freq_lo] = sqrt(weight_nu) *
a(i / 2^j) * e_i(node_nu). Level -1 is the single constant needlet.
Analysis and synthesis are exact finite sums over each level's frequency
window (2^{j-1}, 2^{j+1}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvariantError, NormResolutionError
from .filters import Filter, filter_a, profile_phi
from .jacobi import JacobiParams, gauss_jacobi_rule, generalized_weight, jacobi_eval_all, jacobi_params

__all__ = [
    "JacobiBasis",
    "FourierBasis",
    "FrameLevel",
    "NeedletFrame",
    "BesovParams",
    "jacobi_basis",
    "fourier_basis",
    "build_frame",
    "analyze",
    "synthesize",
    "level_sigma",
    "frame_norm",
    "level_frame_norms",
    "coeff_function_norm",
    "localization_check",
    "besov_seq_norm",
    "best_approx_errors",
    "NODES_EXACT",
    "NODES_PAPER",
]

NODES_EXACT = "exact"
NODES_PAPER = "paper"

_SELF_CHECK_TOL = 1e-9


@dataclass(frozen=True)
class JacobiBasis:
    """Orthonormal Jacobi polynomials on [-1, 1] under dgamma_{alpha,beta}."""

    params: JacobiParams

    kind = "jacobi"

    def eval_all(self, kmax: int, x) -> np.ndarray:
        return jacobi_eval_all(self.params, kmax, x)


@dataclass(frozen=True)
class FourierBasis:
    """Real orthonormal Fourier basis on the periodic unit interval.

    Flat index: e_0 = 1, e_{2m-1} = sqrt2 cos(2 pi m x), e_{2m} =
    sqrt2 sin(2 pi m x); filters and singular values act on this index.
    """

    kind = "fourier-periodic"

    def eval_all(self, kmax: int, x) -> np.ndarray:
        xs = np.asarray(x, dtype=float)
        out = np.empty((kmax + 1,) + xs.shape)
        out[0] = 1.0
        if kmax >= 1:
            idx = np.arange(1, kmax + 1)
            freqs = (idx + 1) // 2
            angles = 2.0 * math.pi * freqs[:, None] * xs[None, ...]
            vals = np.where(
                (idx % 2 == 1)[:, None], np.cos(angles), np.sin(angles)
            ) * math.sqrt(2.0)
            out[1:] = vals.reshape((kmax,) + xs.shape)
        return out


def jacobi_basis(alpha: float, beta: float) -> JacobiBasis:
    """Jacobi basis family with probability normalization."""
    return JacobiBasis(jacobi_params(alpha, beta))


def fourier_basis() -> FourierBasis:
    return FourierBasis()


@dataclass(frozen=True)
class FrameLevel:
    """One dyadic level: nodes, weights, frequency window, needlet coefficients."""

    j: int
    nodes: np.ndarray
    weights: np.ndarray
    freq_lo: int
    psi: np.ndarray  # shape (n_nodes, n_freq)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def freq_hi(self) -> int:
        return self.freq_lo + self.psi.shape[1] - 1

    def mirror(self, nu: int) -> int:
        """Mirror of the 1-based node index nu across the level."""
        return self.n_nodes - nu


@dataclass(frozen=True)
class NeedletFrame:
    """Immutable needlet frame; levels[0] is j = -1, levels[j+1] is level j."""

    basis: JacobiBasis | FourierBasis
    filt: Filter
    j_max: int
    nodes_per_level: str
    levels: tuple[FrameLevel, ...]
    exactness_defect: float

    @property
    def budget(self) -> int:
        """Length of the coefficient vectors the frame acts on (frequencies 0..budget-1)."""
        return 2 ** (self.j_max + 1)

    @property
    def exact_dim(self) -> int:
        """Coefficients 0..exact_dim-1 (degree <= 2^j_max) are reconstructed exactly."""
        return 2**self.j_max + 1

    def level(self, j: int) -> FrameLevel:
        if not -1 <= j <= self.j_max:
            raise ValueError(f"level {j} outside [-1, {self.j_max}]")
        return self.levels[j + 1]


@dataclass(frozen=True)
class BesovParams:
    """Smoothness s, integrability pi, fine index r of a Besov-type ball."""

    s: float
    pi: float
    r: float

    def __post_init__(self) -> None:
        if not (self.s > 0 and self.pi >= 1 and self.r >= 1):
            raise ValueError(f"need s > 0, pi >= 1, r >= 1, got {self}")


def _window(j: int) -> tuple[int, int]:
    """Integer frequencies i with a(i / 2^j) possibly nonzero: 2^{j-1} < i < 2^{j+1}."""
    lo = 2 ** (j - 1) + 1 if j >= 1 else 1
    return lo, 2 ** (j + 1) - 1


def _level_rule(basis, j: int, nodes_per_level: str) -> tuple[np.ndarray, np.ndarray]:
    if basis.kind == "jacobi":
        n = 2 ** (j + 1) if nodes_per_level == NODES_EXACT else 2**j
        rule = gauss_jacobi_rule(basis.params, n)
        return rule.nodes, rule.weights
    n = 2 ** (j + 2) if nodes_per_level == NODES_EXACT else 2 ** (j + 1)
    return np.arange(n) / n, np.full(n, 1.0 / n)


def build_frame(
    basis: JacobiBasis | FourierBasis,
    filt: Filter,
    j_max: int,
    nodes_per_level: str = NODES_EXACT,
) -> NeedletFrame:
    """Build the needlet frame with levels -1..j_max.

    In the default "exact" mode every level's node count makes the quadrature
    exact for products of two level-j needlets, which is verified per level
    (Psi^T Psi = diag(a_i^2)); a violation aborts with the offending level.
    The "paper" mode (half as many nodes) skips the abort and records the
    defect on the frame instead, since the identity provably fails there.
    """
    if j_max < 0:
        raise ValueError(f"j_max must be >= 0, got {j_max}")
    if nodes_per_level not in (NODES_EXACT, NODES_PAPER):
        raise ValueError(f"unknown nodes_per_level: {nodes_per_level!r}")
    levels = [
        FrameLevel(
            j=-1,
            nodes=np.zeros(1),
            weights=np.ones(1),
            freq_lo=0,
            psi=np.ones((1, 1)),
        )
    ]
    worst = 0.0
    for j in range(j_max + 1):
        lo, hi = _window(j)
        freqs = np.arange(lo, hi + 1)
        avals = filter_a(filt, freqs / 2.0**j)
        try:
            nodes, weights = _level_rule(basis, j, nodes_per_level)
        except InvariantError as exc:
            raise InvariantError(f"level {j}: {exc}") from exc
        base_vals = basis.eval_all(hi, nodes)[lo:]
        psi = np.sqrt(weights)[:, None] * (avals[None, :] * base_vals.T)
        gram = psi.T @ psi
        defect = float(np.max(np.abs(gram - np.diag(avals**2))))
        worst = max(worst, defect)
        if nodes_per_level == NODES_EXACT and defect > _SELF_CHECK_TOL:
            raise InvariantError(
                f"quadrature exactness self-check failed at level {j} "
                f"(defect {defect:.3e})"
            )
        for arr in (nodes, weights, psi):
            arr.setflags(write=False)
        levels.append(FrameLevel(j, nodes, weights, lo, psi))
    return NeedletFrame(basis, filt, j_max, nodes_per_level, tuple(levels), worst)


def _check_coeffs(frame: NeedletFrame, f_coeffs) -> np.ndarray:
    f = np.asarray(f_coeffs, dtype=float)
    if f.ndim != 1 or f.shape[0] < frame.budget:
        raise ValueError(
            f"coefficient vector must be 1-d with length >= {frame.budget}, "
            f"got shape {f.shape}"
        )
    return f[: frame.budget]


def analyze(frame: NeedletFrame, f_coeffs) -> list[np.ndarray]:
    """Needlet coefficients beta_{j,eta} = sum_i f_i psi^i_{j,eta}, one array per level."""
    f = _check_coeffs(frame, f_coeffs)
    out = []
    for lev in frame.levels:
        out.append(lev.psi @ f[lev.freq_lo : lev.freq_hi + 1])
    return out


def synthesize(frame: NeedletFrame, beta: list[np.ndarray]) -> np.ndarray:
    """Basis coefficients sum_{j,eta} beta_{j,eta} psi^i_{j,eta}."""
    if len(beta) != len(frame.levels):
        raise ValueError(
            f"expected {len(frame.levels)} coefficient levels, got {len(beta)}"
        )
    out = np.zeros(frame.budget)
    for lev, b in zip(frame.levels, beta):
        b = np.asarray(b, dtype=float)
        if b.shape != (lev.n_nodes,):
            raise ValueError(
                f"level {lev.j}: expected {lev.n_nodes} coefficients, got shape {b.shape}"
            )
        out[lev.freq_lo : lev.freq_hi + 1] += lev.psi.T @ b
    return out


def level_sigma(frame: NeedletFrame, singular_values) -> np.ndarray:
    """Per-level sigma_j, sigma_j^2 = sup_eta sum_i (psi^i_{j,eta} / b_i)^2.

    Index 0 of the result is level -1; index j+1 is level j.
    """
    b = np.asarray(singular_values, dtype=float)
    if b.ndim != 1 or b.shape[0] < frame.budget:
        raise ValueError(f"need {frame.budget} singular values, got shape {b.shape}")
    if np.any(b[: frame.budget] <= 0.0):
        raise ValueError("singular values must be strictly positive")
    out = np.empty(len(frame.levels))
    for li, lev in enumerate(frame.levels):
        scaled = lev.psi / b[lev.freq_lo : lev.freq_hi + 1][None, :]
        out[li] = math.sqrt(float(np.max(np.sum(scaled**2, axis=1))))
    return out


# ---------------------------------------------------------------------------
# natural-domain integration of needlet functions


@lru_cache(maxsize=8)
def _gl_base(q: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(q)
    return x, w


def _panels(length: float, n_panels: int, q: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights on [0, length]."""
    bx, bw = _gl_base(q)
    h = length / n_panels
    starts = np.arange(n_panels) * h
    s = (starts[:, None] + (bx[None, :] + 1.0) * (h / 2.0)).ravel()
    w = np.tile(bw * (h / 2.0), n_panels)
    return s, w


def _measure_nodes(basis, n_panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Integration nodes x and measure weights for the family's natural domain."""
    if basis.kind == "jacobi":
        theta, w = _panels(math.pi, n_panels)
        a, b = basis.params.alpha, basis.params.beta
        half = theta / 2.0
        density = (
            basis.params.c_norm
            * (2.0 * np.sin(half) ** 2) ** a
            * (2.0 * np.cos(half) ** 2) ** b
            * np.sin(theta)
        )
        return np.cos(theta), w * density
    x, w = _panels(1.0, n_panels)
    return x, w


def _dense_grid(basis, j: int) -> np.ndarray:
    scale = 2 ** max(j, 0)
    if basis.kind == "jacobi":
        return np.cos(np.linspace(0.0, math.pi, 256 * scale + 1))
    return np.linspace(0.0, 1.0, 256 * scale + 1)


def _block_values(basis, block: np.ndarray, lo: int, x: np.ndarray) -> np.ndarray:
    hi = lo + block.shape[1] - 1
    return block @ basis.eval_all(hi, x)[lo:]


def _block_lp_norms(
    basis, block: np.ndarray, lo: int, j: int, p: float, rtol: float = 1e-3
) -> np.ndarray:
    """L_p norms under the family measure for each row of a coefficient block."""
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    if math.isinf(p):
        vals = _block_values(basis, block, lo, _dense_grid(basis, j))
        return np.max(np.abs(vals), axis=1)
    n_panels = 8 * 2 ** max(j, 0)
    prev = None
    for _ in range(7):
        x, mw = _measure_nodes(basis, n_panels)
        vals = _block_values(basis, block, lo, x)
        integrals = (np.abs(vals) ** p) @ mw
        if prev is not None:
            scale = np.maximum(integrals, 1e-300)
            if np.all(np.abs(integrals - prev) <= rtol * scale):
                return integrals ** (1.0 / p)
        prev = integrals
        n_panels *= 2
    raise NormResolutionError(
        f"L_{p} norm did not stabilize at level {j} (last panel count {n_panels // 2})"
    )


def frame_norm(frame: NeedletFrame, j: int, nu: int, p: float) -> float:
    """L_p norm of the needlet psi_{j, eta_nu} under the family's measure.

    nu is the 1-based node index in the level's stored node order; p may be
    math.inf (dense-grid maximum). The constant needlet (j = -1) has norm 1.
    """
    if j == -1:
        return 1.0
    lev = frame.level(j)
    if not 1 <= nu <= lev.n_nodes:
        raise ValueError(f"nu must be in 1..{lev.n_nodes}, got {nu}")
    block = lev.psi[nu - 1 : nu]
    return float(_block_lp_norms(frame.basis, block, lev.freq_lo, j, p)[0])


def level_frame_norms(frame: NeedletFrame, j: int, p: float) -> np.ndarray:
    """L_p norms of every needlet at level j (vectorized frame_norm)."""
    if j == -1:
        return np.ones(1)
    lev = frame.level(j)
    return _block_lp_norms(frame.basis, lev.psi, lev.freq_lo, j, p)


def coeff_function_norm(frame: NeedletFrame, coeffs, p: float) -> float:
    """L_p norm of the function sum_i coeffs_i e_i under the family's measure."""
    f = _check_coeffs(frame, coeffs)
    return float(_block_lp_norms(frame.basis, f[None, :], 0, frame.j_max, p)[0])


def localization_check(frame: NeedletFrame, j: int, nu: int, l: int) -> float:
    """Smallest C with |psi(cos theta)| <= C 2^{j/2} / ((1+2^j|theta-theta_nu|)^l sqrt(omega))
    on a dense theta grid; omega is the generalized weight at scale 2^j."""
    if l < 1:
        raise ValueError(f"decay order l must be >= 1, got {l}")
    if j == -1:
        return 1.0
    if frame.basis.kind != "jacobi":
        raise ValueError("localization envelope is defined for the Jacobi family")
    lev = frame.level(j)
    if not 1 <= nu <= lev.n_nodes:
        raise ValueError(f"nu must be in 1..{lev.n_nodes}, got {nu}")
    theta = np.linspace(0.0, math.pi, 256 * 2**j + 1)
    x = np.cos(theta)
    vals = _block_values(frame.basis, lev.psi[nu - 1 : nu], lev.freq_lo, x)[0]
    theta_nu = math.acos(float(lev.nodes[nu - 1]))
    envelope = (1.0 + 2.0**j * np.abs(theta - theta_nu)) ** l
    omega = generalized_weight(frame.basis.params, 2**j, x)
    return float(np.max(np.abs(vals) * envelope * np.sqrt(omega)) / 2.0 ** (j / 2.0))


def besov_seq_norm(
    frame: NeedletFrame,
    beta: list[np.ndarray],
    bp: BesovParams,
    p_for_psi_norms: float | None = None,
) -> float:
    """Sequence norm || (2^{js} (sum_eta |beta|^pi ||psi||_pi^pi)^{1/pi})_j ||_{l_r}."""
    if len(beta) != len(frame.levels):
        raise ValueError(f"expected {len(frame.levels)} levels, got {len(beta)}")
    pi_norm = bp.pi if p_for_psi_norms is None else p_for_psi_norms
    terms = np.empty(len(frame.levels))
    for li, lev in enumerate(frame.levels):
        norms = level_frame_norms(frame, lev.j, pi_norm)
        inner = float(np.sum(np.abs(np.asarray(beta[li])) ** bp.pi * norms**bp.pi))
        terms[li] = 2.0 ** (lev.j * bp.s) * inner ** (1.0 / bp.pi)
    if math.isinf(bp.r):
        return float(np.max(terms))
    return float(np.sum(terms**bp.r) ** (1.0 / bp.r))


def best_approx_errors(frame: NeedletFrame, f_coeffs, p: float, j_range) -> np.ndarray:
    """Estimated best-approximation errors E_{2^j}(f, p) for j in j_range.

    Uses the residual of the needlet partial reconstruction through level j,
    whose coefficient multiplier is 1 - phi(i / 2^{j+1}).
    """
    f = _check_coeffs(frame, f_coeffs)
    freqs = np.arange(frame.budget, dtype=float)
    j_list = list(j_range)
    out = np.empty(len(j_list))
    for pos, j in enumerate(j_list):
        mult = 1.0 - profile_phi(frame.filt.profile, freqs / 2.0 ** (j + 1))
        residual = f * mult
        if not np.any(residual):
            out[pos] = 0.0
            continue
        out[pos] = _block_lp_norms(
            frame.basis, residual[None, :], 0, frame.j_max, p
        )[0]
    return out
