"""Grid losses weighted by the natural measure density.

On the Wicksell domain the measure is dx/(4x), so pointwise errors at grid
point i/n are weighted by n/(4i): an estimate can be far off near 1 more
cheaply than near 0.
"""

from __future__ import annotations

import numpy as np

__all__ = ["weighted_loss"]


def weighted_loss(f_vals, fhat_vals, n: int, p: int) -> float:
    """Discretized L_p(dmu) distance on the grid (i/n)_{i=1..n}.

    p = 1: (1/n) sum |f - fhat|_i / (4i/n); p = 2: the square root of the
    same average applied to squared differences (RMSE in the weighted sense).
    """
    f = np.asarray(f_vals, dtype=float)
    g = np.asarray(fhat_vals, dtype=float)
    if f.shape != (n,) or g.shape != (n,):
        raise ValueError(f"expected two length-{n} value arrays, got {f.shape} and {g.shape}")
    w = 1.0 / (4.0 * np.arange(1, n + 1) / n)
    d = np.abs(f - g)
    if p == 1:
        return float(np.mean(d * w))
    if p == 2:
        return float(np.sqrt(np.mean(d * d * w)))
    raise ValueError(f"p must be 1 or 2, got {p}")
