"""Exception types shared across the package.

InvariantError marks violated mathematical contracts (the CLI maps it to
exit code 2); plain ValueError keeps signalling bad arguments/config.
"""

from __future__ import annotations

__all__ = [
    "InvariantError",
    "NodeSolveError",
    "NormResolutionError",
    "UnresolvedIntegrandError",
    "ProfileError",
]


class InvariantError(RuntimeError):
    """A mathematical invariant failed to hold at the stated tolerance."""


class NodeSolveError(InvariantError):
    """Quadrature nodes could not be certified to full accuracy."""


class NormResolutionError(RuntimeError):
    """A norm integral did not stabilize under quadrature-order doubling."""


class UnresolvedIntegrandError(RuntimeError):
    """A coefficient integral did not stabilize under order doubling."""


class ProfileError(ValueError):
    """A cutoff profile is unusable (bad kind or broken monotonicity)."""
