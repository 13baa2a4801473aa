"""1D Poisson benchmark: source term, boundary data and the exact solution.

The target equation on [-pi, pi] is a Poisson problem whose source is a
five-mode sine series; the closed-form solution is available, so every
trained network can be scored against an exact oracle, including its
derivatives up to fourth order.

Residual convention: we penalize r(x) = u_xx(x) + f(x), the sign chosen so
that ``analytic_u`` is the exact root of the residual (term-wise second
differentiation of the solution series gives u'' = -f).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

N_MODES = 5

__all__ = [
    "Interval",
    "PoissonProblem",
    "FULL_DOMAIN",
    "source_f",
    "analytic_u",
    "analytic_deriv",
    "residual_values",
    "residual_from_jet",
    "boundary_targets",
]


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with lo < hi."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"interval needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, other: "Interval", tol: float = 1e-12) -> bool:
        return self.lo - tol <= other.lo and other.hi <= self.hi + tol


FULL_DOMAIN = Interval(-math.pi, math.pi)


def _mode_freqs(n_modes: int) -> np.ndarray:
    # frequencies 2k for k = 1..n_modes
    return 2.0 * np.arange(1, n_modes + 1, dtype=np.float64)


def source_f(x, n_modes: int = N_MODES):
    """Source term: sum over k=1..K of 2k*sin(2kx). Accepts scalars or arrays."""
    w = _mode_freqs(n_modes)
    terms = w * np.sin(w * np.asarray(x, dtype=np.float64)[..., None])
    out = terms.sum(axis=-1)
    return float(out) if np.ndim(x) == 0 else out


def analytic_u(x, n_modes: int = N_MODES):
    """Exact solution: sum over k=1..K of sin(2kx)/(2k). Zero at +-pi."""
    w = _mode_freqs(n_modes)
    terms = np.sin(w * np.asarray(x, dtype=np.float64)[..., None]) / w
    out = terms.sum(axis=-1)
    return float(out) if np.ndim(x) == 0 else out


def analytic_deriv(x, k: int, n_modes: int = N_MODES):
    """Exact k-th derivative of the solution, k in 1..4 (term-wise series)."""
    if not 1 <= k <= 4:
        raise ValueError(f"derivative order must be in 1..4, got {k}")
    w = _mode_freqs(n_modes)
    xw = w * np.asarray(x, dtype=np.float64)[..., None]
    # derivative ladder of sin(wx)/w: cos, -w sin, -w^2 cos, w^3 sin
    if k == 1:
        terms = np.cos(xw)
    elif k == 2:
        terms = -w * np.sin(xw)
    elif k == 3:
        terms = -(w**2) * np.cos(xw)
    else:
        terms = w**3 * np.sin(xw)
    out = terms.sum(axis=-1)
    return float(out) if np.ndim(x) == 0 else out


def residual_values(d2, x, n_modes: int = N_MODES):
    """Residual r = u_xx + f evaluated from second-derivative values."""
    return d2 + source_f(x, n_modes)


def residual_from_jet(j, x, n_modes: int = N_MODES) -> float:
    """Residual of a network output jet at x (uses the jet's d2 slot)."""
    return float(j.d2 + source_f(x, n_modes))


def boundary_targets(train_domain: Interval, n_modes: int = N_MODES) -> list[tuple[float, float]]:
    """Dirichlet targets at the training-interval endpoints, from the oracle.

    Sub-interval problems are closed with exact solution values; on the full
    domain this reduces to the homogeneous conditions u(-pi) = u(pi) = 0.
    """
    if not FULL_DOMAIN.contains(train_domain):
        raise ValueError(f"training interval {train_domain} exceeds {FULL_DOMAIN}")
    return [
        (train_domain.lo, analytic_u(train_domain.lo, n_modes)),
        (train_domain.hi, analytic_u(train_domain.hi, n_modes)),
    ]


@dataclass(frozen=True)
class PoissonProblem:
    """Benchmark instance: where to train, where to evaluate, what to match.

    ``boundary_points`` defaults to the exact solution values at the
    training-interval endpoints.
    """

    train_domain: Interval
    full_domain: Interval = FULL_DOMAIN
    n_modes: int = N_MODES
    boundary_points: tuple[tuple[float, float], ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not self.full_domain.contains(self.train_domain):
            raise ValueError("train_domain must lie inside full_domain")
        if self.boundary_points is None:
            pts = tuple(boundary_targets(self.train_domain, self.n_modes))
            object.__setattr__(self, "boundary_points", pts)
        else:
            pts = tuple((float(x), float(u)) for x, u in self.boundary_points)
            ends = {self.train_domain.lo, self.train_domain.hi}
            if any(x not in ends for x, _ in pts):
                raise ValueError("boundary points must sit on the train_domain endpoints")
            object.__setattr__(self, "boundary_points", pts)

    def to_dict(self) -> dict:
        return {
            "train_domain": [self.train_domain.lo, self.train_domain.hi],
            "full_domain": [self.full_domain.lo, self.full_domain.hi],
            "n_modes": self.n_modes,
            "boundary_points": [list(p) for p in self.boundary_points],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PoissonProblem":
        return cls(
            train_domain=Interval(*d["train_domain"]),
            full_domain=Interval(*d["full_domain"]),
            n_modes=int(d["n_modes"]),
            boundary_points=tuple(tuple(p) for p in d["boundary_points"]),
        )
