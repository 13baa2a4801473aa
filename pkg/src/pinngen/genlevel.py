"""How far beyond the training interval an ensemble stays accurate.

For a tolerance eps, each model gets the length of the longest contiguous
stretch of the exterior (one side of the training interval) where its
absolute error against the exact solution stays within eps; the ensemble
value is the minimum over models, so one bad network zeroes the metric.
The alternative, boundary-anchored variant measures how far accuracy
extends starting directly at the training boundary.

All lengths are measured on a uniform evaluation grid in whole grid cells
(a cell counts only if both endpoints are accurate), which approximates the
continuous maximum from below; the grid resolution is carried in every
result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jet_mlp import mlp_value_batch
from .problem import Interval, PoissonProblem, analytic_u
from .training import Ensemble

__all__ = [
    "EPSILONS",
    "ErrorProfile",
    "GenLevelResult",
    "AltGenLevelResult",
    "error_profile",
    "predictions_on_grid",
    "gl_single",
    "gl_ensemble",
    "gl_alt",
]

# tolerance sweep used by all experiment presets
EPSILONS = (1e-2, 1e-3, 1e-4, 1e-5)

SIDES = ("left", "right")


@dataclass(frozen=True)
class ErrorProfile:
    """Per-model absolute errors |u - u_theta| on a uniform grid."""

    grid: np.ndarray  # (n_grid,), strictly increasing, spans the full domain
    errors: np.ndarray  # (n_models, n_grid), >= 0 (NaN for failed models)

    @property
    def n_models(self) -> int:
        return self.errors.shape[0]

    @property
    def n_grid(self) -> int:
        return self.grid.size

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])


@dataclass(frozen=True)
class GenLevelResult:
    epsilon: float
    side: str
    per_model_g_l: tuple[float, ...]
    ensemble_G_l: float
    grid_resolution: int
    degenerate_side: bool = False

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "side": self.side,
            "per_model_g_l": list(self.per_model_g_l),
            "ensemble_G_l": self.ensemble_G_l,
            "grid_resolution": self.grid_resolution,
            "degenerate_side": self.degenerate_side,
        }


@dataclass(frozen=True)
class AltGenLevelResult:
    """Boundary-anchored variant: accuracy radius around the training interval."""

    epsilon: float
    per_model: tuple[float, ...]
    ensemble: float
    grid_resolution: int

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "per_model": list(self.per_model),
            "ensemble": self.ensemble,
            "grid_resolution": self.grid_resolution,
        }


def predictions_on_grid(ensemble: Ensemble, xs: np.ndarray) -> np.ndarray:
    """(n_models, n) array of raw network outputs."""
    xs = np.asarray(xs, dtype=np.float64)
    return np.stack([mlp_value_batch(m.arch, m.params, xs) for m in ensemble.models])


def error_profile(ensemble: Ensemble, problem: PoissonProblem, n_grid: int) -> ErrorProfile:
    """Pointwise absolute errors for every model on a uniform full-domain grid."""
    if n_grid < 100:
        raise ValueError("n_grid must be >= 100")
    grid = np.linspace(problem.full_domain.lo, problem.full_domain.hi, n_grid)
    truth = analytic_u(grid, problem.n_modes)
    preds = predictions_on_grid(ensemble, grid)
    return ErrorProfile(grid=grid, errors=np.abs(preds - truth))


def _exterior_cell_range(grid: np.ndarray, train_domain: Interval, side: str) -> tuple[int, int]:
    """Half-open range [i0, i1) of cell start indices fully outside the
    training interval on the given side (cell i spans grid[i]..grid[i+1])."""
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    n = grid.size
    eps = 1e-9 * max(1.0, float(np.abs(grid).max()))
    if side == "right":
        i0 = int(np.searchsorted(grid, train_domain.hi - eps, side="left"))
        return i0, n - 1
    i1 = int(np.searchsorted(grid, train_domain.lo + eps, side="right")) - 1
    return 0, max(i1, 0)


def _accurate_cells(err_row: np.ndarray, i0: int, i1: int, epsilon: float) -> np.ndarray:
    """Boolean mask over cells i0..i1-1: both endpoints within epsilon.

    NaN errors (failed models) compare as inaccurate.
    """
    with np.errstate(invalid="ignore"):
        ok = err_row <= epsilon
    return ok[i0:i1] & ok[i0 + 1 : i1 + 1]


def _longest_run(mask: np.ndarray) -> int:
    if mask.size == 0:
        return 0
    padded = np.concatenate([[0], mask.astype(np.int64), [0]])
    d = np.diff(padded)
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1)
    return int((ends - starts).max()) if starts.size else 0


def _leading_run(mask: np.ndarray) -> int:
    if mask.size == 0 or not mask[0]:
        return 0
    off = np.flatnonzero(~mask)
    return int(off[0]) if off.size else int(mask.size)


def gl_single(
    profile: ErrorProfile,
    model_index: int,
    train_domain: Interval,
    epsilon: float,
    side: str = "right",
) -> float:
    """Longest accurate exterior stretch for one model, in input units.

    Returns 0 for a degenerate side (training interval touching the edge of
    the evaluation domain).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    i0, i1 = _exterior_cell_range(profile.grid, train_domain, side)
    if i1 <= i0:
        return 0.0
    mask = _accurate_cells(profile.errors[model_index], i0, i1, epsilon)
    return _longest_run(mask) * profile.spacing


def gl_ensemble(
    profile: ErrorProfile,
    train_domain: Interval,
    epsilon: float,
    side: str = "right",
) -> GenLevelResult:
    """Ensemble generalization level: minimum of the per-model values."""
    if profile.n_models == 0:
        raise ValueError("empty ensemble profile")
    i0, i1 = _exterior_cell_range(profile.grid, train_domain, side)
    per_model = tuple(
        gl_single(profile, i, train_domain, epsilon, side) for i in range(profile.n_models)
    )
    return GenLevelResult(
        epsilon=float(epsilon),
        side=side,
        per_model_g_l=per_model,
        ensemble_G_l=min(per_model),
        grid_resolution=profile.n_grid,
        degenerate_side=i1 <= i0,
    )


def _alt_single(profile: ErrorProfile, idx: int, train_domain: Interval, epsilon: float) -> float:
    """Anchored run: accuracy must start at the first exterior cell; the
    score is the minimum over the sides that have any exterior at all."""
    runs = []
    for side in SIDES:
        i0, i1 = _exterior_cell_range(profile.grid, train_domain, side)
        if i1 <= i0:
            continue  # degenerate side: no exterior to certify
        mask = _accurate_cells(profile.errors[idx], i0, i1, epsilon)
        if side == "left":
            mask = mask[::-1]  # anchored at the training boundary, growing outward
        runs.append(_leading_run(mask) * profile.spacing)
    return min(runs) if runs else 0.0


def gl_alt(profile: ErrorProfile, train_domain: Interval, epsilon: float) -> AltGenLevelResult:
    """Distance-based variant: largest d such that every point within d of
    the training interval is accurate for every model."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if profile.n_models == 0:
        raise ValueError("empty ensemble profile")
    per_model = tuple(
        _alt_single(profile, i, train_domain, epsilon) for i in range(profile.n_models)
    )
    return AltGenLevelResult(
        epsilon=float(epsilon),
        per_model=per_model,
        ensemble=min(per_model),
        grid_resolution=profile.n_grid,
    )
