"""Rank-based significance tests for comparing metric samples across groups.

Kruskal-Wallis decides whether any of k hyperparameter settings shifts the
per-model generalization lengths; pairwise Mann-Whitney U tests locate the
differences.  Both use average ranks for ties and the usual tie-corrected
variance terms.  A result counts as significant when p < 0.01.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.special import gammaincc

__all__ = [
    "StatTestResult",
    "rank_with_ties",
    "kruskal_wallis",
    "mann_whitney_u",
    "pairwise_mann_whitney",
    "chi_square_sf",
    "is_significant",
]

SIGNIFICANCE_ALPHA = 0.01


@dataclass(frozen=True)
class StatTestResult:
    statistic: float
    p_value: float
    group_sizes: tuple[int, ...]
    tie_corrected: bool
    method: str
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "group_sizes": list(self.group_sizes),
            "tie_corrected": self.tie_corrected,
            "method": self.method,
            "degenerate": self.degenerate,
        }


def is_significant(result: StatTestResult, alpha: float = SIGNIFICANCE_ALPHA) -> bool:
    return result.p_value < alpha


def rank_with_ties(values) -> list[float]:
    """Ranks 1..n with tied values sharing their average rank."""
    vals = np.asarray(values, dtype=np.float64)
    if vals.size == 0:
        raise ValueError("cannot rank an empty sample")
    order = np.argsort(vals, kind="stable")
    ranks = np.empty(vals.size)
    i = 0
    while i < vals.size:
        j = i
        while j + 1 < vals.size and vals[order[j + 1]] == vals[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks.tolist()


def _tie_term(pooled: np.ndarray) -> float:
    """Sum of t^3 - t over tie groups."""
    _, counts = np.unique(pooled, return_counts=True)
    t = counts.astype(np.float64)
    return float((t**3 - t).sum())


def chi_square_sf(x: float, df: int) -> float:
    """Chi-square survival function via the regularized upper incomplete gamma."""
    if x < 0:
        raise ValueError("x must be >= 0")
    if df < 1:
        raise ValueError("df must be >= 1")
    return float(gammaincc(df / 2.0, x / 2.0))


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def kruskal_wallis(groups) -> StatTestResult:
    """H test for k independent samples, tie-corrected, chi-square p-value.

    Degenerate data (every value identical) yields H = 0, p = 1 with the
    degeneracy flag set instead of a division by zero.
    """
    groups = [np.asarray(g, dtype=np.float64) for g in groups]
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    sizes = tuple(int(g.size) for g in groups)
    if any(s < 2 for s in sizes):
        raise ValueError("every group needs at least two samples")
    pooled = np.concatenate(groups)
    n_total = pooled.size
    ranks = np.asarray(rank_with_ties(pooled))
    h = 0.0
    off = 0
    for s in sizes:
        r = ranks[off : off + s].sum()
        h += r * r / s
        off += s
    h = 12.0 / (n_total * (n_total + 1.0)) * h - 3.0 * (n_total + 1.0)
    correction = 1.0 - _tie_term(pooled) / (n_total**3 - n_total)
    if correction <= 0.0:
        return StatTestResult(0.0, 1.0, sizes, True, "kruskal_wallis", degenerate=True)
    h /= correction
    h = max(h, 0.0)  # guard round-off at the degenerate end
    p = chi_square_sf(h, len(groups) - 1)
    return StatTestResult(float(h), float(p), sizes, True, "kruskal_wallis")


def mann_whitney_u(a, b) -> StatTestResult:
    """Two-sided Mann-Whitney U via the normal approximation.

    U is the smaller of the two one-sided statistics; the z-score uses the
    tie-corrected variance and a 0.5 continuity correction.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    n1, n2 = a.size, b.size
    pooled = np.concatenate([a, b])
    ranks = np.asarray(rank_with_ties(pooled))
    r1 = ranks[:n1].sum()
    u1 = r1 - n1 * (n1 + 1) / 2.0
    u2 = n1 * n2 - u1
    u = min(u1, u2)
    n = n1 + n2
    var = n1 * n2 / 12.0 * ((n + 1.0) - _tie_term(pooled) / (n * (n - 1.0)))
    if var <= 0.0:
        return StatTestResult(n1 * n2 / 2.0, 1.0, (n1, n2), True, "mann_whitney_u", degenerate=True)
    z = (u - n1 * n2 / 2.0 + 0.5) / math.sqrt(var)
    p = min(1.0, 2.0 * _normal_sf(abs(z)))
    return StatTestResult(float(u), float(p), (n1, n2), True, "mann_whitney_u")


def pairwise_mann_whitney(groups, labels=None, bonferroni: bool = False):
    """Post-hoc U tests for every pair of groups.

    Returns a list of (label_i, label_j, StatTestResult); with ``bonferroni``
    the p-values are multiplied by the number of comparisons (capped at 1).
    """
    if labels is None:
        labels = list(range(len(groups)))
    pairs = list(combinations(range(len(groups)), 2))
    out = []
    for i, j in pairs:
        res = mann_whitney_u(groups[i], groups[j])
        if bonferroni:
            res = StatTestResult(
                res.statistic,
                min(1.0, res.p_value * len(pairs)),
                res.group_sizes,
                res.tie_corrected,
                res.method,
                res.degenerate,
            )
        out.append((labels[i], labels[j], res))
    return out
