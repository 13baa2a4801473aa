"""Fused elementwise kernels for the tanh jet composition and its adjoint.

These two operations dominate training cost, so they are compiled with numba
when it is available (float64 only); the numpy versions remain both as a
fallback and as the generic-dtype path, which the test suite exercises with
complex inputs for complex-step derivative checks.
"""

from __future__ import annotations

import math

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def _tanh_jet_numpy(g: np.ndarray, out: np.ndarray) -> None:
    """out <- jet of tanh composed with jet g; slots are (5, n, w) slabs."""
    y0 = np.tanh(g[0])
    tsq = y0 * y0
    t1 = 1.0 - tsq
    t2 = -2.0 * y0 * t1
    t3 = t1 * (6.0 * tsq - 2.0)
    t4 = t1 * y0 * (16.0 - 24.0 * tsq)
    g1, g2, g3, g4 = g[1], g[2], g[3], g[4]
    g1sq = g1 * g1
    out[0] = y0
    out[1] = t1 * g1
    out[2] = t2 * g1sq + t1 * g2
    out[3] = t3 * g1sq * g1 + 3.0 * t2 * g1 * g2 + t1 * g3
    out[4] = (
        t4 * g1sq * g1sq
        + 6.0 * t3 * g1sq * g2
        + t2 * (3.0 * g2 * g2 + 4.0 * g1 * g3)
        + t1 * g4
    )


def _tanh_adjoint_numpy(adj: np.ndarray, pre: np.ndarray, act: np.ndarray, out: np.ndarray) -> None:
    """out <- adjoint of the jet entering tanh, given output-jet adjoints."""
    t = act
    tsq = t * t
    t1 = 1.0 - tsq
    t2 = -2.0 * t * t1
    t3 = t1 * (6.0 * tsq - 2.0)
    t4 = t1 * t * (16.0 - 24.0 * tsq)
    # fifth tanh derivative: t1..t4 all depend on the value slot
    t5 = t1 * (120.0 * tsq * tsq - 120.0 * tsq + 16.0)
    g1, g2, g3, g4 = pre[1], pre[2], pre[3], pre[4]
    a0, a1, a2, a3, a4 = adj
    g1sq = g1 * g1
    s1 = a1 * g1 + a2 * g2 + a3 * g3 + a4 * g4
    s2 = a2 * g1sq + 3.0 * a3 * g1 * g2 + a4 * (3.0 * g2 * g2 + 4.0 * g1 * g3)
    s3 = a3 * g1sq * g1 + 6.0 * a4 * g1sq * g2
    s4 = a4 * g1sq * g1sq
    out[0] = a0 * t1 + s1 * t2 + s2 * t3 + s3 * t4 + s4 * t5
    out[1] = (
        a1 * t1
        + 2.0 * a2 * t2 * g1
        + a3 * (3.0 * t3 * g1sq + 3.0 * t2 * g2)
        + a4 * (4.0 * t4 * g1sq * g1 + 12.0 * t3 * g1 * g2 + 4.0 * t2 * g3)
    )
    out[2] = a2 * t1 + 3.0 * a3 * t2 * g1 + a4 * (6.0 * t3 * g1sq + 6.0 * t2 * g2)
    out[3] = a3 * t1 + 4.0 * a4 * t2 * g1
    out[4] = a4 * t1


if HAVE_NUMBA:

    @numba.njit(cache=True, fastmath=False)
    def _tanh_jet_nb(g, out):  # pragma: no cover - exercised via dispatch
        n, w = g.shape[1], g.shape[2]
        for i in range(n):
            for j in range(w):
                y0 = math.tanh(g[0, i, j])
                tsq = y0 * y0
                t1 = 1.0 - tsq
                t2 = -2.0 * y0 * t1
                t3 = t1 * (6.0 * tsq - 2.0)
                t4 = t1 * y0 * (16.0 - 24.0 * tsq)
                g1 = g[1, i, j]
                g2 = g[2, i, j]
                g3 = g[3, i, j]
                g4 = g[4, i, j]
                g1sq = g1 * g1
                out[0, i, j] = y0
                out[1, i, j] = t1 * g1
                out[2, i, j] = t2 * g1sq + t1 * g2
                out[3, i, j] = t3 * g1sq * g1 + 3.0 * t2 * g1 * g2 + t1 * g3
                out[4, i, j] = (
                    t4 * g1sq * g1sq
                    + 6.0 * t3 * g1sq * g2
                    + t2 * (3.0 * g2 * g2 + 4.0 * g1 * g3)
                    + t1 * g4
                )

    @numba.njit(cache=True, fastmath=False)
    def _tanh_adjoint_nb(adj, pre, act, out):  # pragma: no cover - via dispatch
        n, w = act.shape
        for i in range(n):
            for j in range(w):
                t = act[i, j]
                tsq = t * t
                t1 = 1.0 - tsq
                t2 = -2.0 * t * t1
                t3 = t1 * (6.0 * tsq - 2.0)
                t4 = t1 * t * (16.0 - 24.0 * tsq)
                t5 = t1 * (120.0 * tsq * tsq - 120.0 * tsq + 16.0)
                g1 = pre[1, i, j]
                g2 = pre[2, i, j]
                g3 = pre[3, i, j]
                g4 = pre[4, i, j]
                a0 = adj[0, i, j]
                a1 = adj[1, i, j]
                a2 = adj[2, i, j]
                a3 = adj[3, i, j]
                a4 = adj[4, i, j]
                g1sq = g1 * g1
                s1 = a1 * g1 + a2 * g2 + a3 * g3 + a4 * g4
                s2 = a2 * g1sq + 3.0 * a3 * g1 * g2 + a4 * (3.0 * g2 * g2 + 4.0 * g1 * g3)
                s3 = a3 * g1sq * g1 + 6.0 * a4 * g1sq * g2
                s4 = a4 * g1sq * g1sq
                out[0, i, j] = a0 * t1 + s1 * t2 + s2 * t3 + s3 * t4 + s4 * t5
                out[1, i, j] = (
                    a1 * t1
                    + 2.0 * a2 * t2 * g1
                    + a3 * (3.0 * t3 * g1sq + 3.0 * t2 * g2)
                    + a4 * (4.0 * t4 * g1sq * g1 + 12.0 * t3 * g1 * g2 + 4.0 * t2 * g3)
                )
                out[2, i, j] = a2 * t1 + 3.0 * a3 * t2 * g1 + a4 * (6.0 * t3 * g1sq + 6.0 * t2 * g2)
                out[3, i, j] = a3 * t1 + 4.0 * a4 * t2 * g1
                out[4, i, j] = a4 * t1


def tanh_jet_into(g: np.ndarray, out: np.ndarray) -> None:
    if HAVE_NUMBA and g.dtype == np.float64 and out.dtype == np.float64:
        _tanh_jet_nb(g, out)
    else:
        _tanh_jet_numpy(g, out)


def tanh_adjoint_into(adj: np.ndarray, pre: np.ndarray, act: np.ndarray, out: np.ndarray) -> None:
    if HAVE_NUMBA and pre.dtype == np.float64 and adj.dtype == np.float64:
        _tanh_adjoint_nb(adj, pre, act, out)
    else:
        _tanh_adjoint_numpy(adj, pre, act, out)
