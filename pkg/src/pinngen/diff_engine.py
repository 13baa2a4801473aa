"""Reverse-mode differentiation of the physics loss w.r.t. all network parameters.

The loss is a sum of squared equation residuals at collocation points plus
squared boundary mismatches.  Residuals live in the second-derivative slot of
the output jet, so the adjoint sweep runs over the whole jet program: every
jet slot of every layer is treated as an intermediate variable and the
adjoint flows through the d2 channel as well as the value channel.

Contributions are accumulated in fixed index order (collocation points first,
boundary points after), which makes results reproducible bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import tanh_adjoint_into
from .jet_mlp import MlpArchitecture, _forward_batch, split_params
from .problem import source_f

__all__ = ["LossAndGrad", "pinn_loss", "grad_pinn_loss", "fd_gradient"]


@dataclass(frozen=True)
class LossAndGrad:
    loss: float
    grad: np.ndarray


def _tanh_jet_adjoint(adj: np.ndarray, pre: np.ndarray, act: np.ndarray) -> np.ndarray:
    """Adjoint of the order-4 tanh composition.

    ``adj`` holds the adjoints of the activation output jet, ``pre`` the
    forward pre-activation jet, ``act`` the tanh values; returns the
    adjoints of the pre-activation jet.
    """
    out = np.empty_like(pre)
    tanh_adjoint_into(adj, pre, act, out)
    return out


def _backward_batch(layers, caches, out_adj: np.ndarray) -> np.ndarray:
    """Run the adjoint sweep and return the flat parameter gradient."""
    n = out_adj.shape[1]
    pieces = [None] * len(layers)
    adj = out_adj
    for li in range(len(layers) - 1, -1, -1):
        w, _ = layers[li]
        cache = caches[li]
        if cache.pre is not None:
            adj = _tanh_jet_adjoint(adj, cache.pre, cache.act)
        fan_out, fan_in = w.shape
        a_in = cache.input_jet
        wbar = adj.reshape(5 * n, fan_out).T @ a_in.reshape(5 * n, fan_in)
        bbar = adj[0].sum(axis=0)
        pieces[li] = (wbar, bbar)
        if li > 0:
            adj = (adj.reshape(5 * n, fan_out) @ w).reshape(5, n, fan_in)
    return np.concatenate([np.concatenate([wb.ravel(), bb]) for wb, bb in pieces])


def _as_points(colloc) -> np.ndarray:
    pts = getattr(colloc, "points", colloc)
    return np.atleast_1d(np.asarray(pts, dtype=np.float64))


def _check_sets(pts, boundary):
    if pts.size == 0:
        raise ValueError("collocation set is empty; the loss would be degenerate")
    if len(boundary) == 0:
        raise ValueError("boundary set is empty; the loss would be degenerate")


def _loss_pieces(arch, params, pts, boundary, source, reduction, keep_cache):
    bx = np.array([x for x, _ in boundary], dtype=np.float64)
    bt = np.array([u for _, u in boundary], dtype=np.float64)
    xs = np.concatenate([pts, bx])
    layers = split_params(arch, np.asarray(params))
    J, caches = _forward_batch(layers, xs, keep_cache=keep_cache)
    nc = pts.size
    r = J[2, :nc, 0] + source(pts)
    m = J[0, nc:, 0] - bt
    if reduction == "sum":
        cr = cb = 1.0
    elif reduction == "mean":
        cr, cb = 1.0 / nc, 1.0 / bx.size
    else:
        raise ValueError(f"unknown reduction {reduction!r}")
    loss = cr * (r * r).sum() + cb * (m * m).sum()
    return loss, r, m, cr, cb, layers, caches, nc, xs.shape[0]


def pinn_loss(arch, params, colloc, boundary, source=source_f, reduction: str = "sum"):
    """Loss value only (no gradient).  Also accepts complex parameter vectors,
    which makes complex-step derivative checks possible in the tests."""
    pts = _as_points(colloc)
    _check_sets(pts, boundary)
    loss, *_ = _loss_pieces(arch, params, pts, boundary, source, reduction, keep_cache=False)
    return loss if np.iscomplexobj(loss) else float(loss)


def grad_pinn_loss(
    arch: MlpArchitecture,
    params: np.ndarray,
    colloc,
    boundary,
    source=source_f,
    reduction: str = "sum",
) -> LossAndGrad:
    """Loss and its gradient w.r.t. the flat parameter vector.

    ``colloc`` is a collocation set (or a bare array of points); ``boundary``
    a list of (x, target) pairs.  ``reduction`` switches the loss terms
    between plain sums (default) and per-set means.
    """
    pts = _as_points(colloc)
    _check_sets(pts, boundary)
    loss, r, m, cr, cb, layers, caches, nc, n = _loss_pieces(
        arch, params, pts, boundary, source, reduction, keep_cache=True
    )
    out_adj = np.zeros((5, n, 1))
    out_adj[2, :nc, 0] = 2.0 * cr * r
    out_adj[0, nc:, 0] = 2.0 * cb * m
    grad = _backward_batch(layers, caches, out_adj)
    return LossAndGrad(loss=float(loss), grad=grad)


def fd_gradient(arch: MlpArchitecture, params: np.ndarray, loss_evaluator, step: float) -> np.ndarray:
    """Central-difference gradient of ``loss_evaluator`` (testing oracle).

    One loss-evaluation pair per parameter; O(step^2) truncation error.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    theta = np.array(params, dtype=np.float64)
    if theta.size != arch.n_params:
        raise ValueError("parameter vector does not match the architecture")
    grad = np.empty_like(theta)
    for i in range(theta.size):
        orig = theta[i]
        theta[i] = orig + step
        up = loss_evaluator(theta)
        theta[i] = orig - step
        dn = loss_evaluator(theta)
        theta[i] = orig
        grad[i] = (up - dn) / (2.0 * step)
    return grad
