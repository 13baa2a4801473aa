"""Dense tanh networks that carry value plus derivatives 1-4 through every layer.

Each scalar quantity is propagated as a "jet": (v, d1, d2, d3, d4), the value
and its first four derivatives with respect to the scalar network input.
Affine layers act on each slot independently (differentiation is linear, the
bias only shifts the value slot); tanh layers compose through the fourth-order
chain rule with closed-form tanh derivatives, so there is no truncation error
anywhere: every slot is exact up to round-off.

The batch entry points keep all evaluation points in (5, n, width) arrays so
a full collocation set moves through the network with a handful of matrix
products per layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import tanh_jet_into

__all__ = [
    "Jet4",
    "MlpArchitecture",
    "jet_affine",
    "jet_tanh",
    "mlp_forward_jet",
    "mlp_jet_batch",
    "mlp_value_batch",
    "split_params",
]


@dataclass(frozen=True)
class Jet4:
    """Value and derivatives 1-4 of a scalar quantity w.r.t. the network input."""

    v: float
    d1: float = 0.0
    d2: float = 0.0
    d3: float = 0.0
    d4: float = 0.0

    @classmethod
    def constant(cls, c: float) -> "Jet4":
        return cls(float(c), 0.0, 0.0, 0.0, 0.0)

    @classmethod
    def variable(cls, x: float) -> "Jet4":
        """Jet of the identity map at x: seeds a forward pass."""
        return cls(float(x), 1.0, 0.0, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.v, self.d1, self.d2, self.d3, self.d4])


@dataclass(frozen=True)
class MlpArchitecture:
    """Scalar-in scalar-out dense network: tanh hidden layers, affine output."""

    hidden_widths: tuple[int, ...]
    input_dim: int = 1
    output_dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "hidden_widths", tuple(int(w) for w in self.hidden_widths))
        if len(self.hidden_widths) == 0:
            raise ValueError("need at least one hidden layer")
        if any(w < 1 for w in self.hidden_widths):
            raise ValueError(f"hidden widths must be >= 1, got {self.hidden_widths}")
        if self.input_dim != 1 or self.output_dim != 1:
            raise ValueError("only scalar-input scalar-output networks are supported")

    @property
    def layer_dims(self) -> list[int]:
        return [self.input_dim, *self.hidden_widths, self.output_dim]

    @property
    def n_params(self) -> int:
        dims = self.layer_dims
        return sum(dims[i] * dims[i + 1] + dims[i + 1] for i in range(len(dims) - 1))

    def to_dict(self) -> dict:
        return {"hidden_widths": list(self.hidden_widths)}

    @classmethod
    def from_dict(cls, d: dict) -> "MlpArchitecture":
        return cls(hidden_widths=tuple(d["hidden_widths"]))


def split_params(arch: MlpArchitecture, params: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Views into a flat parameter vector as per-layer (W, b) pairs.

    Layout contract: layers in order; each layer stores its weight matrix
    row-major (one row per output unit) followed by its biases.
    """
    params = np.asarray(params)
    if params.ndim != 1 or params.size != arch.n_params:
        raise ValueError(
            f"parameter vector has size {params.size}, architecture needs {arch.n_params}"
        )
    dims = arch.layer_dims
    layers = []
    off = 0
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        w = params[off : off + fan_in * fan_out].reshape(fan_out, fan_in)
        off += fan_in * fan_out
        b = params[off : off + fan_out]
        off += fan_out
        layers.append((w, b))
    return layers


def jet_affine(input_jets: list[Jet4], weights, bias: float) -> Jet4:
    """Affine combination of jets: exact, since differentiation is linear.

    The bias contributes to the value slot only.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (len(input_jets),):
        raise ValueError(
            f"got {len(input_jets)} input jets but {weights.size} weights"
        )
    acc = np.zeros(5)
    for w, j in zip(weights, input_jets):
        acc += w * j.as_array()
    acc[0] += bias
    return Jet4(*acc)


def _tanh_derivs(t: np.ndarray):
    """Derivatives 1-4 of tanh expressed in t = tanh(u)."""
    tsq = t * t
    t1 = 1.0 - tsq
    t2 = -2.0 * t * t1
    t3 = t1 * (6.0 * tsq - 2.0)
    t4 = t1 * t * (16.0 - 24.0 * tsq)
    return t1, t2, t3, t4


def _tanh_jet(g0, g1, g2, g3, g4):
    """Compose tanh with an order-4 jet (Faa di Bruno through fourth order)."""
    y0 = np.tanh(g0)
    t1, t2, t3, t4 = _tanh_derivs(y0)
    g1sq = g1 * g1
    y1 = t1 * g1
    y2 = t2 * g1sq + t1 * g2
    y3 = t3 * g1sq * g1 + 3.0 * t2 * g1 * g2 + t1 * g3
    y4 = (
        t4 * g1sq * g1sq
        + 6.0 * t3 * g1sq * g2
        + t2 * (3.0 * g2 * g2 + 4.0 * g1 * g3)
        + t1 * g4
    )
    return y0, y1, y2, y3, y4


def jet_tanh(j: Jet4) -> Jet4:
    """Jet of tanh composed with the incoming jet."""
    y = _tanh_jet(j.v, j.d1, j.d2, j.d3, j.d4)
    return Jet4(*(float(c) for c in y))


class LayerCache:
    """Per-layer intermediates kept for the reverse sweep.

    ``input_jet`` is the jet entering the affine map, ``pre`` the
    pre-activation jet and ``act`` the tanh output values (hidden layers
    only; the output layer has no activation).
    """

    __slots__ = ("input_jet", "pre", "act")

    def __init__(self, input_jet, pre=None, act=None):
        self.input_jet = input_jet
        self.pre = pre
        self.act = act


def _forward_batch(layers, xs: np.ndarray, keep_cache: bool):
    """Propagate jets for all points at once; J has shape (5, n, width)."""
    n = xs.shape[0]
    dt = np.result_type(np.float64, layers[0][0].dtype)
    J = np.zeros((5, n, 1), dtype=dt)
    J[0, :, 0] = xs
    J[1, :, 0] = 1.0
    caches = [] if keep_cache else None
    last = len(layers) - 1
    for li, (w, b) in enumerate(layers):
        fan_out, fan_in = w.shape
        G = (J.reshape(5 * n, fan_in) @ w.T).reshape(5, n, fan_out)
        G[0] += b
        if li == last:
            if keep_cache:
                caches.append(LayerCache(J))
            J = G
        else:
            A = np.empty_like(G)
            tanh_jet_into(G, A)
            if keep_cache:
                caches.append(LayerCache(J, pre=G, act=A[0]))
            J = A
    return J, caches


def mlp_jet_batch(arch: MlpArchitecture, params: np.ndarray, xs) -> np.ndarray:
    """Output jets for a batch of inputs, as an array of shape (5, n).

    Row 0 is the plain forward pass; rows 1-4 are derivatives w.r.t. x.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    layers = split_params(arch, params)
    J, _ = _forward_batch(layers, xs, keep_cache=False)
    return J[:, :, 0]


def mlp_forward_jet(arch: MlpArchitecture, params: np.ndarray, x: float) -> Jet4:
    """Value and derivatives 1-4 of the network output at a single input."""
    out = mlp_jet_batch(arch, params, [float(x)])
    return Jet4(*(float(c) for c in out[:, 0]))


def mlp_value_batch(arch: MlpArchitecture, params: np.ndarray, xs) -> np.ndarray:
    """Plain forward pass (no derivative slots); cheaper for dense grids."""
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    layers = split_params(arch, params)
    a = xs[:, None]
    last = len(layers) - 1
    for li, (w, b) in enumerate(layers):
        a = a @ w.T + b
        if li != last:
            a = np.tanh(a)
    return a[:, 0]
