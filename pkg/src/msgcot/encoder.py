"""Message-passing encoder: layered graph convolutions over a normalized
adjacency, with ELU between layers and a linear final layer, no biases.

Forward passes accept plain ndarrays or autodiff tensors. A frozen
:class:`EncoderParams` contributes its weights as constants, so no gradient
ever flows into (or out of bookkeeping for) the backbone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor, grad_check  # noqa: F401  (grad_check is part of this surface)
from .data import NormalizedAdjacency
from .errors import ConfigError, ShapeError

__all__ = ["EncoderParams", "init_encoder", "gcn_forward", "mean_readout", "grad_check"]


@dataclass
class EncoderParams:
    """Weight matrices of the encoder; ``frozen`` guards them bitwise."""

    layers: list
    dims: tuple
    frozen: bool = False

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != len(self.layers) + 1:
            raise ConfigError("dims must chain one entry per layer boundary")
        for w, (din, dout) in zip(self.layers, zip(dims, dims[1:])):
            if w.shape != (din, dout):
                raise ConfigError(f"layer shape {w.shape} does not match dims {din}x{dout}")
        self.dims = dims

    def freeze(self):
        for w in self.layers:
            w.flags.writeable = False
        self.frozen = True
        return self

    def state_bytes(self):
        """Concatenated raw bytes of every layer, for bitwise comparisons."""
        return b"".join(np.ascontiguousarray(w).tobytes() for w in self.layers)

    def astype(self, dtype):
        return EncoderParams(
            layers=[w.astype(dtype) for w in self.layers], dims=self.dims, frozen=False
        )


def xavier_uniform(rng, fan_in, fan_out, dtype=np.float64):
    a = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=(fan_in, fan_out)).astype(dtype)


def init_encoder(dims, seed, dtype=np.float64):
    """Encoder with uniform(-a, a) weights, a = sqrt(6 / (fan_in + fan_out))."""
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2:
        raise ConfigError("need at least input and output dimensions")
    if any(d <= 0 for d in dims):
        raise ConfigError(f"dimensions must be positive, got {dims}")
    rng = np.random.default_rng(seed)
    layers = [xavier_uniform(rng, din, dout, dtype) for din, dout in zip(dims, dims[1:])]
    return EncoderParams(layers=layers, dims=dims)


def _adjacency_matrix(adj):
    return adj.matrix if isinstance(adj, NormalizedAdjacency) else adj


def gcn_forward(encoder, x, adj):
    """Stacked convolutions ``H_l = ELU(A (H_{l-1} W_l))``; the last layer is linear.

    ``encoder`` may be an :class:`EncoderParams` (weights treated as
    constants) or a list of tensors/arrays (trainable when they require
    gradients). Returns a Tensor; use ``.data`` for the ndarray.
    """
    weights = encoder.layers if isinstance(encoder, EncoderParams) else list(encoder)
    a = _adjacency_matrix(adj)
    h = ad.as_tensor(x)
    if h.data.ndim != 2 or h.data.shape[1] != np.shape(weights[0])[0]:
        raise ShapeError(
            f"features {h.data.shape} do not match first layer "
            f"{np.shape(weights[0])}"
        )
    for i, w in enumerate(weights):
        h = ad.spmm(a, ad.matmul(h, ad.as_tensor(w)))
        if i < len(weights) - 1:
            h = ad.elu(h)
    return h


def mean_readout(h, membership, num_graphs=None):
    """Arithmetic mean of each graph's rows. ``membership[i]`` is node i's graph."""
    membership = np.asarray(membership, dtype=np.intp)
    if num_graphs is None:
        num_graphs = int(membership.max()) + 1 if membership.size else 0
    return ad.segment_mean(ad.as_tensor(h), membership, num_graphs)
