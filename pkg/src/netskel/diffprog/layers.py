"""Neural building blocks on top of the tape: MLPs and graph convolutions."""
from __future__ import annotations

from typing import Callable, Iterator

import numpy as np
import scipy.sparse as sp

from . import tensor as T
from .tensor import Tensor

ACTIVATIONS: dict[str, Callable[[Tensor], Tensor]] = {
    "tanh": T.tanh,
    "identity": T.identity,
    "sigmoid": T.sigmoid,
}


def param(data) -> Tensor:
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True)


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class Module:
    """Anything exposing named trainable tensors."""

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for name, value in vars(self).items():
            full = f"{prefix}{name}"
            if isinstance(value, Tensor) and value.requires_grad:
                yield full, value
            elif isinstance(value, Module):
                yield from value.named_parameters(full + ".")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{full}.{i}.")
                    elif isinstance(item, Tensor) and item.requires_grad:
                        yield f"{full}.{i}", item

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]


class Linear(Module):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, bias: bool = True):
        self.weight = param(glorot(rng, n_in, n_out))
        self.bias = param(np.zeros(n_out)) if bias else None

    def __call__(self, x) -> Tensor:
        x = T.as_tensor(x)
        if x.shape[-1] != self.weight.shape[0]:
            raise ValueError(f"Linear expects last dim {self.weight.shape[0]}, got {x.shape}")
        y = x @ self.weight
        return y + self.bias if self.bias is not None else y


class MLP(Module):
    """Affine layers with `activation` between them and `out_activation` at the end."""

    def __init__(self, sizes: list[int], rng: np.random.Generator,
                 activation: str = "tanh", out_activation: str = "identity"):
        if len(sizes) < 2:
            raise ValueError("MLP needs at least input and output sizes")
        self.sizes = list(sizes)
        self.layers = [Linear(a, b, rng) for a, b in zip(sizes[:-1], sizes[1:])]
        self.activation = activation
        self.out_activation = out_activation

    def __call__(self, x) -> Tensor:
        return mlp_forward(self, x)


def mlp_forward(mlp: MLP, x) -> Tensor:
    act, out_act = ACTIVATIONS[mlp.activation], ACTIVATIONS[mlp.out_activation]
    h = T.as_tensor(x)
    for i, layer in enumerate(mlp.layers):
        h = layer(h)
        h = out_act(h) if i == len(mlp.layers) - 1 else act(h)
    return h


def normalized_adjacency(adj, self_loops: bool = True, mode: str = "sym"):
    """Â for graph convolution.

    mode="sym": D̃^{-1/2}(A+I)D̃^{-1/2}; mode="row": D̃^{-1}(A+I). Rows with zero
    degree are left zero in "row" mode when self_loops is False.
    """
    a = sp.csr_matrix(adj, dtype=np.float64)
    if self_loops:
        a = a + sp.identity(a.shape[0], format="csr")
    deg = np.asarray(a.sum(axis=1)).ravel()
    with np.errstate(divide="ignore"):
        if mode == "sym":
            inv = np.where(deg > 0, deg ** -0.5, 0.0)
            return (sp.diags(inv) @ a @ sp.diags(inv)).tocsr()
        if mode == "row":
            inv = np.where(deg > 0, 1.0 / deg, 0.0)
            return (sp.diags(inv) @ a).tocsr()
    raise ValueError(f"unknown normalization mode {mode!r}")


class GCNLayer(Module):
    """σ(Â X Θ) with Θ bias-free."""

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, activation: str = "tanh"):
        self.weight = param(glorot(rng, n_in, n_out))
        self.activation = activation

    def __call__(self, a_hat, x) -> Tensor:
        return gcn_forward(self.weight, a_hat, x, self.activation)


def gcn_forward(weight: Tensor, a_hat, x, activation: str = "tanh") -> Tensor:
    x = T.as_tensor(x)
    n = x.shape[-2]
    if a_hat.shape != (n, n):
        raise ValueError(f"adjacency {a_hat.shape} does not match {n} nodes")
    if x.shape[-1] != weight.shape[0]:
        raise ValueError(f"feature dim {x.shape[-1]} != weight rows {weight.shape[0]}")
    return ACTIVATIONS[activation](T.sparse_left_matmul(a_hat, x @ weight))
