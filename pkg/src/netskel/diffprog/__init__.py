"""Minimal reverse-mode differentiation, layers and optimizer."""
from . import tensor
from .checkpoint import load_params, save_params
from .gradcheck import GradCheckReport, finite_diff_check
from .layers import MLP, GCNLayer, Linear, Module, gcn_forward, mlp_forward, normalized_adjacency
from .optim import Adam, adam_step
from .tensor import NonFiniteError, Tensor, no_grad

__all__ = [
    "Adam", "GCNLayer", "GradCheckReport", "Linear", "MLP", "Module", "NonFiniteError",
    "Tensor", "adam_step", "finite_diff_check", "gcn_forward", "load_params",
    "mlp_forward", "no_grad", "normalized_adjacency", "save_params", "tensor",
]
