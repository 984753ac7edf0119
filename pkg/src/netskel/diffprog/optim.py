"""Adam with bias correction."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor

BETAS = (0.9, 0.999)
EPS = 1e-8


def adam_step(param: np.ndarray, grad: np.ndarray, m: np.ndarray, v: np.ndarray,
              lr: float, t: int, betas: tuple[float, float] = BETAS, eps: float = EPS):
    """One Adam update. Returns (new_param, new_m, new_v); inputs are not mutated."""
    if t < 1:
        raise ValueError("Adam step counter starts at 1")
    b1, b2 = betas
    m = b1 * m + (1 - b1) * grad
    v = b2 * v + (1 - b2) * grad * grad
    m_hat = m / (1 - b1 ** t)
    v_hat = v / (1 - b2 ** t)
    return param - lr * m_hat / (np.sqrt(v_hat) + eps), m, v


class Adam:
    """Stateful wrapper over `adam_step` for a fixed list of tensors.

    `grad_transforms` maps a tensor's id to a function applied to its raw
    gradient before the moment update (used for Riemannian rescaling), and
    `post_update` hooks run on the new value (used for disk clipping).
    """

    def __init__(self, params: Sequence[Tensor], lr: float = 1e-3):
        self.params = list(params)
        self.lr = lr
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]
        self.grad_transforms: dict[int, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {}
        self.post_update: dict[int, Callable[[np.ndarray], np.ndarray]] = {}

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def step(self) -> None:
        self.t += 1
        for i, p in enumerate(self.params):
            if p.grad is None:
                continue
            g = p.grad
            if id(p) in self.grad_transforms:
                g = self.grad_transforms[id(p)](p.data, g)
            p.data, self.m[i], self.v[i] = adam_step(p.data, g, self.m[i], self.v[i], self.lr, self.t)
            if id(p) in self.post_update:
                p.data = self.post_update[id(p)](p.data)
