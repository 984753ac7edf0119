"""Latent graph ODE on the skeleton: encoder, right-hand side and unrolled solvers."""
from __future__ import annotations

import numpy as np

from .diffprog import MLP, Module, NonFiniteError, Tensor, normalized_adjacency
from .diffprog import tensor as T
from .diffprog.layers import ACTIVATIONS, glorot, param

SOLVERS = ("euler", "rk4")


class SolverError(FloatingPointError):
    def __init__(self, msg: str, step: int):
        super().__init__(msg)
        self.step = step


def skeleton_operator(a_s: np.ndarray, mode: str = "row") -> np.ndarray:
    """Propagation matrix for the latent ODE: D^{-1}(A_s + I) by default."""
    if mode == "raw":
        return np.asarray(a_s, dtype=np.float64)
    return normalized_adjacency(a_s, self_loops=True, mode=mode).toarray()


class OdeFunc(Module):
    """dZ/dt = f(Z) + σ(Â_s σ(Z Θ3) Θ2)."""

    def __init__(self, latent_dim: int, hidden: int, rng: np.random.Generator,
                 activation: str = "tanh", out_scale: float = 1.0):
        self.f = MLP([latent_dim, hidden, latent_dim], rng, activation=activation)
        self.theta3 = param(glorot(rng, latent_dim, hidden))
        self.theta2 = param(glorot(rng, hidden, latent_dim))
        # a small output scale starts the flow near rest so long unrolls do not drift at init
        self.f.layers[-1].weight.data *= out_scale
        self.theta2.data *= out_scale
        self.activation = activation
        self.a_hat: np.ndarray | None = None

    def __call__(self, z) -> Tensor:
        return ode_rhs(z, self)


def ode_rhs(z, func: OdeFunc) -> Tensor:
    z = T.as_tensor(z)
    act = ACTIVATIONS[func.activation]
    self_term = func.f(z)
    if func.a_hat is None:
        return self_term
    if func.a_hat.shape[0] != z.shape[-2]:
        raise ValueError(f"skeleton operator is {func.a_hat.shape}, latent has {z.shape[-2]} super-nodes")
    msg = act(z @ func.theta3)
    return self_term + act(T.sparse_left_matmul(func.a_hat, msg) @ func.theta2)


class Encoder(Module):
    """Z_{s,0} = MLP(X_s), applied per super-node."""

    def __init__(self, n_in: int, hidden: int, latent_dim: int, rng: np.random.Generator):
        self.mlp = MLP([n_in, hidden, latent_dim], rng)

    def __call__(self, x_s) -> Tensor:
        return encode_initial(self, x_s)


def encode_initial(encoder: Encoder, x_s) -> Tensor:
    x_s = T.as_tensor(x_s)
    if x_s.shape[-1] != encoder.mlp.sizes[0]:
        raise ValueError(f"encoder expects {encoder.mlp.sizes[0]} features, got {x_s.shape[-1]}")
    return encoder.mlp(x_s)


def _step(rhs, z: Tensor, dt: float, method: str) -> Tensor:
    if method == "euler":
        return z + dt * rhs(z)
    k1 = rhs(z)
    k2 = rhs(z + (0.5 * dt) * k1)
    k3 = rhs(z + (0.5 * dt) * k2)
    k4 = rhs(z + dt * k3)
    return z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(z0, rhs, n_steps: int, dt: float = 1.0, method: str = "rk4") -> Tensor:
    """Unrolled fixed-step solve. Returns the states after steps 1..n_steps,
    stacked on a new axis just before the last: (..., S, h) -> (..., S, n_steps, h)."""
    if method not in SOLVERS:
        raise ValueError(f"unknown solver {method!r}; expected one of {SOLVERS}")
    z = T.as_tensor(z0)
    out = []
    for t in range(n_steps):
        try:
            z = _step(rhs, z, dt, method)
        except NonFiniteError as exc:
            raise SolverError(f"latent ODE blew up at step {t + 1}: {exc}", t + 1) from None
        out.append(z)
    return T.stack(out, axis=-2)
