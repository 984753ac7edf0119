import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from netskel.diffprog import (MLP, Adam, GCNLayer, Linear, NonFiniteError, Tensor, adam_step,
                              finite_diff_check, gcn_forward, load_params, mlp_forward, no_grad,
                              normalized_adjacency, save_params)
from netskel.diffprog import tensor as T


def leaf(shape, seed=0, scale=1.0):
    return Tensor(np.random.default_rng(seed).normal(scale=scale, size=shape), requires_grad=True)


# one scalar loss per differentiable op; each must match central differences
OPS = {
    "add_broadcast": lambda a, b: T.tsum((a + b[0]) ** 2),
    "sub": lambda a, b: T.tsum((a - b) * a),
    "mul": lambda a, b: T.tsum(a * b * a),
    "div": lambda a, b: T.tsum(a / (b * b + 1.0)),
    "power": lambda a, b: T.tsum((a * a + 0.5) ** 1.5),
    "tanh": lambda a, b: T.tsum(T.tanh(a) * b),
    "sigmoid": lambda a, b: T.tsum(T.sigmoid(a) * b),
    "exp": lambda a, b: T.tsum(T.exp(a * 0.3) * b),
    "log": lambda a, b: T.tsum(T.log(a * a + 1.0)),
    "sqrt": lambda a, b: T.tsum(T.sqrt(a * a + 1.0) * b),
    "artanh": lambda a, b: T.tsum(T.artanh(T.tanh(a) * 0.7) * b),
    "absolute_smooth": lambda a, b: T.tsum(T.absolute(a * a + 0.1)),
    "mean_axis": lambda a, b: T.tsum(T.mean(a * b, axis=0) ** 2),
    "sum_keepdims": lambda a, b: T.tsum(T.tsum(a, axis=1, keepdims=True) * b),
    "reshape_transpose": lambda a, b: T.tsum(a.reshape(4, 3).transpose() @ b.reshape(4, 3)),
    "take": lambda a, b: T.tsum(a[np.array([0, 2, 2]), 1:] * 3.0) + T.tsum(b[..., 0] ** 2),
    "concat_stack": lambda a, b: T.tsum(T.stack([a, b], axis=1) ** 2) + T.tsum(T.concat([a, b], axis=0) * a[0]),
    "matmul": lambda a, b: T.tsum(T.tanh(a @ b.transpose())),
    "batched_matmul": lambda a, b: T.tsum(T.tanh(a.reshape(2, 2, 3) @ b.transpose())),
    "softmax_axis0": lambda a, b: T.tsum(T.softmax(a, axis=0) * b),
    "softmax_axis1": lambda a, b: T.tsum(T.softmax(a, axis=1) * b),
    "xlogx": lambda a, b: T.tsum(T.xlogx(T.softmax(a, axis=0))),
    "sparse_left": lambda a, b: T.tsum(T.tanh(T.sparse_left_matmul(np.array(
        [[0.5, 0.5, 0, 0], [0.2, 0.3, 0.5, 0], [0, 0, 1, 0], [0, 0.1, 0, 0.9]]), a)) * b),
}


@pytest.mark.parametrize("name", sorted(OPS))
def test_op_gradients_match_finite_differences(name):
    a, b = leaf((4, 3), 1), leaf((4, 3), 2)
    rep = finite_diff_check(lambda: OPS[name](a, b), [a, b])
    assert rep.passed, (name, rep)


def test_sparse_left_matmul_accepts_scipy_matrices():
    adj = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
    a_hat = normalized_adjacency(adj)
    x = leaf((2, 3, 4), 3)
    dense = T.sparse_left_matmul(a_hat.toarray(), x).data
    sparse = T.sparse_left_matmul(a_hat, x).data
    assert np.allclose(dense, sparse, atol=1e-14)
    rep = finite_diff_check(lambda: T.tsum(T.tanh(T.sparse_left_matmul(a_hat, x))), [x])
    assert rep.passed


def test_shared_subexpression_accumulates():
    x = leaf((3,), 4)
    y = x * x
    loss = T.tsum(y + y * y)
    loss.backward()
    assert np.allclose(x.grad, 2 * x.data + 4 * x.data ** 3)


def test_backward_requires_scalar_without_seed():
    with pytest.raises(ValueError):
        (leaf((2,)) * 2.0).backward()


def test_no_grad_records_nothing():
    x = leaf((2, 2))
    with no_grad():
        y = T.tanh(x) @ x
    assert not y.requires_grad and y._parents == ()


def test_non_finite_forward_raises():
    x = Tensor(np.array([-1.0]), requires_grad=True)
    with pytest.raises(NonFiniteError), np.errstate(invalid="ignore"):
        T.log(x)


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, (3, 4), elements=st.floats(-3, 3)))
def test_gradient_accumulation_order_independent(data):
    a = Tensor(data.copy(), requires_grad=True)
    (T.tsum(T.tanh(a) * 2.0 + a * a)).backward()
    g1 = a.grad.copy()
    a.grad = None
    (T.tsum(a * a + 2.0 * T.tanh(a))).backward()
    assert np.allclose(g1, a.grad, atol=1e-12)


# -- layers -------------------------------------------------------------------------
def test_mlp_zero_weights_give_zero_output():
    mlp = MLP([3, 5, 2], np.random.default_rng(0))
    for p in mlp.parameters():
        p.data[:] = 0
    assert np.all(mlp(np.ones((4, 3))).data == 0)


def test_linear_identity_passes_input_through():
    lin = Linear(3, 3, np.random.default_rng(0))
    lin.weight.data = np.eye(3)
    x = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(lin(x).data, x)


def test_mlp_gradient_check():
    rng = np.random.default_rng(1)
    mlp = MLP([4, 6, 3], rng)
    x = rng.normal(size=(5, 4))
    rep = finite_diff_check(lambda: T.tsum(mlp_forward(mlp, x) ** 2), mlp.parameters())
    assert rep.passed, rep


def test_mlp_rejects_wrong_width():
    mlp = MLP([4, 3], np.random.default_rng(0))
    with pytest.raises(ValueError):
        mlp(np.zeros((2, 5)))


def test_gcn_isolated_node_identity():
    a_hat = normalized_adjacency(np.zeros((1, 1)))
    x = np.array([[1.5, -2.0]])
    out = gcn_forward(Tensor(np.eye(2)), a_hat, x, activation="identity")
    assert np.allclose(out.data, x)


def test_gcn_two_node_edge_averages():
    a_hat = normalized_adjacency(np.array([[0.0, 1.0], [1.0, 0.0]]))
    x = np.array([[1.0, 0.0], [3.0, 4.0]])
    out = gcn_forward(Tensor(np.eye(2)), a_hat, x, activation="identity")
    assert np.allclose(out.data, [[2.0, 2.0], [2.0, 2.0]])


def test_gcn_gradient_check():
    rng = np.random.default_rng(2)
    adj = (rng.uniform(size=(6, 6)) < 0.4).astype(float)
    adj = np.triu(adj, 1)
    adj = adj + adj.T
    layer = GCNLayer(3, 4, rng)
    x = leaf((6, 3), 5)
    a_hat = normalized_adjacency(adj)
    rep = finite_diff_check(lambda: T.tsum(layer(a_hat, x) ** 2), layer.parameters() + [x])
    assert rep.passed, rep


def test_gcn_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        gcn_forward(Tensor(np.eye(2)), normalized_adjacency(np.zeros((3, 3))), np.zeros((2, 2)))


def test_row_normalization_rows_sum_to_one():
    a = np.array([[0, 2.0, 1.0], [2.0, 0, 0], [1.0, 0, 0]])
    rows = np.asarray(normalized_adjacency(a, mode="row").sum(axis=1)).ravel()
    assert np.allclose(rows, 1.0)


# -- optimizer ------------------------------------------------------------------------
def test_adam_zero_gradient_keeps_params():
    p = np.array([1.0, -2.0])
    new, _, _ = adam_step(p, np.zeros(2), np.zeros(2), np.zeros(2), lr=1e-3, t=1)
    assert np.array_equal(new, p)


def test_adam_first_step_has_magnitude_lr():
    p = np.zeros(3)
    new, _, _ = adam_step(p, np.array([5.0, -0.1, 1e3]), np.zeros(3), np.zeros(3), lr=1e-3, t=1)
    assert np.allclose(np.abs(new), 1e-3, rtol=1e-4)


def test_adam_rejects_step_zero():
    with pytest.raises(ValueError):
        adam_step(np.zeros(1), np.zeros(1), np.zeros(1), np.zeros(1), lr=1e-3, t=0)


def _scalar_adam_oracle(x, lr, steps, b1=0.9, b2=0.999, eps=1e-8):
    m = v = 0.0
    for t in range(1, steps + 1):
        g = 2 * x
        m, v = b1 * m + (1 - b1) * g, b2 * v + (1 - b2) * g * g
        x -= lr * (m / (1 - b1 ** t)) / (math.sqrt(v / (1 - b2 ** t)) + eps)
    return x


def _run_adam_on_square(steps):
    x = Tensor(np.array([3.0]), requires_grad=True)
    opt = Adam([x], lr=0.01)
    for _ in range(steps):
        opt.zero_grad()
        (x * x).sum().backward()
        opt.step()
    return x.data[0]


def test_adam_matches_scalar_oracle_on_quadratic():
    assert abs(_run_adam_on_square(500) - _scalar_adam_oracle(3.0, 0.01, 500)) < 1e-12
    assert abs(_run_adam_on_square(600)) < 0.1


@pytest.mark.xfail(strict=True, reason="standard Adam from x0=3 at lr 0.01 is at |x|=0.193 after 500 steps "
                                       "(scalar oracle); crossing 0.1 takes 579 steps")
def test_adam_quadratic_bowl_within_500_steps():
    assert abs(_run_adam_on_square(500)) < 0.1


def test_adam_hooks_transform_and_project():
    x = Tensor(np.array([0.0]), requires_grad=True)
    opt = Adam([x], lr=1.0)
    opt.grad_transforms[id(x)] = lambda d, g: 0.0 * g
    opt.post_update[id(x)] = lambda d: d + 7.0
    (x * 3.0).sum().backward()
    opt.step()
    assert x.data[0] == 7.0


# -- finite differences -----------------------------------------------------------------
def test_fd_check_square():
    x = Tensor(np.array([3.0]), requires_grad=True)
    rep = finite_diff_check(lambda: x * x, [x])
    assert rep.max_abs_error < 1e-6 and rep.passed


def test_fd_check_flags_kink():
    # just right of the kink the stencil straddles it: analytic slope 1, numeric ~0.01
    x = Tensor(np.array([1e-7]), requires_grad=True)
    rep = finite_diff_check(lambda: T.absolute(x), [x])
    assert not rep.passed and rep.max_rel_error > 0.5


def test_fd_check_subsamples_large_tensors():
    x = leaf((30, 30), 9)
    rep = finite_diff_check(lambda: T.tsum(x * x), [x], max_coords=50)
    assert rep.n_checked == 50 and rep.passed


# -- checkpoints ------------------------------------------------------------------------
def test_checkpoint_round_trip(tmp_path):
    params = {"a.weight": np.arange(6.0).reshape(2, 3), "b": np.array([1.5]), "scalar": np.array(2.0)}
    save_params(tmp_path / "p.bin", params)
    back = load_params(tmp_path / "p.bin")
    assert list(back) == list(params)
    for k in params:
        assert back[k].shape == params[k].shape and np.array_equal(back[k], params[k])


def test_checkpoint_rejects_foreign_file(tmp_path):
    (tmp_path / "x.bin").write_bytes(b"nope" + bytes(20))
    with pytest.raises(ValueError):
        load_params(tmp_path / "x.bin")
