"""Central finite-difference checks against the tape gradients."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor

REL_FLOOR = 1e-6


def _scalar(t: Tensor) -> float:
    return float(np.asarray(t.data).reshape(()))


@dataclass
class GradCheckReport:
    max_rel_error: float
    max_abs_error: float
    n_checked: int
    tolerance: float
    worst: tuple = field(default=())

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def finite_diff_check(loss_fn: Callable[[], Tensor], params: Sequence[Tensor], h: float = 1e-5,
                      tolerance: float = 1e-4, max_coords: int = 200, seed: int = 0) -> GradCheckReport:
    """Compare analytic gradients of `loss_fn()` w.r.t. `params` with central differences.

    Tensors with more than `max_coords` entries are subsampled (seeded).
    Relative error is |a - n| / max(|a|, |n|, REL_FLOOR).
    """
    for p in params:
        p.grad = None
    loss = loss_fn()
    loss.backward()
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params]

    rng = np.random.default_rng(seed)
    worst_rel, worst_abs, n, worst = 0.0, 0.0, 0, ()
    for k, p in enumerate(params):
        flat = p.data.reshape(-1)
        coords = np.arange(flat.size)
        if flat.size > max_coords:
            coords = np.sort(rng.choice(flat.size, size=max_coords, replace=False))
        for c in coords:
            orig = flat[c]
            flat[c] = orig + h
            up = _scalar(loss_fn())
            flat[c] = orig - h
            down = _scalar(loss_fn())
            flat[c] = orig
            num = (up - down) / (2 * h)
            ana = float(analytic[k].reshape(-1)[c])
            abs_err = abs(ana - num)
            rel = abs_err / max(abs(ana), abs(num), REL_FLOOR)
            n += 1
            worst_abs = max(worst_abs, abs_err)
            if rel > worst_rel:
                worst_rel, worst = rel, (k, int(c), ana, num)
    for p in params:
        p.grad = None
    return GradCheckReport(worst_rel, worst_abs, n, tolerance, worst)
