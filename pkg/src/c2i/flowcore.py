"""Velocity-matching arithmetic: interpolation, target, loss, gradient.

Tiny numeric kernel kept separate so it can be verified independently
(finite differences, endpoint identities) without touching any model code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantError, ShapeError


def _as_latent(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvariantError(f"{name} must be a nonempty 1-D vector")
    if not np.isfinite(arr).all():
        raise InvariantError(f"{name} must be finite")
    return arr


def _pair(a, b, name_a: str, name_b: str):
    va = _as_latent(a, name_a)
    vb = _as_latent(b, name_b)
    if va.shape != vb.shape:
        raise ShapeError(f"{name_a} has length {va.size}, {name_b} has length {vb.size}")
    return va, vb


@dataclass(frozen=True, eq=False)
class FlowSample:
    """A data/noise latent pair with an interpolation time in [0, 1]."""

    x0: np.ndarray
    x1: np.ndarray
    t: float

    def __post_init__(self):
        x0, x1 = _pair(self.x0, self.x1, "x0", "x1")
        if not (0.0 <= self.t <= 1.0):
            raise InvariantError("t must lie in [0,1]")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "t", float(self.t))


def interpolate_latent(sample: FlowSample) -> np.ndarray:
    """Linear path point (1-t)*x0 + t*x1."""
    return (1.0 - sample.t) * sample.x0 + sample.t * sample.x1


def velocity_target(x0, x1) -> np.ndarray:
    """Regression target x0 - x1."""
    a, b = _pair(x0, x1, "x0", "x1")
    return a - b


def flow_matching_loss(pred_v, x0, x1) -> float:
    """Mean squared residual against the velocity target."""
    pred, a = _pair(pred_v, x0, "pred_v", "x0")
    _, b = _pair(a, x1, "x0", "x1")
    residual = pred - (a - b)
    return float(np.mean(residual**2))


def loss_gradient(pred_v, x0, x1) -> np.ndarray:
    """Analytic d(loss)/d(pred_v): 2*(pred_v - (x0 - x1))/N."""
    pred, a = _pair(pred_v, x0, "pred_v", "x0")
    _, b = _pair(a, x1, "x0", "x1")
    residual = pred - (a - b)
    return 2.0 * residual / residual.size


def finite_difference_gradient(pred_v, x0, x1, h: float = 1e-5) -> np.ndarray:
    """Central-difference check gradient; the slow route of the dual check."""
    pred, _ = _pair(pred_v, x0, "pred_v", "x0")
    grad = np.empty_like(pred)
    for i in range(pred.size):
        plus = pred.copy()
        minus = pred.copy()
        plus[i] += h
        minus[i] -= h
        grad[i] = (flow_matching_loss(plus, x0, x1) - flow_matching_loss(minus, x0, x1)) / (2 * h)
    return grad


def gradient_check(pred_v, x0, x1, h: float = 1e-5) -> float:
    """Max componentwise relative error between analytic and FD gradients."""
    analytic = loss_gradient(pred_v, x0, x1)
    numeric = finite_difference_gradient(pred_v, x0, x1, h)
    rel = np.abs(analytic - numeric) / (np.abs(analytic) + 1e-12)
    return float(rel.max())
