"""Projected-gradient machinery for the half-squared Frobenius NMF objective.

For a fixed left factor W, the map H -> clamp(H - mu * W'(WH - V)) is
nonexpansive whenever mu <= 2 / ||W'W||_F, and its fixed points are exactly
the minimizers of the convex subproblem min_{H >= 0} 0.5 * ||V - WH||_F^2.
The same holds with the roles of W and H exchanged. These two maps drive the
fixed-point solver and the stationarity gauge below.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .linalg import ShapeError, as_matrix, frobenius_norm, project_nonneg

__all__ = [
    "StepPolicy",
    "Gradient",
    "grad_h",
    "grad_w",
    "gradient",
    "objective",
    "rms_residual",
    "step_size",
    "grad_step_h",
    "grad_step_w",
    "stationarity_residual",
]


@dataclass(frozen=True)
class StepPolicy:
    """Step-size rule for the projected-gradient maps.

    "adaptive" uses 2 / max(1, ||X'X||_F) where X is the factor held fixed by
    the map (unit-clamped so the step stays defined at X = 0). "constant"
    always returns ``c``; nothing checks it against the nonexpansivity bound,
    which is deliberate — overly large constants are a useful failure mode.
    """

    kind: str
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in ("adaptive", "constant"):
            raise ValueError(f"unknown step policy kind: {self.kind!r}")
        if self.kind == "constant" and not self.c > 0.0:
            raise ValueError("constant step policy requires c > 0")

    @classmethod
    def adaptive(cls) -> "StepPolicy":
        return cls("adaptive")

    @classmethod
    def constant(cls, c: float) -> "StepPolicy":
        return cls("constant", float(c))


class Gradient(NamedTuple):
    grad_w: np.ndarray
    grad_h: np.ndarray


def _check_triple(v, w, h) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    v = as_matrix(v, "v")
    w = as_matrix(w, "w")
    h = as_matrix(h, "h")
    if w.shape[0] != v.shape[0] or h.shape[1] != v.shape[1] or w.shape[1] != h.shape[0]:
        raise ShapeError(
            f"shapes do not conform: v {v.shape}, w {w.shape}, h {h.shape}"
        )
    return v, w, h


def grad_h(v, w, h) -> np.ndarray:
    """Partial gradient in H of 0.5*||V - WH||_F^2, namely W'(WH - V)."""
    v, w, h = _check_triple(v, w, h)
    return w.T @ (w @ h - v)


def grad_w(v, w, h) -> np.ndarray:
    """Partial gradient in W of 0.5*||V - WH||_F^2, namely (WH - V)H'."""
    v, w, h = _check_triple(v, w, h)
    return (w @ h - v) @ h.T


def gradient(v, w, h) -> Gradient:
    return Gradient(grad_w(v, w, h), grad_h(v, w, h))


def objective(v, w, h) -> float:
    """Half the squared Frobenius residual; the quantity the solvers monitor."""
    v, w, h = _check_triple(v, w, h)
    return 0.5 * float(np.linalg.norm(v - w @ h)) ** 2


def rms_residual(v, w, h) -> float:
    """Frobenius residual scaled by sqrt(V.size); the benchmark metric."""
    v, w, h = _check_triple(v, w, h)
    return float(np.linalg.norm(v - w @ h)) / np.sqrt(v.size)


def step_size(policy: StepPolicy, factor) -> float:
    """Step length for the map that holds ``factor`` fixed."""
    if policy.kind == "constant":
        return policy.c
    x = as_matrix(factor)
    return 2.0 / max(1.0, frobenius_norm(x.T @ x))


def grad_step_h(v, w, h, mu: float) -> np.ndarray:
    """One projected-gradient step on H: clamp(h - mu * grad_h).

    When w is the zero matrix the gradient vanishes identically and the step
    returns h unchanged (h is assumed nonnegative, so projecting is a no-op).
    """
    v, w, h = _check_triple(v, w, h)
    if not mu > 0.0:
        raise ValueError(f"step must be positive, got {mu}")
    if not w.any():
        return h
    return project_nonneg(h - mu * (w.T @ (w @ h - v)))


def grad_step_w(v, w, h, lam: float) -> np.ndarray:
    """One projected-gradient step on W: clamp(w - lam * grad_w).

    Degenerate when h is the zero matrix, mirroring grad_step_h.
    """
    v, w, h = _check_triple(v, w, h)
    if not lam > 0.0:
        raise ValueError(f"step must be positive, got {lam}")
    if not h.any():
        return w
    return project_nonneg(w - lam * ((w @ h - v) @ h.T))


def stationarity_residual(v, w, h) -> float:
    """Distance of (w, h) from being fixed under both projected-gradient maps.

    Uses the unit-clamped adaptive steps so the gauge is defined even at zero
    factors. Zero exactly when (w, h) is a first-order stationary pair of the
    nonnegativity-constrained problem.
    """
    v, w, h = _check_triple(v, w, h)
    adaptive = StepPolicy.adaptive()
    mu = step_size(adaptive, w)
    lam = step_size(adaptive, h)
    dh = frobenius_norm(h - grad_step_h(v, w, h, mu))
    dw = frobenius_norm(w - grad_step_w(v, w, h, lam))
    return float(np.hypot(dw, dh))
