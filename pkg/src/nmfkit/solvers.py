"""The three NMF iterations behind one stepwise interface, plus stopping rules.

All three steppers map an IterationState to the next one and never mutate
their inputs, so a run is a pure fold over the step function (timing aside).
Iterates stay entrywise nonnegative by construction in every algorithm.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .linalg import (
    ShapeError,
    as_matrix,
    project_nonneg,
    require_finite,
    solve_least_squares,
)
from .operators import (
    StepPolicy,
    grad_step_h,
    grad_step_w,
    objective,
    rms_residual,
    step_size,
)

__all__ = [
    "ALGORITHMS",
    "StopReason",
    "NmfProblem",
    "SolverConfig",
    "IterationState",
    "initial_state",
    "step_fixed_point",
    "step_mult",
    "step_als",
    "check_stop",
    "run",
]

ALGORITHMS = ("fixed-point", "mult", "als")

# Floor for multiplicative-update denominators and for the relative-change
# denominators of the x-tolerance tests (entries may be exactly zero).
EPS_FLOOR = 1e-12

# Relative singular-value cutoff for the alternating-least-squares solves.
# Deliberately far below the pseudoinverse default: dropping only exact zero
# directions (plus a denormal guard) reproduces the unregularized behavior of
# textbook ALS, whose instability on degenerate sparse problems is part of
# what the benchmark suite measures. The default cutoff makes ALS
# unconditionally stable and hides that failure mode.
ALS_RCOND = 1e-100


class StopReason(Enum):
    MAX_ITER = "max_iter"
    FUN_TOL = "fun_tol"
    X_TOL_W = "x_tol_w"
    X_TOL_H = "x_tol_h"


@dataclass(frozen=True)
class NmfProblem:
    """A factorization instance: data matrix v (M x N, >= 0) and target rank."""

    v: np.ndarray
    rank: int

    def __post_init__(self):
        v = as_matrix(self.v, "v")
        require_finite(v, "v")
        if (v < 0).any():
            raise ValueError("v must be entrywise nonnegative")
        m, n = v.shape
        if not 1 <= self.rank < min(m, n):
            raise ValueError(
                f"rank must satisfy 1 <= rank < min(M, N) = {min(m, n)}, got {self.rank}"
            )
        object.__setattr__(self, "v", v)

    @property
    def m(self) -> int:
        return self.v.shape[0]

    @property
    def n(self) -> int:
        return self.v.shape[1]


@dataclass(frozen=True)
class SolverConfig:
    """Algorithm selection plus iteration parameters.

    combination_c is the common weight of the previous iterate in the two
    convex combinations of the fixed-point algorithm; it must lie strictly
    inside (0, 1). Defaults for max_iter and the tolerances match the
    benchmark protocol. Tolerances of 0 effectively disable the associated
    stopping tests (barring exact ties).
    """

    algorithm: str = "fixed-point"
    combination_c: float = 0.25
    step_policy: StepPolicy = field(default_factory=StepPolicy.adaptive)
    max_iter: int = 1000
    tol_fun: float = 1e-4
    tol_x: float = 1e-4

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not 0.0 < self.combination_c < 1.0:
            raise ValueError("combination_c must lie in (0, 1)")
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")
        if self.tol_fun < 0 or self.tol_x < 0:
            raise ValueError("tolerances must be >= 0")


@dataclass(frozen=True)
class IterationState:
    """Snapshot after n steps: factors, objective values, wall-clock seconds."""

    w: np.ndarray
    h: np.ndarray
    n: int
    f: float
    rms: float
    elapsed: float = 0.0


def initial_state(problem: NmfProblem, w0, h0) -> IterationState:
    w0 = as_matrix(w0, "w0")
    h0 = as_matrix(h0, "h0")
    if w0.shape != (problem.m, problem.rank) or h0.shape != (problem.rank, problem.n):
        raise ShapeError(
            f"initial factors must be {(problem.m, problem.rank)} and "
            f"{(problem.rank, problem.n)}, got {w0.shape} and {h0.shape}"
        )
    require_finite(w0, "w0")
    require_finite(h0, "h0")
    if (w0 < 0).any() or (h0 < 0).any():
        raise ValueError("initial factors must be entrywise nonnegative")
    return IterationState(
        w=w0,
        h=h0,
        n=0,
        f=objective(problem.v, w0, h0),
        rms=rms_residual(problem.v, w0, h0),
    )


def _refresh(problem: NmfProblem, s: IterationState, w, h) -> IterationState:
    return IterationState(
        w=w,
        h=h,
        n=s.n + 1,
        f=objective(problem.v, w, h),
        rms=rms_residual(problem.v, w, h),
        elapsed=s.elapsed,
    )


def step_fixed_point(problem: NmfProblem, config: SolverConfig, s: IterationState) -> IterationState:
    """One Krasnosel'skii-Mann step on each block.

    H moves first through its projected-gradient map; W then moves through a
    map built from the already-updated H (both the step length and the
    gradient see the new H). Each block update is the convex combination
    c * old + (1 - c) * mapped.
    """
    v = problem.v
    c = config.combination_c
    mu = step_size(config.step_policy, s.w)
    h_next = c * s.h + (1.0 - c) * grad_step_h(v, s.w, s.h, mu)
    lam = step_size(config.step_policy, h_next)
    w_next = c * s.w + (1.0 - c) * grad_step_w(v, s.w, h_next, lam)
    return _refresh(problem, s, w_next, h_next)


def step_mult(problem: NmfProblem, config: SolverConfig, s: IterationState) -> IterationState:
    """One multiplicative-update step, H first, then W against the new H.

    Denominators are floored at EPS_FLOOR; with strictly positive initial
    factors each block update never increases the objective.
    """
    v = problem.v
    wt = s.w.T
    h_next = s.h * (wt @ v) / np.maximum((wt @ s.w) @ s.h, EPS_FLOOR)
    w_next = s.w * (v @ h_next.T) / np.maximum(s.w @ (h_next @ h_next.T), EPS_FLOOR)
    return _refresh(problem, s, w_next, h_next)


def step_als(problem: NmfProblem, config: SolverConfig, s: IterationState) -> IterationState:
    """One alternating-least-squares step: solve each block, then clamp.

    The subproblem solutions satisfy the usual normal equations
    (W'W) Hbar = W'V and (H H') Wbar' = H V'; they are computed directly from
    the unsquared systems for conditioning, with the near-zero singular-value
    cutoff ALS_RCOND (see its comment).
    """
    v = problem.v
    h_next = project_nonneg(solve_least_squares(s.w, v, rcond=ALS_RCOND))
    w_next = project_nonneg(solve_least_squares(h_next.T, v.T, rcond=ALS_RCOND).T)
    return _refresh(problem, s, w_next, h_next)


_STEPPERS = {
    "fixed-point": step_fixed_point,
    "mult": step_mult,
    "als": step_als,
}


def check_stop(prev: IterationState, cur: IterationState, config: SolverConfig) -> StopReason | None:
    """First satisfied stopping test, checked in a fixed order.

    Order: iteration cap; relative objective change; entrywise relative
    change of W; entrywise relative change of H. The objective test uses the
    absolute change |f_n - f_{n-1}| / max(1, f_{n-1}); the entrywise tests
    divide by max(previous entry, EPS_FLOOR) since entries may be exactly 0.
    """
    if cur.n >= config.max_iter:
        return StopReason.MAX_ITER
    if abs(cur.f - prev.f) / max(1.0, prev.f) <= config.tol_fun:
        return StopReason.FUN_TOL
    dw = np.abs(cur.w - prev.w) / np.maximum(prev.w, EPS_FLOOR)
    if float(dw.max()) <= config.tol_x:
        return StopReason.X_TOL_W
    dh = np.abs(cur.h - prev.h) / np.maximum(prev.h, EPS_FLOOR)
    if float(dh.max()) <= config.tol_x:
        return StopReason.X_TOL_H
    return None


def run(
    problem: NmfProblem,
    config: SolverConfig,
    w0,
    h0,
) -> tuple[IterationState, StopReason, list[tuple[int, float, float]]]:
    """Iterate the configured algorithm until a stopping test fires.

    Returns the final state, the reason it stopped, and the objective trace
    as (n, f, rms) tuples including the initial point. Deterministic for
    fixed inputs apart from the elapsed-seconds field, which measures
    wall-clock time around the iteration loop only.
    """
    state = initial_state(problem, w0, h0)
    trace = [(state.n, state.f, state.rms)]
    if state.n >= config.max_iter:
        return state, StopReason.MAX_ITER, trace
    step = _STEPPERS[config.algorithm]
    start = time.perf_counter()
    prev = state
    while True:
        cur = replace(step(problem, config, prev), elapsed=time.perf_counter() - start)
        trace.append((cur.n, cur.f, cur.rms))
        reason = check_stop(prev, cur, config)
        if reason is not None:
            return cur, reason, trace
        prev = cur
