"""Seeded benchmark harness: problem generation, normalization, reports.

The protocol for one benchmark: generate a single data matrix V from the
spec, then for every solver configuration run `samples` independent solves,
each from its own seeded initial point. All configurations see byte-identical
V and per-sample initial points, so differences between report rows are
attributable to the algorithms alone.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .linalg import ShapeError, as_matrix
from .operators import rms_residual
from .rng import stream_for
from .solvers import NmfProblem, SolverConfig, run

__all__ = [
    "GeneratorSpec",
    "RunReport",
    "generate_v",
    "generate_init",
    "realized_rate",
    "normalize_solution",
    "config_label",
    "run_benchmark",
    "CSV_HEADER",
    "report_rows",
    "write_csv",
    "write_json",
]

# Stream salts: V uses salt 0, sample i uses salt i + 1.
_V_SALT = 0


@dataclass(frozen=True)
class GeneratorSpec:
    """Shape, target rank, sparsity rate and seed of a generated instance."""

    m: int
    n: int
    rank: int
    rate: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.m < 2 or self.n < 2:
            raise ValueError("m and n must be at least 2")
        if not 1 <= self.rank < min(self.m, self.n):
            raise ValueError("rank must satisfy 1 <= rank < min(m, n)")
        if not 0.0 < self.rate <= 1.0:
            raise ValueError("rate must lie in (0, 1]")


def generate_v(spec: GeneratorSpec) -> np.ndarray:
    """Data matrix with entries nonzero independently with probability rate.

    Nonzero values are uniform on (0, 1). The stream draws the value block
    first and the mask block second, so the result is a pure function of the
    spec. With rate == 1 every entry is strictly positive.
    """
    stream = stream_for(spec.seed, _V_SALT)
    values = stream.uniform(spec.m, spec.n)
    if spec.rate >= 1.0:
        return values
    mask = stream.uniform(spec.m, spec.n) < spec.rate
    return values * mask


def generate_init(spec: GeneratorSpec, sample_index: int) -> tuple[np.ndarray, np.ndarray]:
    """Strictly positive initial factors for one sample, uniform on (0, 1)."""
    if sample_index < 0:
        raise ValueError("sample_index must be >= 0")
    stream = stream_for(spec.seed, sample_index + 1)
    w0 = stream.uniform(spec.m, spec.rank)
    h0 = stream.uniform(spec.rank, spec.n)
    return w0, h0


def realized_rate(v) -> float:
    """Fraction of nonzero entries; the counting definition of sparsity."""
    v = as_matrix(v, "v")
    return np.count_nonzero(v) / v.size


def normalize_solution(w, h) -> tuple[np.ndarray, np.ndarray]:
    """Put a factor pair in reporting form without changing the product.

    Each row of H with positive norm is scaled to unit length and the
    matching column of W absorbs the scale; zero rows are left alone. The
    columns of W (with H's rows in tow) are then reordered so the column
    Euclidean lengths are nonincreasing, ties keeping their original order.
    """
    w = as_matrix(w, "w").copy()
    h = as_matrix(h, "h").copy()
    if w.shape[1] != h.shape[0]:
        raise ShapeError(f"inner dimensions differ: w {w.shape}, h {h.shape}")
    row_norms = np.linalg.norm(h, axis=1)
    positive = row_norms > 0.0
    h[positive] /= row_norms[positive, None]
    w[:, positive] *= row_norms[None, positive]
    order = np.argsort(-np.linalg.norm(w, axis=0), kind="stable")
    return w[:, order], h[order, :]


def config_label(config: SolverConfig) -> str:
    if config.algorithm != "fixed-point":
        return config.algorithm
    if config.step_policy.kind == "adaptive":
        return f"fixed-point(C={config.combination_c:g})"
    return f"fixed-point(C={config.combination_c:g},c={config.step_policy.c:g})"


@dataclass(frozen=True)
class RunReport:
    """Aggregate of `samples` runs of one configuration on one instance."""

    label: str
    config: SolverConfig
    m: int
    n: int
    rank: int
    rate_target: float
    rate_realized: float
    samples: int
    bst_t: float
    avg_t: float
    bst_f: float
    avg_f: float
    seed: int
    stop_reason_counts: dict[str, int] = field(default_factory=dict)
    sample_times: tuple[float, ...] = ()
    sample_f: tuple[float, ...] = ()


def _run_one(problem, config, w0, h0):
    final, reason, _trace = run(problem, config, w0, h0)
    wn, hn = normalize_solution(final.w, final.h)
    return final.elapsed, rms_residual(problem.v, wn, hn), reason


def run_benchmark(
    spec: GeneratorSpec,
    configs: list[SolverConfig],
    samples: int,
    timer: str = "wall",
    workers: int = 1,
) -> list[RunReport]:
    """Run every configuration over the same seeded instance and initials.

    timer="wall" records per-run wall-clock seconds; timer="off" writes 0.0
    for every time so reports are bit-reproducible. Samples may run on
    ``workers`` threads; per-sample streams make results independent of
    scheduling, and aggregation always happens in sample order.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if timer not in ("wall", "off"):
        raise ValueError(f"unknown timer mode {timer!r}")
    v = generate_v(spec)
    problem = NmfProblem(v, spec.rank)
    rate = realized_rate(v)
    inits = [generate_init(spec, i) for i in range(samples)]

    reports = []
    for config in configs:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(
                    pool.map(lambda wh: _run_one(problem, config, *wh), inits)
                )
        else:
            results = [_run_one(problem, config, w0, h0) for w0, h0 in inits]
        times = [0.0 if timer == "off" else t for t, _, _ in results]
        fvals = [fv for _, fv, _ in results]
        counts: dict[str, int] = {}
        for _, _, reason in results:
            counts[reason.value] = counts.get(reason.value, 0) + 1
        reports.append(
            RunReport(
                label=config_label(config),
                config=config,
                m=spec.m,
                n=spec.n,
                rank=spec.rank,
                rate_target=spec.rate,
                rate_realized=rate,
                samples=samples,
                bst_t=min(times),
                avg_t=sum(times) / samples,
                bst_f=min(fvals),
                avg_f=sum(fvals) / samples,
                seed=spec.seed,
                stop_reason_counts=counts,
                sample_times=tuple(times),
                sample_f=tuple(fvals),
            )
        )
    return reports


CSV_HEADER = (
    "algorithm,C,step_policy,c,M,N,R,rate_target,rate_realized_mean,"
    "samples,bstT,avgT,bstF,avgF,seed"
)


def _fmt(x: float) -> str:
    return f"{x:.8g}"


def report_rows(reports: list[RunReport]) -> list[str]:
    rows = []
    for r in reports:
        cfg = r.config
        if cfg.algorithm == "fixed-point":
            c_col = _fmt(cfg.combination_c)
            policy_col = cfg.step_policy.kind
            stepc_col = _fmt(cfg.step_policy.c) if cfg.step_policy.kind == "constant" else ""
        else:
            c_col = policy_col = stepc_col = ""
        rows.append(
            ",".join(
                [
                    cfg.algorithm,
                    c_col,
                    policy_col,
                    stepc_col,
                    str(r.m),
                    str(r.n),
                    str(r.rank),
                    _fmt(r.rate_target),
                    _fmt(r.rate_realized),
                    str(r.samples),
                    _fmt(r.bst_t),
                    _fmt(r.avg_t),
                    _fmt(r.bst_f),
                    _fmt(r.avg_f),
                    str(r.seed),
                ]
            )
        )
    return rows


def write_csv(reports: list[RunReport], path) -> None:
    lines = [CSV_HEADER] + report_rows(reports)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(reports: list[RunReport], path) -> None:
    payload = []
    for r in reports:
        cfg = r.config
        payload.append(
            {
                "algorithm": cfg.algorithm,
                "C": cfg.combination_c if cfg.algorithm == "fixed-point" else None,
                "step_policy": cfg.step_policy.kind if cfg.algorithm == "fixed-point" else None,
                "c": cfg.step_policy.c
                if cfg.algorithm == "fixed-point" and cfg.step_policy.kind == "constant"
                else None,
                "M": r.m,
                "N": r.n,
                "R": r.rank,
                "rate_target": r.rate_target,
                "rate_realized_mean": r.rate_realized,
                "samples": r.samples,
                "bstT": r.bst_t,
                "avgT": r.avg_t,
                "bstF": r.bst_f,
                "avgF": r.avg_f,
                "seed": r.seed,
                "stop_reason_counts": dict(sorted(r.stop_reason_counts.items())),
                "sample_times": list(r.sample_times),
                "sample_f": list(r.sample_f),
            }
        )
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
