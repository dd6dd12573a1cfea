"""Strong-error experiments, convergence-order fits and empirical audits."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coupling import build_lattice, dyadic_ratio, integer_ratio, pairwise_level
from .model import ModelParams, require_valid
from .sampler import RngStream, StableLaw, sample_increment_array
from .scheme import Path, TimeGrid, run_scheme, simulate_paths

__all__ = [
    "ErrorTable",
    "PositivityReport",
    "MomentReport",
    "strong_error_experiment",
    "loglog_slope",
    "fit_order",
    "monotonicity_violations",
    "positivity_audit",
    "moment_audit",
    "iter_ensemble",
    "simulate_ensemble",
]

ERROR_MODES = ("terminal", "sup")


@dataclass(frozen=True)
class ErrorTable:
    alpha: float
    q: float
    deltas: tuple
    errors: tuple
    standard_errors: tuple
    m_trajectories: int
    fitted_slope: float
    slope_stderr: float
    delta_ref: float = math.nan
    horizon: float = 1.0
    error_mode: str = "terminal"
    truncation_frequency: tuple = ()
    n_faulted: int = 0
    min_value: float = math.nan

    @property
    def target_slope(self) -> float:
        return self.q / self.alpha

    @property
    def exclusion_rate(self) -> float:
        total = self.m_trajectories + self.n_faulted
        return self.n_faulted / total if total else 0.0

    def rows(self):
        return list(zip(self.deltas, self.errors, self.standard_errors))


def _check_q(q: float, alpha: float) -> None:
    if not 1.0 <= q < alpha:
        raise ValueError(
            f"moment order q = {q!r} must satisfy 1 <= q < alpha = {alpha!r}; "
            "moments of order >= alpha of the stable noise are infinite"
        )


def loglog_slope(deltas, errors):
    """Ordinary least squares of log(error) on log(delta); returns (slope, stderr)."""
    d = np.asarray(deltas, dtype=float)
    e = np.asarray(errors, dtype=float)
    if d.shape != e.shape or d.ndim != 1:
        raise ValueError("deltas and errors must be 1-d sequences of equal length")
    if d.size < 3:
        raise ValueError(f"need at least 3 points for a slope fit, got {d.size}")
    if np.any(d <= 0) or np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise ValueError("step sizes and errors must be positive and finite")
    x = np.log(d)
    y = np.log(e)
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ yc) / sxx
    resid = yc - slope * xc
    stderr = math.sqrt(float(resid @ resid) / (d.size - 2) / sxx)
    return slope, stderr


def fit_order(table: ErrorTable):
    return loglog_slope(table.deltas, table.errors)


def monotonicity_violations(table: ErrorTable) -> int:
    """Adjacent pairs where the error grows as the step size shrinks."""
    e = table.errors
    return sum(1 for small, large in zip(e, e[1:]) if small > large)


def _experiment_chunk(params, law, deltas, delta_ref, horizon, q, master_seed, error_mode, start, stop):
    rows = [
        build_lattice(law, delta_ref, horizon, RngStream(master_seed, j)).increments
        for j in range(start, stop)
    ]
    inc = np.stack(rows)
    faulted = ~np.all(np.isfinite(inc), axis=1)
    sup = error_mode == "sup"
    stride = dyadic_ratio(deltas[0], delta_ref)
    ref = run_scheme(params, delta_ref, inc, record_every=stride if sup else 0)

    n_levels = len(deltas)
    err = np.empty((stop - start, n_levels))
    trunc = np.empty((stop - start, n_levels), dtype=np.int64)
    minimum = ref.minimum.copy()

    hi, lo, level_delta = inc, None, delta_ref
    for i, d in enumerate(deltas):
        r = dyadic_ratio(d, level_delta)
        while r > 1:
            hi, lo = pairwise_level(hi, lo)
            r //= 2
        level_delta = d
        coarse_inc = hi if lo is None else hi + lo
        run = run_scheme(params, d, coarse_inc, record_every=1 if sup else 0)
        if sup:
            s = dyadic_ratio(d, deltas[0])
            diff = np.abs(ref.recorded[:, ::s] - run.recorded)
            err[:, i] = np.max(diff**q, axis=1)
        else:
            err[:, i] = np.abs(ref.terminal - run.terminal) ** q
        trunc[:, i] = run.truncations
        np.fmin(minimum, run.minimum, out=minimum)
    return err, trunc, faulted, minimum


def strong_error_experiment(
    params: ModelParams,
    law: StableLaw,
    deltas,
    delta_ref: float,
    q: float = 1.0,
    m: int = 500,
    master_seed: int = 0,
    horizon: float = 1.0,
    error_mode: str = "terminal",
    workers: int = 1,
    chunk_size: int = 50,
) -> ErrorTable:
    """Monte Carlo estimate of E|x_ref - X_delta|^q for each step size.

    Every trajectory j gets one noise lattice at ``delta_ref`` drawn from
    ``RngStream(master_seed, j)``.  The reference path runs on that lattice and
    each coarse path runs on its exact block sums, so differences measure
    discretisation error only.  Per-trajectory results do not depend on
    ``workers`` or ``chunk_size``; averages are reduced in trajectory order.
    """
    if law.alpha != params.alpha:
        raise ValueError(f"noise alpha {law.alpha!r} differs from model alpha {params.alpha!r}")
    _check_q(q, params.alpha)
    if error_mode not in ERROR_MODES:
        raise ValueError(f"error_mode must be one of {ERROR_MODES}, got {error_mode!r}")
    if m < 1:
        raise ValueError("need at least one trajectory")
    report = require_valid(params)
    deltas = sorted(float(d) for d in deltas)
    if not deltas or len(set(deltas)) != len(deltas):
        raise ValueError("step sizes must be non-empty and distinct")
    delta_ref = float(delta_ref)
    for d in [delta_ref, *deltas]:
        if not 0.0 < d < report.delta_max:
            raise ValueError(
                f"step size {d!r} outside the admissible window (0, {report.delta_max!r}) "
                f"= (0, min((μ-1)/λ, 1/λ))"
            )
    if delta_ref > deltas[0]:
        raise ValueError(f"reference step {delta_ref!r} must not exceed the smallest step {deltas[0]!r}")
    n_fine = integer_ratio(horizon, delta_ref, "horizon / delta_ref")
    for d in deltas:
        r = dyadic_ratio(d, delta_ref)
        if n_fine % r:
            raise ValueError(f"horizon {horizon!r} is not a whole number of steps of size {d!r}")

    bounds = [(s, min(s + chunk_size, m)) for s in range(0, m, chunk_size)]

    def work(b):
        return _experiment_chunk(params, law, deltas, delta_ref, horizon, q, master_seed, error_mode, *b)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]

    err = np.concatenate([p[0] for p in parts])
    trunc = np.concatenate([p[1] for p in parts])
    faulted = np.concatenate([p[2] for p in parts])
    minimum = np.concatenate([p[3] for p in parts])

    keep = ~faulted
    n_ok = int(keep.sum())
    err = err[keep]
    trunc = trunc[keep]
    if n_ok == 0:
        raise FloatingPointError("every trajectory hit a non-finite noise increment")
    means = err.mean(axis=0)
    if n_ok > 1:
        stderrs = err.std(axis=0, ddof=1) / math.sqrt(n_ok)
    else:
        stderrs = np.full(len(deltas), math.nan)
    steps = np.array([integer_ratio(horizon, d, "horizon / delta") for d in deltas])
    freq = trunc.sum(axis=0) / (n_ok * steps)

    slope, slope_se = math.nan, math.nan
    if len(deltas) >= 3 and np.all(means > 0):
        slope, slope_se = loglog_slope(deltas, means)

    return ErrorTable(
        alpha=params.alpha,
        q=float(q),
        deltas=tuple(deltas),
        errors=tuple(float(v) for v in means),
        standard_errors=tuple(float(v) for v in stderrs),
        m_trajectories=n_ok,
        fitted_slope=slope,
        slope_stderr=slope_se,
        delta_ref=delta_ref,
        horizon=float(horizon),
        error_mode=error_mode,
        truncation_frequency=tuple(float(v) for v in freq),
        n_faulted=int(faulted.sum()),
        min_value=float(np.min(minimum[keep])),
    )


def iter_ensemble(params: ModelParams, law: StableLaw, grid: TimeGrid, m: int,
                  master_seed: int = 0, chunk_size: int = 100):
    """Yield ``m`` independent paths; trajectory j is driven by ``RngStream(master_seed, j)``."""
    n = grid.n_steps
    for start in range(0, m, chunk_size):
        stop = min(start + chunk_size, m)
        inc = np.stack([
            sample_increment_array(law, grid.delta, RngStream(master_seed, j), n)
            for j in range(start, stop)
        ])
        yield from simulate_paths(params, grid, inc)


def simulate_ensemble(params, law, grid, m, master_seed=0) -> list:
    return list(iter_ensemble(params, law, grid, m, master_seed))


@dataclass
class PositivityReport:
    min_value: float
    violations: int
    n_paths: int
    n_values: int
    n_faulted: int = 0
    truncation_frequency: dict = field(default_factory=dict)


def positivity_audit(paths) -> PositivityReport:
    """Check every grid value is at least the step size and tally truncations per step size.

    ``paths`` may be any iterable, including a generator, so large ensembles
    can be audited without holding them in memory.
    """
    min_value = math.inf
    violations = n_paths = n_values = n_faulted = 0
    steps: dict = {}
    truncs: dict = {}
    for p in paths:
        n_paths += 1
        if p.faulted:
            n_faulted += 1
            continue
        v = np.asarray(p.values)
        d = p.grid.delta
        n_values += v.size
        violations += int(np.count_nonzero(~(v >= d)))
        min_value = min(min_value, float(v.min()))
        steps[d] = steps.get(d, 0) + v.size - 1
        truncs[d] = truncs.get(d, 0) + p.truncation_count
    freq = {d: truncs[d] / steps[d] if steps[d] else 0.0 for d in sorted(steps)}
    return PositivityReport(min_value, violations, n_paths, n_values, n_faulted, freq)


@dataclass
class MomentReport:
    q: float
    means: np.ndarray
    max_mean: float
    half_max_mean: float
    stability_ratio: float
    m: int


def moment_audit(paths, q: float, alpha: float) -> MomentReport:
    """Empirical E[X^q] at each grid time, plus the stability of its maximum when m doubles.

    The ratio compares the maximum over the grid from all paths with the same
    statistic from the first half of them.
    """
    _check_q(q, alpha)
    paths = [p for p in paths if not p.faulted]
    if len(paths) < 2:
        raise ValueError("moment audit needs at least two paths")
    lengths = {len(p.values) for p in paths}
    if len(lengths) != 1:
        raise ValueError("all paths must share one time grid")
    v = np.stack([np.asarray(p.values) for p in paths])
    powered = np.abs(v) ** q
    means = powered.mean(axis=0)
    half = powered[: len(paths) // 2].mean(axis=0)
    max_mean = float(means.max())
    half_max = float(half.max())
    return MomentReport(q, means, max_mean, half_max, max_mean / half_max, len(paths))
