"""Positivity preserving explicit Euler-Maruyama scheme.

One step reads

    X[k+1] = X[k] + (mu - lam * Xt[k]) * delta + kappa * Xt[k] * dL[k]
    Xt[k+1] = max(X[k+1], delta)

so both drift and diffusion see the clamped state ``Xt``.  The batch kernel
:func:`run_scheme` advances many trajectories at once; it only uses IEEE
add/multiply/max, so each trajectory's result is independent of how
trajectories are grouped into batches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import ModelParams, validate

__all__ = [
    "TimeGrid",
    "SchemeState",
    "Path",
    "StepWindowError",
    "initial_state",
    "em_step",
    "SchemeRun",
    "run_scheme",
    "simulate_path",
    "simulate_paths",
]


class StepWindowError(ValueError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k * delta, k = 0..n_steps, with n_steps = floor(horizon / delta)."""

    delta: float
    horizon: float = 1.0

    def __post_init__(self):
        if not (self.delta > 0.0 and math.isfinite(self.delta)):
            raise ValueError(f"step size must be positive and finite, got {self.delta}")
        if not (self.horizon > 0.0 and math.isfinite(self.horizon)):
            raise ValueError(f"horizon must be positive and finite, got {self.horizon}")

    @property
    def n_steps(self) -> int:
        n = math.floor(self.horizon / self.delta)
        # guard against the quotient rounding across an integer
        while n * self.delta > self.horizon:
            n -= 1
        while (n + 1) * self.delta <= self.horizon:
            n += 1
        return n

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.delta

    def check_window(self, params: ModelParams) -> None:
        """Reject steps outside 0 < delta < min((mu-1)/lam, 1/lam)."""
        dmax = validate(params).delta_max
        if not self.delta < dmax:
            raise StepWindowError(
                f"step size {self.delta!r} outside the admissible window (0, {dmax!r}); "
                f"need delta < min((mu-1)/lam, 1/lam)"
            )


@dataclass(frozen=True)
class SchemeState:
    x_raw: float
    x_tilde: float
    step_index: int = 0
    truncation_count: int = 0


@dataclass(frozen=True)
class Path:
    grid: TimeGrid
    values: np.ndarray
    truncation_count: int = 0
    faulted: bool = False

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def terminal(self) -> float:
        return float(self.values[-1])


class SchemeRun(NamedTuple):
    terminal: np.ndarray
    truncations: np.ndarray
    minimum: np.ndarray
    recorded: np.ndarray | None


def initial_state(x0: float, delta: float) -> SchemeState:
    return SchemeState(float(x0), max(float(x0), delta), 0, 0)


def em_step(state: SchemeState, params: ModelParams, delta: float, dL: float) -> SchemeState:
    if not math.isfinite(dL):
        raise FloatingPointError(f"non-finite noise increment {dL!r} at step {state.step_index}")
    xt = state.x_tilde
    x = state.x_raw + (params.mu - params.lam * xt) * delta + params.kappa * xt * dL
    truncated = x < delta
    return SchemeState(
        x,
        max(x, delta),
        state.step_index + 1,
        state.truncation_count + int(truncated),
    )


def run_scheme(params: ModelParams, delta: float, increments, record_every: int = 0):
    """Advance a batch of trajectories.

    ``increments`` has shape (m, n).  Returns a :class:`SchemeRun` whose
    ``terminal`` holds the clamped values after n steps, ``truncations``
    counts steps with a raw value below ``delta``, ``minimum`` is the smallest
    clamped value seen and ``recorded`` is either None or an
    (m, n // record_every + 1) array of clamped values at every
    ``record_every``-th grid point.  Non-finite increments propagate NaN into
    their trajectory.
    """
    inc = np.asarray(increments, dtype=float)
    if inc.ndim != 2:
        raise ValueError("increments must be a 2-d array (trajectories, steps)")
    m, n = inc.shape
    inc_t = np.ascontiguousarray(inc.T)
    mu, lam, kappa = float(params.mu), float(params.lam), float(params.kappa)
    delta = float(delta)

    x = np.full(m, float(params.x0))
    xt = np.maximum(x, delta)
    xmin = xt.copy()
    trunc = np.zeros(m, dtype=np.int64)
    recorded = None
    if record_every:
        recorded = np.empty((n // record_every + 1, m))
        recorded[0] = xt
    for k in range(n):
        x = x + (mu - lam * xt) * delta + kappa * xt * inc_t[k]
        trunc += x < delta
        xt = np.maximum(x, delta)
        np.fmin(xmin, xt, out=xmin)
        if record_every and (k + 1) % record_every == 0:
            recorded[(k + 1) // record_every] = xt
    if recorded is not None:
        recorded = np.ascontiguousarray(recorded.T)
    return SchemeRun(xt, trunc, xmin, recorded)


def simulate_paths(params: ModelParams, grid: TimeGrid, increments) -> list:
    inc = np.asarray(increments, dtype=float)
    if inc.ndim != 2 or inc.shape[1] != grid.n_steps:
        raise ValueError(
            f"expected increments of shape (m, {grid.n_steps}), got {inc.shape}"
        )
    faulted = ~np.all(np.isfinite(inc), axis=1)
    run = run_scheme(params, grid.delta, inc, record_every=1)
    return [
        Path(grid, run.recorded[i], int(run.truncations[i]), bool(faulted[i]))
        for i in range(inc.shape[0])
    ]


def simulate_path(params: ModelParams, grid: TimeGrid, increments) -> Path:
    """Run the scheme over ``grid`` driven by exactly ``grid.n_steps`` increments."""
    inc = np.asarray(increments, dtype=float)
    if inc.ndim != 1 or inc.size != grid.n_steps:
        raise ValueError(
            f"expected {grid.n_steps} increments, got shape {inc.shape}"
        )
    return simulate_paths(params, grid, inc[None, :])[0]
