"""Strictly alpha-stable variates and process increments.

Variates are drawn with the Chambers-Mallows-Stuck transform, which is exact
and rejection-free for alpha != 1.  Every draw comes from an :class:`RngStream`,
a (master_seed, stream_index) pair mapped onto an independent PCG64 stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "StableLaw",
    "RngStream",
    "cms_transform",
    "sample_standard",
    "sample_standard_array",
    "increment_scale",
    "sample_increment",
    "sample_increment_array",
    "empirical_cf",
    "stable_cf",
    "hill_estimator",
]

_HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class StableLaw:
    """Strictly stable law S_alpha(sigma, beta, 0) with 1 < alpha < 2."""

    alpha: float
    beta: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "sigma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)!r}")
        if not 1.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in the open interval (1, 2), got {self.alpha}")
        if not -1.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [-1, 1], got {self.beta}")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def standard(self) -> StableLaw:
        return StableLaw(self.alpha, self.beta, 1.0)


class RngStream:
    """Deterministic uniform/exponential source for one trajectory.

    Streams with equal ``(master_seed, stream_index)`` produce bit-identical
    sequences; distinct indices are spawned children of the same
    ``SeedSequence`` and are statistically independent.  A stream is owned by
    one consumer at a time.
    """

    def __init__(self, master_seed: int, stream_index: int = 0):
        if stream_index < 0:
            raise ValueError("stream_index must be non-negative")
        self.master_seed = int(master_seed) & 0xFFFFFFFFFFFFFFFF
        self.stream_index = int(stream_index)
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"

    def uniform_angle(self, n: int) -> np.ndarray:
        """Uniform draws on [-pi/2, pi/2); the closed endpoint is redrawn by callers."""
        return self._gen.uniform(-_HALF_PI, _HALF_PI, n)

    def exponential(self, n: int) -> np.ndarray:
        return self._gen.standard_exponential(n)


def cms_transform(alpha: float, beta: float, u, w):
    """Map angles ``u`` in (-pi/2, pi/2) and Exp(1) draws ``w`` to S_alpha(1, beta, 0)."""
    t = beta * math.tan(_HALF_PI * alpha)
    b = math.atan(t) / alpha
    s = (1.0 + t * t) ** (1.0 / (2.0 * alpha))
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    ab = alpha * (u + b)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return (
            s
            * np.sin(ab)
            / np.cos(u) ** (1.0 / alpha)
            * (np.cos(u - ab) / w) ** ((1.0 - alpha) / alpha)
        )


def sample_standard_array(law: StableLaw, rng: RngStream, n: int) -> np.ndarray:
    """Draw ``n`` variates from S_alpha(1, beta, 0).

    Degenerate draws (u = -pi/2, w = 0, or a non-finite transform) are redrawn
    from the same stream, so the output is still a deterministic function of
    the stream state.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    u = rng.uniform_angle(n)
    w = rng.exponential(n)
    x = cms_transform(law.alpha, law.beta, u, w)
    bad = np.flatnonzero((u <= -_HALF_PI) | (w <= 0.0) | ~np.isfinite(x))
    while bad.size:
        u2 = rng.uniform_angle(bad.size)
        w2 = rng.exponential(bad.size)
        x2 = cms_transform(law.alpha, law.beta, u2, w2)
        x[bad] = x2
        bad = bad[(u2 <= -_HALF_PI) | (w2 <= 0.0) | ~np.isfinite(x2)]
    return x


def sample_standard(law: StableLaw, rng: RngStream) -> float:
    """One S_alpha(1, beta, 0) variate; ``law.sigma`` is ignored."""
    return float(sample_standard_array(law, rng, 1)[0])


def increment_scale(law: StableLaw, dt: float) -> float:
    """Scale of L(t + dt) - L(t): sigma * dt**(1/alpha)."""
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    return law.sigma * dt ** (1.0 / law.alpha)


def sample_increment_array(law: StableLaw, dt: float, rng: RngStream, n: int) -> np.ndarray:
    scale = increment_scale(law, dt)
    return scale * sample_standard_array(law, rng, n)


def sample_increment(law: StableLaw, dt: float, rng: RngStream) -> float:
    """One increment over a step of length ``dt``, distributed S_alpha(sigma dt^(1/alpha), beta, 0)."""
    return float(sample_increment_array(law, dt, rng, 1)[0])


def empirical_cf(samples, u: float) -> complex:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("empirical_cf needs at least one sample")
    ux = u * x
    return complex(np.mean(np.cos(ux)), np.mean(np.sin(ux)))


def stable_cf(law: StableLaw, u: float) -> complex:
    """Characteristic function of S_alpha(sigma, beta, 0) at ``u``."""
    a = law.alpha
    mag = (law.sigma * abs(u)) ** a
    skew = law.beta * math.copysign(1.0, u) * math.tan(_HALF_PI * a) if u else 0.0
    return complex(math.exp(-mag) * math.cos(mag * skew), math.exp(-mag) * math.sin(mag * skew))


def hill_estimator(samples, fraction: float = 0.01) -> float:
    """Hill tail-index estimate from the top ``fraction`` of ``|samples|``."""
    x = np.abs(np.asarray(samples, dtype=float))
    k = int(x.size * fraction)
    if k < 1 or k >= x.size:
        raise ValueError("fraction leaves no usable order statistics")
    top = np.sort(x)[-(k + 1):]
    threshold = top[0]
    if not threshold > 0.0:
        raise ValueError("tail threshold is zero")
    return 1.0 / float(np.mean(np.log(top[1:] / threshold)))
