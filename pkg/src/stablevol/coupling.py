"""Fine noise lattices and their exact aggregation to coarser dyadic grids.

A coarse increment over [t, t + r * delta_fine] is the sum of the r fine
increments it covers.  Sums are formed as a binary tree of pairwise TwoSum
additions whose rounding errors are carried alongside in ``residual``.  Each
coarse level is therefore one fixed function of the level below it, so
coarsening to delta and then to 2 * delta is bit-identical to coarsening
straight to 2 * delta.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .sampler import RngStream, StableLaw, sample_increment_array

__all__ = [
    "NoiseLattice",
    "build_lattice",
    "coarsen",
    "aggregate",
    "dyadic_ratio",
    "integer_ratio",
    "pairwise_level",
    "dump_blocks",
    "stack",
]


@dataclass(frozen=True, eq=False)
class NoiseLattice:
    law: StableLaw
    delta_fine: float
    increments: np.ndarray
    stream_index: int = 0
    # Compensation terms from summation; None on a freshly sampled lattice.
    residual: np.ndarray | None = None

    @property
    def n_fine(self) -> int:
        return int(self.increments.shape[-1])

    @property
    def values(self) -> np.ndarray:
        """Increments with the summation residual folded back in."""
        if self.residual is None:
            return self.increments
        return self.increments + self.residual


def integer_ratio(numerator: float, denominator: float, what: str) -> int:
    r = numerator / denominator
    k = round(r)
    if k < 1 or abs(r - k) > 1e-9 * max(1.0, abs(r)):
        raise ValueError(f"{what}: ratio {numerator!r}/{denominator!r} = {r!r} is not a positive integer")
    return int(k)


def dyadic_ratio(delta_coarse: float, delta_fine: float) -> int:
    r = integer_ratio(delta_coarse, delta_fine, "coarse step")
    if r & (r - 1):
        raise ValueError(f"coarse/fine step ratio {r} is not a power of two")
    return r


def build_lattice(law: StableLaw, delta_fine: float, horizon: float, rng: RngStream) -> NoiseLattice:
    """Sample horizon / delta_fine i.i.d. increments of the stable process."""
    if not delta_fine > 0.0:
        raise ValueError(f"delta_fine must be positive, got {delta_fine}")
    n = integer_ratio(horizon, delta_fine, "horizon / delta_fine")
    inc = sample_increment_array(law, delta_fine, rng, n)
    return NoiseLattice(law, float(delta_fine), inc, rng.stream_index)


def pairwise_level(hi: np.ndarray, lo: np.ndarray | None):
    """Sum adjacent pairs along the last axis with an error-free TwoSum."""
    a = hi[..., 0::2]
    b = hi[..., 1::2]
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    if lo is None:
        return s, err
    return s, (lo[..., 0::2] + lo[..., 1::2]) + err


def _coarsen_arrays(hi, lo, r: int):
    if hi.shape[-1] % r:
        raise ValueError(f"lattice of {hi.shape[-1]} cells does not split into blocks of {r}")
    while r > 1:
        hi, lo = pairwise_level(hi, lo)
        r //= 2
    return hi, lo


def coarsen(lattice: NoiseLattice, delta_coarse: float) -> NoiseLattice:
    """Lattice of block sums at ``delta_coarse``, keeping the summation residual."""
    r = dyadic_ratio(delta_coarse, lattice.delta_fine)
    if r == 1:
        return lattice
    hi, lo = _coarsen_arrays(lattice.increments, lattice.residual, r)
    return NoiseLattice(lattice.law, lattice.delta_fine * r, hi, lattice.stream_index, lo)


def aggregate(lattice: NoiseLattice, delta_coarse: float) -> np.ndarray:
    """Coarse increments at ``delta_coarse``; works on (n,) or stacked (m, n) lattices."""
    return coarsen(lattice, delta_coarse).values


def dump_blocks(lattice: NoiseLattice, delta_coarse: float, path) -> None:
    """Debug dump of one lattice's block sums as CSV ``block,sum``."""
    sums = aggregate(lattice, delta_coarse)
    if sums.ndim != 1:
        raise ValueError("dump_blocks expects a single lattice")
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["block", "sum"])
            for j, v in enumerate(sums):
                w.writerow([j, repr(float(v))])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def stack(lattices) -> NoiseLattice:
    """Stack same-resolution lattices into one (m, n) lattice for batch work."""
    lattices = list(lattices)
    if not lattices:
        raise ValueError("nothing to stack")
    first = lattices[0]
    if any(not math.isclose(l.delta_fine, first.delta_fine, rel_tol=0, abs_tol=0) for l in lattices):
        raise ValueError("lattices have different resolutions")
    inc = np.stack([l.increments for l in lattices])
    res = None
    if any(l.residual is not None for l in lattices):
        res = np.stack([l.residual if l.residual is not None else np.zeros_like(l.increments) for l in lattices])
    return NoiseLattice(first.law, first.delta_fine, inc, first.stream_index, res)
