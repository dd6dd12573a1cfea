"""Experiment configuration: presets, JSON config files and validation.

Config files are JSON objects.  Valid keys and defaults:

    mu, lam, kappa   model coefficients (required unless a preset supplies them)
    x0               initial value                       (1.0)
    alphas           stability indices                   ([1.8, 1.6, 1.4, 1.1])
    beta             noise skewness                      (0.0)
    deltas           coarse step sizes                   (2^-9 .. 2^-13)
    delta_ref        reference step size                 (2^-15)
    horizon          terminal time T                     (1.0)
    q                moment order of the error           (1.0)
    m                trajectories per step size          (500)
    seed             master seed                         (0)
    error_mode       "terminal" or "sup"                 ("terminal")
    out              output directory                    ("results")

Step sizes may be written as numbers or as "2^-k" strings.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, fields
from typing import Sequence

from .model import ModelParams, validate
from .sampler import StableLaw

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "PRESETS",
    "DESK_SCALE",
    "PAPER_SCALE",
    "parse_step",
    "parse_list",
    "preset_config",
    "load_config",
    "dump_config",
]

DEFAULT_ALPHAS = (1.8, 1.6, 1.4, 1.1)

# Grid settings: quick enough for CI, and the full published resolution.
DESK_SCALE = {
    "deltas": tuple(2.0**-k for k in range(13, 8, -1)),
    "delta_ref": 2.0**-15,
    "m": 500,
}
PAPER_SCALE = {
    "deltas": tuple(2.0**-k for k in range(14, 9, -1)),
    "delta_ref": 2.0**-16,
    "m": 1000,
}

PRESETS = {
    "table1": {"mu": 1.5, "lam": 2.0, "kappa": 0.5},
    "table2": {"mu": 2.0, "lam": 3.0, "kappa": 0.5},
    "table3": {"mu": 2.0, "lam": 3.0, "kappa": 0.2},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    mu: float
    lam: float
    kappa: float
    x0: float = 1.0
    alphas: tuple = DEFAULT_ALPHAS
    beta: float = 0.0
    deltas: tuple = DESK_SCALE["deltas"]
    delta_ref: float = DESK_SCALE["delta_ref"]
    horizon: float = 1.0
    q: float = 1.0
    m: int = DESK_SCALE["m"]
    seed: int = 0
    error_mode: str = "terminal"
    out: str = "results"

    def model(self, alpha: float) -> ModelParams:
        return ModelParams(self.mu, self.lam, self.kappa, self.x0, alpha)

    def law(self, alpha: float) -> StableLaw:
        return StableLaw(alpha, self.beta, 1.0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alphas"] = list(self.alphas)
        d["deltas"] = list(self.deltas)
        return d


VALID_KEYS = tuple(f.name for f in fields(ExperimentConfig))
REQUIRED_KEYS = ("mu", "lam", "kappa")

_POW2 = re.compile(r"^\s*2\s*\^\s*\(?\s*(-?\d+)\s*\)?\s*$")


def parse_step(value) -> float:
    """Read a step size given as a number or as ``2^-k``."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        m = _POW2.match(value)
        if m:
            return 2.0 ** int(m.group(1))
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"cannot read a step size from {value!r}")


def parse_list(value, item=float) -> tuple:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    return tuple(item(v) for v in value)


def _coerce(values: dict) -> dict:
    out = {}
    for key, v in values.items():
        try:
            if key in ("alphas",):
                out[key] = parse_list(v, float)
            elif key == "deltas":
                out[key] = tuple(sorted(parse_list(v, parse_step)))
            elif key == "delta_ref":
                out[key] = parse_step(v)
            elif key in ("m", "seed"):
                if isinstance(v, float) and not v.is_integer():
                    raise ValueError(v)
                out[key] = int(v)
            elif key in ("error_mode", "out"):
                out[key] = str(v)
            else:
                out[key] = float(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value for {key!r}: {v!r}") from exc
    return out


def _check_keys(values: dict, source: str) -> None:
    unknown = sorted(set(values) - set(VALID_KEYS))
    if unknown:
        raise ConfigError(
            f"unknown key(s) {', '.join(unknown)} in {source}; valid keys: {', '.join(VALID_KEYS)}"
        )


def validate_config(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check every model, noise and grid constraint; raise ConfigError on the first problem."""
    if not cfg.alphas:
        raise ConfigError("alphas must not be empty")
    for alpha in cfg.alphas:
        report = validate(cfg.model(alpha))
        if not report.all_pass:
            raise ConfigError(f"alpha = {alpha!r}: {report.describe_failures()}")
        try:
            cfg.law(alpha)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        for d in (*cfg.deltas, cfg.delta_ref):
            if not 0.0 < d < report.delta_max:
                raise ConfigError(
                    f"step size {d!r} outside the admissible window (0, {report.delta_max!r})"
                )
    if not cfg.deltas:
        raise ConfigError("deltas must not be empty")
    if not cfg.horizon > 0.0:
        raise ConfigError(f"horizon must be positive, got {cfg.horizon!r}")
    if cfg.delta_ref > min(cfg.deltas):
        raise ConfigError("delta_ref must not exceed the smallest coarse step")
    n_ref = cfg.horizon / cfg.delta_ref
    if abs(n_ref - round(n_ref)) > 1e-9 * n_ref:
        raise ConfigError(f"horizon {cfg.horizon!r} is not a multiple of delta_ref {cfg.delta_ref!r}")
    for d in cfg.deltas:
        r = d / cfg.delta_ref
        k = round(r)
        if abs(r - k) > 1e-9 * r or k & (k - 1) or round(n_ref) % k:
            raise ConfigError(f"step {d!r} is not a dyadic multiple of delta_ref {cfg.delta_ref!r}")
    if any(not 1.0 <= cfg.q < a for a in cfg.alphas):
        raise ConfigError(f"q = {cfg.q!r} must satisfy 1 <= q < alpha for every alpha")
    if cfg.m < 1:
        raise ConfigError("m must be at least 1")
    if cfg.error_mode not in ("terminal", "sup"):
        raise ConfigError(f"error_mode must be 'terminal' or 'sup', got {cfg.error_mode!r}")
    return cfg


def preset_config(name: str, scale: str = "paper") -> dict:
    """Raw key/value settings of a named preset at the given grid scale."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    grid = PAPER_SCALE if scale == "paper" else DESK_SCALE
    return {**PRESETS[name], "x0": 1.0, "alphas": DEFAULT_ALPHAS, **grid}


def load_config(path=None, overrides: dict | None = None, preset: str | None = None,
                scale: str | None = None) -> ExperimentConfig:
    """Resolve defaults, then preset, then scale, then file, then explicit overrides.

    A preset brings the published grid unless ``scale`` is "desk".  ``scale``
    alone swaps in the desk or paper grid without touching model values.
    """
    values: dict = {}
    if preset is not None:
        values.update(preset_config(preset, scale or "paper"))
    elif scale is not None:
        values.update(PAPER_SCALE if scale == "paper" else DESK_SCALE)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
        data = json.loads(text) if text.strip() else {}
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        _check_keys(data, str(path))
        values.update(data)
    if overrides:
        clean = {k: v for k, v in overrides.items() if v is not None}
        _check_keys(clean, "overrides")
        values.update(clean)
    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    cfg = ExperimentConfig(**_coerce(values))
    return validate_config(cfg)


def dump_config(cfg: ExperimentConfig, exclude: Sequence[str] = ()) -> str:
    """Serialize ``cfg`` as sorted, indented JSON, dropping any ``exclude`` keys."""
    d = {k: v for k, v in cfg.to_dict().items() if k not in exclude}
    return json.dumps(d, indent=2, sort_keys=True) + "\n"
