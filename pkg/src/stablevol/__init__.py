"""Positivity preserving Euler-Maruyama simulation of a linear stochastic
volatility model driven by an alpha-stable Levy process."""

from .analysis import (
    ErrorTable,
    fit_order,
    loglog_slope,
    moment_audit,
    positivity_audit,
    strong_error_experiment,
)
from .coupling import NoiseLattice, aggregate, build_lattice, coarsen
from .model import AssumptionReport, ModelParams, compute_c_alpha, validate
from .sampler import (
    RngStream,
    StableLaw,
    empirical_cf,
    sample_increment,
    sample_standard,
)
from .scheme import Path, SchemeState, TimeGrid, em_step, simulate_path

__version__ = "0.1.0"
