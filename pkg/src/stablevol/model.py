"""Parameters of dx = (mu - lam x) dt + kappa x(t-) dL and their standing assumptions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "ModelParams",
    "AssumptionReport",
    "AssumptionError",
    "compute_c_alpha",
    "validate",
    "require_valid",
    "CONDITIONS",
]

# Labels used in reports and error messages, in evaluation order.
ALPHA_RANGE = "1 < α < 2"
MU_GT_1 = "μ > 1"
LAMBDA_POS = "λ > 0"
KAPPA_RANGE = "0 < κ < 1"
X0_POS = "x0 > 0"
LAMBDA_THRESHOLD = "λ > 2κ^0.5·C_α/(2α−1)"
CONDITIONS = (ALPHA_RANGE, MU_GT_1, LAMBDA_POS, KAPPA_RANGE, X0_POS, LAMBDA_THRESHOLD)


class AssumptionError(ValueError):
    """Raised when parameters must satisfy the standing assumptions but do not."""

    def __init__(self, report: AssumptionReport):
        self.report = report
        super().__init__(report.describe_failures())


def compute_c_alpha(alpha: float) -> float:
    """Levy-measure constant C_alpha = alpha 2^(alpha-1) Gamma((alpha+1)/2) / (sqrt(pi) Gamma(1 - alpha/2))."""
    if not 1.0 < alpha < 2.0:
        raise ValueError(f"C_alpha is defined here for 1 < alpha < 2, got {alpha}")
    return (
        alpha
        * 2.0 ** (alpha - 1.0)
        * math.gamma(0.5 * (alpha + 1.0))
        / (math.sqrt(math.pi) * math.gamma(1.0 - 0.5 * alpha))
    )


@dataclass(frozen=True)
class ModelParams:
    mu: float
    lam: float
    kappa: float
    x0: float
    alpha: float

    @property
    def mean_reversion_level(self) -> float:
        return self.mu / self.lam


@dataclass(frozen=True)
class AssumptionReport:
    params: ModelParams
    c_alpha: float
    threshold: float
    delta_max: float
    passes: dict = field(default_factory=dict)
    # Negative jumps are assumed to stay above this floor; reported, never enforced.
    jump_floor: float = float("-inf")

    @property
    def all_pass(self) -> bool:
        return all(self.passes.values())

    @property
    def failed(self) -> list:
        return [name for name, ok in self.passes.items() if not ok]

    def describe_failures(self) -> str:
        if self.all_pass:
            return "all parameter assumptions hold"
        p = self.params
        parts = []
        for name in self.failed:
            if name == LAMBDA_THRESHOLD:
                parts.append(f"{name} violated: λ = {p.lam!r}, threshold = {self.threshold!r}")
            elif name == ALPHA_RANGE:
                parts.append(f"{name} violated: α = {p.alpha!r}")
            elif name == MU_GT_1:
                parts.append(f"{name} violated: μ = {p.mu!r}")
            elif name == LAMBDA_POS:
                parts.append(f"{name} violated: λ = {p.lam!r}")
            elif name == KAPPA_RANGE:
                parts.append(f"{name} violated: κ = {p.kappa!r}")
            else:
                parts.append(f"{name} violated: x0 = {p.x0!r}")
        return "parameter assumption failed: " + "; ".join(parts)


def validate(params: ModelParams) -> AssumptionReport:
    """Evaluate every parameter condition; never raises."""
    p = params
    alpha_ok = 1.0 < p.alpha < 2.0
    c_alpha = compute_c_alpha(p.alpha) if alpha_ok else math.nan
    if alpha_ok and p.kappa >= 0.0:
        threshold = 2.0 * p.kappa**0.5 * c_alpha / (2.0 * p.alpha - 1.0)
    else:
        threshold = math.nan
    passes = {
        ALPHA_RANGE: alpha_ok,
        MU_GT_1: p.mu > 1.0,
        LAMBDA_POS: p.lam > 0.0,
        KAPPA_RANGE: 0.0 < p.kappa < 1.0,
        X0_POS: p.x0 > 0.0,
        LAMBDA_THRESHOLD: bool(p.lam > threshold),  # nan compares False
    }
    if p.lam > 0.0:
        delta_max = max(0.0, min((p.mu - 1.0) / p.lam, 1.0 / p.lam))
    else:
        delta_max = 0.0
    jump_floor = -1.0 / p.kappa if p.kappa > 0.0 else float("-inf")
    return AssumptionReport(p, c_alpha, threshold, delta_max, passes, jump_floor)


def require_valid(params: ModelParams) -> AssumptionReport:
    report = validate(params)
    if not report.all_pass:
        raise AssumptionError(report)
    return report
