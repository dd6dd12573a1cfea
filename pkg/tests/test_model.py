import math

import mpmath
import numpy as np
import pytest

from stablevol.model import (
    CONDITIONS,
    AssumptionError,
    ModelParams,
    compute_c_alpha,
    require_valid,
    validate,
)


def c_alpha_oracle(alpha) -> float:
    with mpmath.workdps(50):
        a = mpmath.mpf(alpha)
        v = a * 2 ** (a - 1) * mpmath.gamma((a + 1) / 2) / (mpmath.sqrt(mpmath.pi) * mpmath.gamma(1 - a / 2))
        return float(v)


# Frozen from the 50-digit oracle above.
C_ALPHA_FIXTURES = {
    1.01: 0.31962934926277243,
    1.1: 0.32900569345106794,
    1.5: 0.29920671030107451,
    1.8: 0.16490493881830272,
    1.99: 0.0099079344762812512,
}


@pytest.mark.parametrize("alpha,expected", sorted(C_ALPHA_FIXTURES.items()))
def test_c_alpha_fixtures(alpha, expected):
    assert compute_c_alpha(alpha) == pytest.approx(expected, rel=1e-12)


def test_c_alpha_rounded_values():
    assert round(compute_c_alpha(1.8), 4) == 0.1649
    assert round(compute_c_alpha(1.1), 3) == 0.329


def test_c_alpha_grid_against_oracle():
    for a in np.linspace(1.01, 1.99, 50):
        got = compute_c_alpha(float(a))
        want = c_alpha_oracle(float(a))
        assert got > 0
        assert abs(got - want) / want <= 1e-12


@pytest.mark.parametrize("alpha", [1.0, 2.0, 0.9, 2.5, float("nan")])
def test_c_alpha_rejects_outside_range(alpha):
    with pytest.raises(ValueError):
        compute_c_alpha(alpha)


def test_paper_parameters_pass():
    rep = validate(ModelParams(1.5, 2.0, 0.5, 1.0, 1.8))
    assert rep.all_pass
    assert rep.delta_max == pytest.approx(0.25)
    assert rep.jump_floor == -2.0


def test_mu_at_one_fails():
    rep = validate(ModelParams(1.0, 2.0, 0.5, 1.0, 1.8))
    assert not rep.all_pass
    assert rep.failed == ["μ > 1"]


def test_threshold_for_small_kappa():
    rep = validate(ModelParams(2.0, 3.0, 0.2, 1.0, 1.1))
    assert rep.all_pass
    # 2 * sqrt(0.2) * C_1.1 / 1.2 from the 50-digit oracle
    assert rep.threshold == pytest.approx(0.24522636518034843, rel=1e-12)
    assert rep.threshold < 3.0


@pytest.mark.parametrize(
    "params,condition",
    [
        (ModelParams(1.5, 2.0, 0.5, 1.0, 1.0), "1 < α < 2"),
        (ModelParams(0.5, 2.0, 0.5, 1.0, 1.8), "μ > 1"),
        (ModelParams(1.5, 0.0, 0.5, 1.0, 1.8), "λ > 0"),
        (ModelParams(1.5, 2.0, 1.0, 1.0, 1.8), "0 < κ < 1"),
        (ModelParams(1.5, 2.0, 0.0, 1.0, 1.8), "0 < κ < 1"),
        (ModelParams(1.5, 2.0, 0.5, 0.0, 1.8), "x0 > 0"),
        (ModelParams(1.5, 0.05, 0.5, 1.0, 1.8), "λ > 2κ^0.5·C_α/(2α−1)"),
    ],
)
def test_each_condition_reported(params, condition):
    rep = validate(params)
    assert not rep.passes[condition]
    assert not rep.all_pass
    assert condition in rep.describe_failures()


def test_report_lists_every_condition():
    rep = validate(ModelParams(1.5, 2.0, 0.5, 1.0, 1.8))
    assert tuple(rep.passes) == CONDITIONS


def test_delta_max_window():
    rep = validate(ModelParams(2.0, 3.0, 0.5, 1.0, 1.5))
    assert rep.delta_max == min(1.0 / 3.0, 1.0 / 3.0)
    rep = validate(ModelParams(1.2, 2.0, 0.5, 1.0, 1.5))
    assert rep.delta_max == pytest.approx(0.1)
    assert validate(ModelParams(1.5, -1.0, 0.5, 1.0, 1.5)).delta_max == 0.0


def test_validate_is_pure():
    p = ModelParams(1.5, 2.0, 0.5, 1.0, 1.8)
    assert validate(p) == validate(p)


def test_validate_never_raises_on_garbage():
    rep = validate(ModelParams(-1.0, -1.0, -1.0, -1.0, 5.0))
    assert not any(rep.passes.values())
    assert math.isnan(rep.c_alpha)


def test_require_valid():
    assert require_valid(ModelParams(1.5, 2.0, 0.5, 1.0, 1.8)).all_pass
    with pytest.raises(AssumptionError, match="λ > 0"):
        require_valid(ModelParams(1.5, 0.0, 0.5, 1.0, 1.8))
