"""Geometric Levy models: optimal leverage, expansion, sensitivities, registry."""

from __future__ import annotations

import math

import numpy as np
import pytest

from kellyloop import (
    LevyModel,
    MarketParams,
    brownian_model,
    get_model,
    glm_leverage_sensitivity,
    glm_log_utility_expansion,
    glm_optimal_leverage,
    jump_diffusion_model,
    list_models,
    log_growth_drift,
    poisson_jump_model,
    register_model,
)
from kellyloop.exceptions import ConfigurationException, DegenerateExponentError


def _jd_psi(s: float, m: float = 1.0) -> float:
    return 0.5 * s * s + m * (math.exp(s) - 1.0 - s)


def _jd_dpsi(s: float, m: float = 1.0) -> float:
    return s + m * (math.exp(s) - 1.0)


def _jd_convexity(sigma: float) -> float:
    return _jd_psi(2 * sigma) - 2 * _jd_psi(sigma)


def _grid_argmax(premium: float, convexity: float, lo=-5.0, hi=5.0, step=1e-4) -> float:
    a = np.arange(lo, hi, step)
    values = premium * a - 0.5 * a * a * convexity
    return float(a[np.argmax(values)])


# ---- glm_optimal_leverage ----------------------------------------------- #


def test_brownian_example():
    assert glm_optimal_leverage(brownian_model(), 0.2, 0.4) == pytest.approx(0.5, rel=1e-12)


def test_brownian_reduces_to_ratio_on_grid():
    model = brownian_model()
    for lam in np.linspace(-0.5, 0.5, 20):
        for sigma in np.linspace(0.05, 1.0, 20):
            got = glm_optimal_leverage(model, float(lam), float(sigma))
            assert math.isclose(got, lam / sigma, rel_tol=1e-12, abs_tol=1e-12)


@pytest.mark.parametrize("factory", [brownian_model, poisson_jump_model, jump_diffusion_model])
def test_zero_premium_gives_zero_leverage(factory):
    assert glm_optimal_leverage(factory(), 0.0, 0.3) == 0.0


def test_jump_diffusion_matches_grid_search():
    model = jump_diffusion_model(m=1.0)
    L_hat = glm_optimal_leverage(model, 0.2, 0.4)
    assert L_hat == pytest.approx(0.08 / _jd_convexity(0.4), rel=1e-12)
    assert abs(_grid_argmax(0.08, _jd_convexity(0.4)) - L_hat) <= 1e-4


def test_degenerate_convexity_raises():
    flat = LevyModel(name="flat", psi=lambda s: 0.0)
    with pytest.raises(DegenerateExponentError):
        glm_optimal_leverage(flat, 0.2, 0.4)


def test_uncompensated_exponent_rejected():
    with pytest.raises(ValueError, match="psi"):
        LevyModel(name="shifted", psi=lambda s: 1.0 + s * s)


def test_custom_risk_premium():
    model = LevyModel(name="quad-premium", psi=lambda s: 0.5 * s * s, risk_premium=lambda l, s: l * l)
    assert glm_optimal_leverage(model, 0.3, 0.3) == pytest.approx(1.0)


# ---- glm_log_utility_expansion ------------------------------------------ #


def test_expansion_all_cash_is_rate_times_t():
    value = glm_log_utility_expansion(jump_diffusion_model(), 0.2, 0.4, 0.0, t=0.01, r=0.03)
    assert value == pytest.approx(0.03 * 0.01)


def test_expansion_at_optimum_matches_growth_drift():
    lam, sigma, r, t = 0.3, 0.2, 0.02, 0.05
    value = glm_log_utility_expansion(brownian_model(), lam, sigma, lam / sigma, t=t, r=r)
    expected = log_growth_drift(MarketParams(lam=lam, sigma=sigma, r=r), lam / sigma) * t
    assert value == pytest.approx(expected, rel=1e-12)
    assert value == pytest.approx((r + lam**2 / 2) * t, rel=1e-12)


def test_expansion_is_linear_in_t():
    model = poisson_jump_model(m=2.0)
    one = glm_log_utility_expansion(model, 0.2, 0.3, 0.7, t=0.01, r=0.01)
    two = glm_log_utility_expansion(model, 0.2, 0.3, 0.7, t=0.02, r=0.01)
    assert two == pytest.approx(2 * one, rel=1e-12)


@pytest.mark.parametrize("name", ["brownian", "poisson-jump", "jump-diffusion"])
def test_expansion_maximizer_is_optimal_leverage(name):
    model = get_model(name)
    lam, sigma = 0.25, 0.35
    a = np.arange(-5.0, 5.0, 1e-4)
    values = [glm_log_utility_expansion(model, lam, sigma, float(v), t=0.01) for v in a[::10]]
    coarse = float(a[::10][int(np.argmax(values))])
    fine = np.arange(coarse - 1e-3, coarse + 1e-3, 1e-4)
    values = [glm_log_utility_expansion(model, lam, sigma, float(v), t=0.01) for v in fine]
    best = float(fine[int(np.argmax(values))])
    assert abs(best - glm_optimal_leverage(model, lam, sigma)) <= 1e-4


# ---- glm_leverage_sensitivity ------------------------------------------- #


def test_brownian_sensitivities():
    model = brownian_model()
    d_lam = glm_leverage_sensitivity(model, 0.2, 0.4, "lambda")
    d_sigma = glm_leverage_sensitivity(model, 0.2, 0.4, "sigma")
    assert d_lam.value == pytest.approx(2.5, rel=1e-8)
    assert d_sigma.value == pytest.approx(-1.25, rel=1e-8)
    assert d_lam.confident and d_sigma.confident


def test_jump_diffusion_sensitivities_match_chain_rule():
    model = jump_diffusion_model(m=1.0)
    lam, sigma = 0.2, 0.4
    conv = _jd_convexity(sigma)
    dconv = 2 * _jd_dpsi(2 * sigma) - 2 * _jd_dpsi(sigma)
    expected_lam = sigma / conv
    expected_sigma = (lam * conv - lam * sigma * dconv) / conv**2

    d_lam = glm_leverage_sensitivity(model, lam, sigma, "lambda")
    d_sigma = glm_leverage_sensitivity(model, lam, sigma, "sigma")
    assert d_lam.value == pytest.approx(expected_lam, rel=1e-7)
    assert d_sigma.value == pytest.approx(expected_sigma, rel=1e-7)
    assert d_sigma.confident


def test_sensitivity_steps_agree():
    s = glm_leverage_sensitivity(poisson_jump_model(m=0.5), 0.1, 0.3, "sigma")
    assert s.fine == pytest.approx(s.coarse, rel=1e-6)
    assert s.value == s.fine


def test_sensitivity_rejects_unknown_variable():
    with pytest.raises(ConfigurationException):
        glm_leverage_sensitivity(brownian_model(), 0.2, 0.4, "r")  # type: ignore[arg-type]


# ---- registry ------------------------------------------------------------ #


def test_builtin_models_listed():
    assert {"brownian", "poisson-jump", "jump-diffusion"} <= set(list_models())


def test_get_model_passes_parameters():
    model = get_model("jump-diffusion", m=2.0)
    assert model.name == "jump-diffusion"
    assert model.params == {"m": 2.0}


def test_unknown_model():
    with pytest.raises(ConfigurationException, match="unknown model"):
        get_model("variance-gamma")


def test_invalid_intensity():
    with pytest.raises(ConfigurationException):
        poisson_jump_model(m=0.0)


def test_register_custom_model():
    def scaled_brownian(scale: float = 2.0) -> LevyModel:
        return LevyModel(name="scaled-brownian", psi=lambda s: 0.5 * scale * s * s)

    register_model("scaled-brownian", scaled_brownian)
    assert "scaled-brownian" in list_models()
    model = get_model("scaled-brownian", scale=4.0)
    assert glm_optimal_leverage(model, 0.2, 0.4) == pytest.approx(0.5 / 4.0)
    with pytest.raises(ConfigurationException, match="already registered"):
        register_model("scaled-brownian", scaled_brownian)


def test_register_non_callable():
    with pytest.raises(ConfigurationException, match="callable"):
        register_model("broken", "nope")  # type: ignore[arg-type]
