"""Field-gradient averaging: derivatives, widths, averaged response, channels."""

import numpy as np
import pytest

from eitsim import (RB87, SCHEME_A, SCHEME_B, DerivativeError, DomainError,
                    FieldConfig, averaging_width, channel_performance,
                    characterize_resonance, coherences, diffusion_averaged_rho,
                    gradient_resonance, perturbative_correction, pressure_scan,
                    rho_d2_db, second_derivative)
from eitsim.constants import TWO_PI
from eitsim.gradient import _exact_d2_db

from conftest import wide_env, wide_pump

S_B = 2.0e3  # gauss / m


def test_second_derivative_exact_on_quadratics():
    a = np.array([1.0 + 2j, -0.5, 3.0])
    b = np.array([0.1, -2.0 + 1j, 0.0])
    c = np.array([4.0, 0.25j, -1.5])

    def stub(x):
        return a + b * x + c * x ** 2

    result = second_derivative(stub, x0=0.37, step=0.05)
    assert np.abs(result - 2.0 * c).max() <= 1e-8


def test_second_derivative_rejects_bad_step():
    with pytest.raises(DomainError):
        second_derivative(lambda x: np.array([x ** 2]), 0.0, 0.0)


def test_second_derivative_fails_on_a_kink():
    with pytest.raises(DerivativeError):
        second_derivative(lambda x: np.array([abs(x)]), 0.0, 1.0)


def test_finite_difference_matches_closed_form_curvature():
    env = wide_env(25.0)
    for scheme in (SCHEME_A, SCHEME_B):
        fields = wide_pump(scheme)
        for delta, dd in [(0.0, 0.0), (TWO_PI * 0.5e6, TWO_PI * 1e8)]:
            fd = rho_d2_db(scheme, env, fields, delta, dd)
            exact = _exact_d2_db(scheme, env, fields, delta, dd)
            assert np.abs(fd - exact).max() <= 1e-3 * np.abs(exact).max()


def test_averaging_width_vanishes_without_gradient():
    env = wide_env(25.0)
    w = averaging_width(SCHEME_B, env, wide_pump(SCHEME_B), 0.0, 0.0, 0.0)
    assert w == 0.0


def test_averaging_width_linear_in_gradient():
    env = wide_env(25.0)
    fields = wide_pump(SCHEME_B)
    w1 = averaging_width(SCHEME_B, env, fields, 0.0, TWO_PI * 5e7, S_B)
    w2 = averaging_width(SCHEME_B, env, fields, 0.0, TWO_PI * 5e7, 2.0 * S_B)
    assert w2 / w1 == pytest.approx(2.0, abs=1e-3)


def test_averaging_width_rejects_negative_gradient():
    env = wide_env(25.0)
    with pytest.raises(DomainError):
        averaging_width(SCHEME_B, env, wide_pump(SCHEME_B), 0.0, 0.0, -1.0)


def test_averaged_state_continuous_at_zero_gradient():
    env = wide_env(25.0)
    fields = wide_pump(SCHEME_B)
    delta, dd = TWO_PI * 0.2e6, TWO_PI * 3e7
    plain = diffusion_averaged_rho(SCHEME_B, env, fields, delta, dd, 0.0)
    tiny = diffusion_averaged_rho(SCHEME_B, env, fields, delta, dd, 1e-6)
    assert np.abs(tiny - plain).max() <= 1e-8 * np.abs(plain).max()


def test_averaged_state_matches_brute_force_quadrature():
    env = wide_env(25.0)
    for scheme in (SCHEME_A, SCHEME_B):
        fields = wide_pump(scheme)
        delta, dd = TWO_PI * 0.1e6, TWO_PI * 2e7
        closed = diffusion_averaged_rho(scheme, env, fields, delta, dd, S_B)
        delta_ref = fields.pump_detuning + scheme.two_photon_slope(RB87) * fields.b_field
        width = float(averaging_width(scheme, env, fields, delta_ref, dd, S_B))
        x = np.linspace(-8.0 * width, 8.0 * width, 8001)
        weights = np.exp(-(x / width) ** 2)
        samples = coherences(scheme, env, fields, delta, dd,
                             b_field=fields.b_field + x)
        brute = (weights[:, None] * samples).sum(axis=0) / weights.sum()
        assert np.abs(closed - brute).max() <= 1e-6 * np.abs(brute).max()


def test_perturbative_correction_agrees_for_small_gradients():
    env = wide_env(25.0)
    fields = wide_pump(SCHEME_B)
    delta, dd = 0.0, 0.0
    small = 50.0  # gauss / m
    plain = diffusion_averaged_rho(SCHEME_B, env, fields, delta, dd, 0.0)
    averaged = diffusion_averaged_rho(SCHEME_B, env, fields, delta, dd, small)
    correction = perturbative_correction(SCHEME_B, env, fields, delta, dd, small)
    assert np.abs(correction).max() <= 0.05 * np.abs(plain).max()  # regime check
    got = (averaged - plain)[..., 1]
    want = correction[..., 1]
    assert abs(got - want) <= 0.2 * abs(want)


def test_perturbative_correction_scales_with_gradient_squared():
    env = wide_env(25.0)
    fields = wide_pump(SCHEME_B)
    one = perturbative_correction(SCHEME_B, env, fields, 0.0, 0.0, 25.0)
    four = perturbative_correction(SCHEME_B, env, fields, 0.0, 0.0, 50.0)
    live = np.abs(one) > 0
    assert np.abs(four[live] / one[live] - 4.0).max() <= 1e-6


def test_perturbative_correction_zero_gradient_shape():
    env = wide_env(25.0)
    out = perturbative_correction(SCHEME_B, env, wide_pump(SCHEME_B),
                                  np.zeros(4), 0.0, 0.0)
    assert out.shape == (4, 3) and not out.any()


def test_gradient_resonance_rejects_negative_gradient():
    env = wide_env(25.0)
    with pytest.raises(DomainError):
        gradient_resonance(SCHEME_B, env, wide_pump(SCHEME_B), -1.0)


def test_zero_gradient_pipeline_matches_homogeneous_path():
    env = wide_env(25.0)
    fields = wide_pump(SCHEME_B)
    hom = characterize_resonance(SCHEME_B, env, fields)
    grad = gradient_resonance(SCHEME_B, env, fields, 0.0)
    assert grad.min_absorption == pytest.approx(hom.min_absorption, rel=1e-3)
    assert grad.dispersion_slope == pytest.approx(hom.dispersion_slope, rel=1e-3)
    assert grad.curvature_width == pytest.approx(hom.curvature_width, rel=1e-3)


def test_channel_figures_are_self_consistent():
    env = wide_env(25.0)
    perf = channel_performance(SCHEME_B, env, wide_pump(SCHEME_B), S_B)
    s_res = SCHEME_B.two_photon_slope(RB87)
    assert perf.bandwidth == pytest.approx(s_res * S_B * env.interaction_width,
                                           rel=1e-12)
    assert perf.delay_bandwidth == pytest.approx(perf.max_delay * perf.bandwidth,
                                                 rel=1e-12)
    assert perf.max_density == pytest.approx(
        0.5 / perf.resonance.min_absorption, rel=1e-12)
    assert 0 < perf.effective_slope < perf.resonance.dispersion_slope
    bounds = perf.diagnostics
    assert perf.max_mismatch <= bounds["absorption_bound_rad_s"] * (1 + 1e-12)
    assert perf.max_mismatch <= bounds["linear_region_bound_rad_s"] * (1 + 1e-12)


def test_pressure_scan_input_validation():
    env = wide_env(25.0)
    fields = wide_pump(SCHEME_B)
    with pytest.raises(DomainError):
        pressure_scan(SCHEME_B, env, fields, S_B, [])
    with pytest.raises(DomainError):
        pressure_scan(SCHEME_B, env, fields, S_B, [10.0, -1.0])
