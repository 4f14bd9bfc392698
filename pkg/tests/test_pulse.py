"""Spectral-domain pulse propagation and envelope measurement."""

import numpy as np
import pytest

from eitsim import (DomainError, GridSpec, MeasurementError, SusceptibilityCurve,
                    TimeSeries, auto_grid, gaussian_pulse, measure_pulse,
                    propagate)


def flat_curve(span, value=0.0 + 0.0j, points=2049):
    d = np.linspace(-span, span, points)
    return SusceptibilityCurve(d, np.full(points, value, dtype=complex))


def linear_curve(span, slope, points=4097):
    d = np.linspace(-span, span, points)
    return SusceptibilityCurve(d, slope * d + 0j)


def quadratic_curve(span, phase, slope, absorption, width, points=8193):
    d = np.linspace(-span, span, points)
    vals = phase + slope * d + 1j * (absorption + (d / width) ** 2)
    return SusceptibilityCurve(d, vals)


def test_grid_validation():
    with pytest.raises(DomainError):
        GridSpec(start=0.0, step=-1.0, count=8)
    with pytest.raises(DomainError):
        GridSpec(start=0.0, step=1.0, count=12)  # not a power of two
    grid = GridSpec(start=-1.0, step=0.25, count=8)
    assert grid.times[0] == -1.0 and len(grid.times) == 8


def test_auto_grid_holds_the_pulse_and_delay():
    tau = 1e-6
    grid = auto_grid(tau, expected_delay=5e-6)
    t = grid.times
    assert t[0] <= -6 * tau and t[-1] >= 6 * tau + 5e-6
    assert grid.count & (grid.count - 1) == 0


def test_gaussian_pulse_width_convention():
    tau = 1e-6
    pulse = gaussian_pulse(tau, auto_grid(tau))
    intensity = np.abs(pulse.values) ** 2
    # 1/e intensity points sit at +-tau.
    i = np.argmin(np.abs(pulse.times - tau))
    assert intensity[i] == pytest.approx(np.exp(-1.0), rel=1e-3)


def test_gaussian_pulse_grid_too_coarse():
    with pytest.raises(DomainError):
        gaussian_pulse(1e-6, GridSpec(start=-8e-6, step=0.5e-6, count=32))


def test_zero_density_is_the_identity():
    tau = 1e-6
    pulse = gaussian_pulse(tau, auto_grid(tau))
    out = propagate(pulse, 0.0, flat_curve(3e7))
    assert np.abs(out.values - pulse.values).max() <= 1e-12


def test_negative_density_rejected():
    pulse = gaussian_pulse(1e-6, auto_grid(1e-6))
    with pytest.raises(DomainError):
        propagate(pulse, -1.0, flat_curve(3e7))


def test_narrow_curve_coverage_rejected():
    pulse = gaussian_pulse(1e-6, auto_grid(1e-6))
    with pytest.raises(DomainError):
        propagate(pulse, 1.0, flat_curve(1e5))


def test_pure_dispersion_slope_delays_without_distortion():
    tau, slope, density = 1e-6, 8e-9, 50.0
    pulse = gaussian_pulse(tau, auto_grid(tau, expected_delay=slope * density / 2))
    out = propagate(pulse, density, linear_curve(4e7, slope))
    metrics = measure_pulse(pulse, out)
    expected = slope * density / 2.0
    assert metrics.delay == pytest.approx(expected, rel=1e-3)
    assert metrics.centroid_delay == pytest.approx(expected, rel=1e-3)
    assert metrics.transmission == pytest.approx(1.0, abs=1e-5)
    assert metrics.broadening_ratio == pytest.approx(1.0, abs=1e-3)


def test_uniform_absorption_only_attenuates():
    tau = 1e-6
    pulse = gaussian_pulse(tau, auto_grid(tau))
    out = propagate(pulse, 10.0, flat_curve(3e7, value=1j * 0.05))
    metrics = measure_pulse(pulse, out)
    assert metrics.transmission == pytest.approx(np.exp(-0.5), rel=1e-9)
    assert abs(metrics.delay) <= pulse.grid.step


def test_propagation_is_linear_in_the_envelope():
    tau = 1e-6
    grid = auto_grid(tau)
    pulse = gaussian_pulse(tau, grid)
    scaled = TimeSeries(grid, 3.0 * pulse.values)
    curve = quadratic_curve(4e7, 0.01, 5e-9, 1e-4, 2e6 * 2 * np.pi)
    out1 = propagate(pulse, 30.0, curve)
    out3 = propagate(scaled, 30.0, curve)
    assert np.abs(out3.values - 3.0 * out1.values).max() <= 1e-9


def test_parabolic_window_matches_closed_form_figures():
    phase, slope = 0.02, 13e-9
    absorption, width = 4e-5, 2 * np.pi * 2.3e6
    density = 100.0
    beta = width / np.sqrt(density)
    tau = 10.0 / beta
    pulse = gaussian_pulse(tau, auto_grid(tau, expected_delay=slope * density / 2))
    curve = quadratic_curve(10.0 / tau, phase, slope, absorption, width)
    out = propagate(pulse, density, curve)
    metrics = measure_pulse(pulse, out)
    assert metrics.delay == pytest.approx(slope * density / 2.0, rel=0.02)
    assert metrics.transmission == pytest.approx(np.exp(-absorption * density),
                                                 rel=0.02)
    expected_width = np.sqrt(tau ** 2 + density / width ** 2)
    assert metrics.width_out == pytest.approx(expected_width, rel=0.02)


def test_measure_requires_matching_grids():
    p1 = gaussian_pulse(1e-6, auto_grid(1e-6))
    p2 = gaussian_pulse(2e-6, auto_grid(2e-6))
    with pytest.raises(DomainError):
        measure_pulse(p1, p2)


def test_measure_rejects_flat_signal():
    grid = auto_grid(1e-6)
    zero = TimeSeries(grid, np.zeros(grid.count, dtype=complex))
    with pytest.raises(MeasurementError):
        measure_pulse(zero, zero)


def test_carrier_offset_samples_the_curve_off_center():
    tau = 1e-6
    pulse = gaussian_pulse(tau, auto_grid(tau))
    # Absorption grows linearly with detuning: shifting the carrier changes
    # the mean attenuation accordingly.
    d = np.linspace(-4e7, 4e7, 4097)
    curve = SusceptibilityCurve(d, 1j * (0.01 + 1e-10 * d))
    centered = propagate(pulse, 10.0, curve, carrier=0.0)
    offset = propagate(pulse, 10.0, curve, carrier=1e7)
    t_peak = np.argmax(np.abs(offset.values))
    ratio = np.abs(offset.values[t_peak]) / np.abs(centered.values).max()
    assert ratio == pytest.approx(np.exp(-0.5 * 10.0 * 1e-10 * 1e7), rel=1e-3)
