"""Time-domain pulse propagation through a sampled susceptibility curve.

A pulse envelope is transformed to the spectral domain, each component is
multiplied by ``exp(i D chi(Delta) / 2)``, and the result is transformed
back.  Spectral convention: the envelope is decomposed on ``exp(-i delta t)``
kernels, so a positive dispersion slope produces a positive delay.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, MeasurementError
from .spectral import SusceptibilityCurve

SPEED_OF_LIGHT = 299792458.0
_EDGE_FRACTION = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """Uniform time grid: ``count`` must be a power of two."""

    start: float
    step: float
    count: int

    def __post_init__(self):
        if self.step <= 0:
            raise DomainError("step", f"must be positive, got {self.step}")
        if self.count < 2 or self.count & (self.count - 1):
            raise DomainError("count", f"must be a power of two >= 2, got {self.count}")

    @property
    def times(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)


@dataclass(frozen=True)
class TimeSeries:
    """Complex envelope samples on a uniform grid (signal Rabi units)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.count,):
            raise DomainError("values", "sample count must match the grid")
        object.__setattr__(self, "values", v)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times


def auto_grid(tau_s: float, expected_delay: float = 0.0, points_per_width: int = 16) -> GridSpec:
    """Grid that comfortably holds a Gaussian of half-width ``tau_s`` plus a delay."""
    if tau_s <= 0:
        raise DomainError("tau_s", f"must be positive, got {tau_s}")
    step = tau_s / points_per_width
    # Nine half-widths of leading margin and at least that much trailing;
    # slow medium-response tails need the room to decay below the
    # wraparound threshold.
    span = 20.0 * tau_s + 2.0 * abs(expected_delay)
    count = 1 << int(np.ceil(np.log2(span / step)))
    return GridSpec(start=-9.0 * tau_s, step=step, count=count)


def gaussian_pulse(tau_s: float, grid: GridSpec) -> TimeSeries:
    """Gaussian envelope with 1/e *intensity* half-width ``tau_s``, peak 1 at t = 0."""
    if tau_s <= 0:
        raise DomainError("tau_s", f"must be positive, got {tau_s}")
    t = grid.times
    span_after = t[-1]
    span_before = -t[0]
    if span_before < 6.0 * tau_s or span_after < 6.0 * tau_s:
        raise DomainError("grid", f"grid must span at least 6 half-widths on each side "
                                  f"of t=0 (have [{t[0]:.3g}, {t[-1]:.3g}], tau={tau_s:.3g})")
    if grid.step > tau_s / 10.0:
        raise DomainError("grid", f"step {grid.step:.3g} too coarse; need <= tau_s/10")
    env = np.exp(-t ** 2 / (2.0 * tau_s ** 2))
    return TimeSeries(grid, env)


def _padded_count(series: TimeSeries) -> int:
    mags = np.abs(series.values)
    occupied = np.flatnonzero(mags >= _EDGE_FRACTION * mags.max())
    support = (occupied[-1] - occupied[0] + 1) if occupied.size else series.grid.count
    target = max(series.grid.count, 4 * support)
    return 1 << int(np.ceil(np.log2(target)))


def propagate(pulse: TimeSeries, density: float, chi: SusceptibilityCurve,
              include_c_term: bool = False, cell_length: float = 0.01,
              carrier: float = 0.0) -> TimeSeries:
    """Propagate through optical density ``density`` with the sampled response.

    ``carrier`` offsets the pulse's spectral components onto the curve's
    detuning axis (component at envelope frequency delta sees
    ``chi(carrier + delta)``).  The free-space phase term is off by default;
    it only matters when the propagation time over ``cell_length`` is
    comparable to the timescales of interest.
    """
    if density < 0:
        raise DomainError("density", f"must be nonnegative, got {density}")
    n_pad = _padded_count(pulse)
    padded = np.zeros(n_pad, dtype=complex)
    padded[:pulse.grid.count] = pulse.values
    dt = pulse.grid.step
    delta = 2.0 * np.pi * np.fft.fftfreq(n_pad, dt)
    sample_at = carrier + delta

    spec = np.fft.ifft(padded)
    occupied = np.abs(spec) >= _EDGE_FRACTION * np.abs(spec).max()
    lo, hi = sample_at[occupied].min(), sample_at[occupied].max()
    if lo < chi.detunings[0] or hi > chi.detunings[-1]:
        raise DomainError(
            "chi", f"susceptibility curve covers [{chi.detunings[0]:.4g}, "
                   f"{chi.detunings[-1]:.4g}] rad/s but the pulse occupies "
                   f"[{lo:.4g}, {hi:.4g}] rad/s")
    chi_interp = (np.interp(sample_at, chi.detunings, chi.values.real)
                  + 1j * np.interp(sample_at, chi.detunings, chi.values.imag))
    multiplier = np.exp(0.5j * density * chi_interp)
    if include_c_term:
        multiplier = multiplier * np.exp(1j * delta * cell_length / SPEED_OF_LIGHT)
    out_full = np.fft.fft(spec * multiplier)

    peak = np.abs(out_full[:pulse.grid.count]).max()
    if peak > 0:
        # Energy that reaches the end of the padded buffer wraps to index 0,
        # so checking the retained window's edges suffices.
        edge = max(np.abs(out_full[0]), np.abs(out_full[pulse.grid.count - 1]))
        if edge > 1e-6 * peak:
            raise DomainError("grid", f"wraparound detected: edge magnitude "
                                      f"{edge / peak:.3g} of peak; enlarge the grid")
    return TimeSeries(pulse.grid, out_full[:pulse.grid.count])


@dataclass(frozen=True)
class PulseMetrics:
    """Delay, transmission and width measured between two envelopes."""

    delay: float             # seconds, intensity-peak shift
    centroid_delay: float    # seconds, intensity-centroid shift
    transmission: float      # peak-intensity ratio
    width_out: float         # seconds, 1/e intensity half-width of the output
    broadening_ratio: float  # width_out / width_in


def _peak_time(times: np.ndarray, intensity: np.ndarray):
    """Parabolic interpolation of the intensity maximum; returns (time, value)."""
    i = int(np.argmax(intensity))
    if intensity[i] <= 0:
        raise MeasurementError("flat signal: no intensity peak")
    if i == 0 or i == len(intensity) - 1:
        return times[i], intensity[i]
    a, b, c = intensity[i - 1], intensity[i], intensity[i + 1]
    denom = a - 2 * b + c
    if denom == 0:
        return times[i], b
    offset = 0.5 * (a - c) / denom
    dt = times[1] - times[0]
    return times[i] + offset * dt, b - 0.25 * (a - c) * offset


def _half_width(times: np.ndarray, intensity: np.ndarray, peak_value: float) -> float:
    """1/e-of-peak intensity half-width with linear interpolation at the crossings."""
    level = peak_value / np.e
    above = intensity >= level
    idx = np.flatnonzero(above)
    if idx.size == 0:
        raise MeasurementError("no samples above the 1/e level")
    i0, i1 = idx[0], idx[-1]

    def cross(j_out, j_in):
        y0, y1 = intensity[j_out], intensity[j_in]
        if y1 == y0:
            return times[j_in]
        frac = (level - y0) / (y1 - y0)
        return times[j_out] + frac * (times[j_in] - times[j_out])

    t_left = cross(i0 - 1, i0) if i0 > 0 else times[i0]
    t_right = cross(i1 + 1, i1) if i1 < len(times) - 1 else times[i1]
    return (t_right - t_left) / 2.0


def measure_pulse(pulse_in: TimeSeries, pulse_out: TimeSeries) -> PulseMetrics:
    """Compare output to input: peak delay, transmission, width, broadening."""
    if pulse_in.grid != pulse_out.grid:
        raise DomainError("grid", "input and output must share one grid")
    t = pulse_in.times
    i_in = np.abs(pulse_in.values) ** 2
    i_out = np.abs(pulse_out.values) ** 2
    t_in, p_in = _peak_time(t, i_in)
    t_out, p_out = _peak_time(t, i_out)
    c_in = float(np.sum(t * i_in) / np.sum(i_in))
    c_out = float(np.sum(t * i_out) / np.sum(i_out))
    width_in = _half_width(t, i_in, p_in)
    width_out = _half_width(t, i_out, p_out)
    return PulseMetrics(
        delay=float(t_out - t_in),
        centroid_delay=c_out - c_in,
        transmission=float(p_out / p_in),
        width_out=float(width_out),
        broadening_ratio=float(width_out / width_in),
    )
