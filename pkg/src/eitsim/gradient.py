"""Magnetic-field-gradient corrections and channelization performance.

Atoms diffusing across a field gradient sample a range of two-photon
resonances.  That is modeled by a Gaussian average of the steady-state
coherences over a field width set by the local curvature of the response,
applied per velocity class before Doppler averaging.
"""

from dataclasses import dataclass, field, replace
import warnings

import numpy as np
from scipy.special import wofz

from .constants import RB87, LevelScheme, PhysicalConstants
from .core import (FieldConfig, chi_single_velocity, coherences,
                   evolution_matrices, source_vector)
from .environment import Environment, derive_environment
from .errors import DerivativeError, DomainError
from .spectral import (QuadratureSettings, ResonanceParams, SearchSettings,
                       analytic_estimates, characterize_resonance,
                       doppler_averaged_chi, narrow_feature_scale,
                       width_estimate)

# Coherence readout component that dominates the susceptibility.
_READOUT = 1


@dataclass(frozen=True)
class GradientSettings:
    """Numerical controls for the field-gradient pipeline."""

    b_step: float = 0.0    # gauss; 0 = auto from the estimated window width
    derivative_rel_tol: float = 0.01
    max_step_halvings: int = 6


def _auto_b_step(scheme, env, fields, consts):
    w_est = width_estimate(scheme, env, fields, consts)
    step = (w_est / scheme.two_photon_slope(consts)) / 50.0
    return float(np.clip(step, 1e-4, 1.0))


def second_derivative(fn, x0: float, step: float, rel_tol: float = 0.01,
                      max_halvings: int = 6):
    """Richardson-refined central second difference of a vector-valued ``fn``.

    The step is halved until the plain and half-step estimates agree to
    ``rel_tol`` (checked on the components that carry weight); exact for
    quadratics at any step.
    """
    if not step > 0:
        raise DomainError("step", f"must be positive, got {step}")
    center = np.asarray(fn(x0))
    for _ in range(max_halvings + 1):
        d_h = (np.asarray(fn(x0 + step)) - 2 * center + np.asarray(fn(x0 - step))) / step ** 2
        half = step / 2
        d_h2 = (np.asarray(fn(x0 + half)) - 2 * center + np.asarray(fn(x0 - half))) / half ** 2
        scale = np.max(np.abs(d_h2))
        if scale == 0:
            return d_h2
        mask = np.abs(d_h2) >= 1e-6 * scale
        err = np.max(np.abs(d_h - d_h2)[mask] / np.abs(d_h2)[mask])
        if err <= rel_tol:
            return (4 * d_h2 - d_h) / 3.0
        step = half
    raise DerivativeError(
        f"second derivative not stable after {max_halvings} halvings "
        f"(residual disagreement {err:.3g}, final step {step:.3g})")


def rho_d2_db(scheme: LevelScheme, env: Environment, fields: FieldConfig,
              delta_s_bar, delta_d, step: float = None,
              settings: GradientSettings = None,
              consts: PhysicalConstants = RB87) -> np.ndarray:
    """Second derivative of the steady-state coherences w.r.t. the magnetic field."""
    settings = settings or GradientSettings()
    step = step or settings.b_step or _auto_b_step(scheme, env, fields, consts)

    def rho_at(b):
        return coherences(scheme, env, fields, delta_s_bar, delta_d,
                          b_field=b, consts=consts)

    return second_derivative(rho_at, fields.b_field, step,
                             settings.derivative_rel_tol, settings.max_step_halvings)


def perturbative_correction(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                            delta_s_bar, delta_d, s_b: float,
                            step: float = None, settings: GradientSettings = None,
                            consts: PhysicalConstants = RB87) -> np.ndarray:
    """First-order diffusion correction -S_B^2 (D_g/3) M^-1 d2rho/dB^2.

    Steady state of the evolution equation with the diffusion term
    (D_g S_B^2 / 3) d2rho/dB^2 added to the source.  A small-gradient
    cross-check only; the production pipeline uses the regularized field
    average below.
    """
    if s_b < 0:
        raise DomainError("s_b", f"gradient must be nonnegative, got {s_b}")
    if s_b == 0:
        shape = np.broadcast(np.asarray(delta_s_bar), np.asarray(delta_d)).shape
        return np.zeros(shape + (3,), dtype=complex)
    d2 = rho_d2_db(scheme, env, fields, delta_s_bar, delta_d, step, settings, consts)
    m = evolution_matrices(scheme, env, fields, delta_s_bar, delta_d, consts=consts)
    return -s_b ** 2 * (env.diffusion_const / 3.0) * np.linalg.solve(m, d2[..., None])[..., 0]


def _pole_decomposition(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                        delta_s_bar, delta_d, consts: PhysicalConstants = RB87):
    """Resolvent form of the steady state as a function of the magnetic field.

    The evolution matrix is exactly linear in the field, M(B) = M0 + x*M1
    with x = B - B_z and M1 diagonal (Zeeman slopes), so
    rho(x) = -(x*I - P)^-1 q with P = -M1^-1 M0 and q = M1^-1 S.
    Returns the eigenvalues of P (pole locations in gauss), its eigenvector
    matrices, and the expansion coefficients of q in the eigenbasis.
    """
    b0 = fields.b_field
    m0 = evolution_matrices(scheme, env, fields, delta_s_bar, delta_d,
                            b_field=b0, consts=consts)
    m1 = evolution_matrices(scheme, env, fields, delta_s_bar, delta_d,
                            b_field=b0 + 1.0, consts=consts) - m0
    src = np.broadcast_to(source_vector(scheme, fields.signal_rabi),
                          m0.shape[:-1])
    q = np.linalg.solve(m1, src[..., None])[..., 0]
    p = -np.linalg.solve(m1, m0)
    lam, vecs = np.linalg.eig(p)
    coeff = np.linalg.solve(vecs, q[..., None])[..., 0]
    return lam, vecs, coeff


def _exact_d2_db(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                 delta_s_bar, delta_d, consts: PhysicalConstants = RB87) -> np.ndarray:
    """Closed-form d^2 rho / dB^2 from the resolvent: 2 P^-3 q."""
    lam, vecs, coeff = _pole_decomposition(scheme, env, fields, delta_s_bar,
                                           delta_d, consts)
    return 2.0 * np.einsum("...jk,...k->...j", vecs, coeff / lam ** 3)


def averaging_width(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                    delta_s_bar, delta_d, s_b: float, step: float = None,
                    settings: GradientSettings = None,
                    consts: PhysicalConstants = RB87) -> np.ndarray:
    """Gaussian field-averaging width Delta_B (gauss) for each velocity class.

    The width satisfies Delta_B^2 = (4 D_g S_B^2 / 3) |R| with R the scalar
    reduction of the ratio of M^-1 (d^2 rho / dB^2) to d^2 rho / dB^2,
    evaluated on the susceptibility readout component; R has units of time,
    so the product with D_g S_B^2 carries gauss^2.  Falls back to a norm
    ratio where the readout component loses significance.  (``step`` and
    ``settings`` are accepted for interface symmetry with the
    finite-difference path but the derivative here is closed-form.)
    """
    if s_b < 0:
        raise DomainError("s_b", f"gradient must be nonnegative, got {s_b}")
    shape = np.broadcast(np.asarray(delta_s_bar), np.asarray(delta_d)).shape
    if s_b == 0:
        return np.zeros(shape)
    d2 = _exact_d2_db(scheme, env, fields, delta_s_bar, delta_d, consts)
    m = evolution_matrices(scheme, env, fields, delta_s_bar, delta_d, consts=consts)
    numer = np.linalg.solve(m, d2[..., None])[..., 0]
    denom = d2

    flat_n = numer.reshape(-1, 3)
    flat_d = denom.reshape(-1, 3)
    norms = np.linalg.norm(flat_d, axis=-1)
    readout_ok = np.abs(flat_d[:, _READOUT]) >= 1e-12 * np.maximum(norms, 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_ro = np.abs(flat_n[:, _READOUT] / flat_d[:, _READOUT])
        ratio_norm = np.linalg.norm(flat_n, axis=-1) / np.maximum(norms, 1e-300)
    ratio = np.where(readout_ok, np.where(np.isfinite(ratio_ro), ratio_ro, 0.0),
                     ratio_norm)
    ratio = np.where(norms > 0, ratio, 0.0)
    width2 = (4.0 * env.diffusion_const * s_b ** 2 / 3.0) * ratio
    return np.sqrt(width2).reshape(shape)


def _gaussian_pole_average(lam: np.ndarray, widths: np.ndarray) -> np.ndarray:
    """Average of 1/(x - lam) over x ~ exp(-x^2/width^2)/(sqrt(pi) width).

    Evaluates the plasma dispersion integral via the Faddeeva function on
    whichever half-plane the pole sits in; the zero-width limit returns
    -1/lam (no averaging).
    """
    w = np.broadcast_to(np.asarray(widths)[..., None], lam.shape)
    safe_w = np.where(w > 0, w, 1.0)
    zeta = lam / safe_w
    upper = zeta.imag >= 0
    # w(-zeta) is evaluated where the pole lies below the real axis, keeping
    # the Faddeeva argument in the upper half-plane (no overflow).
    wz = wofz(np.where(upper, zeta, -zeta))
    z_int = np.where(upper, 1j, -1j) * np.sqrt(np.pi) * wz
    with np.errstate(divide="ignore", invalid="ignore"):
        averaged = z_int / safe_w
        bare = -1.0 / lam
    return np.where(w > 0, averaged, bare)


def diffusion_averaged_rho(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                           delta_s_bar, delta_d, s_b: float,
                           step: float = None, settings: GradientSettings = None,
                           consts: PhysicalConstants = RB87) -> np.ndarray:
    """Coherences averaged over the local field range sampled by diffusion.

    Gaussian average of the zero-gradient steady state over ``B_z + delta_B``
    with the per-class width from :func:`averaging_width`.  Because the
    steady state is a rational function of the field, the average is taken
    in closed form on the resolvent poles (exact for any width, unlike a
    fixed quadrature, which cannot resolve velocity classes whose field
    response is far narrower than their averaging width).  Reduces to the
    plain steady state as the width goes to zero and to the no-pump
    background when the window is fully averaged out.
    """
    settings = settings or GradientSettings()
    if s_b == 0:
        return coherences(scheme, env, fields, delta_s_bar, delta_d, consts=consts)
    # The width reflects how far the atom diffuses during its coherence
    # time, a property of the operating point rather than of the probe
    # detuning, so it is evaluated once per velocity class at the
    # two-photon resonance.  (Evaluating it per probe detuning would let
    # the wings of the window average less than its center, distorting the
    # averaged line shape.)
    delta_ref = fields.pump_detuning + scheme.two_photon_slope(consts) * fields.b_field
    widths = averaging_width(scheme, env, fields, delta_ref, delta_d, s_b,
                             step, settings, consts)
    lam, vecs, coeff = _pole_decomposition(scheme, env, fields, delta_s_bar,
                                           delta_d, consts)
    avg = _gaussian_pole_average(lam, widths)
    return -np.einsum("...jk,...k->...j", vecs, avg * coeff)


def gradient_chi_fn(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                    s_b: float, settings: GradientSettings = None,
                    quadrature: QuadratureSettings = None,
                    consts: PhysicalConstants = RB87):
    """Doppler-averaged susceptibility function with the gradient correction."""
    settings = settings or GradientSettings()

    def per_velocity(delta_col, dd_row):
        rho = diffusion_averaged_rho(scheme, env, fields, delta_col, dd_row,
                                     s_b, settings=settings, consts=consts)
        return chi_single_velocity(rho, scheme, fields.signal_rabi, consts)

    def chi_fn(delta_array):
        return np.atleast_1d(doppler_averaged_chi(
            scheme, env, fields, np.asarray(delta_array, dtype=float),
            quadrature, per_velocity_chi=per_velocity, consts=consts))

    return chi_fn


def _washed_feature_search(scheme: LevelScheme, env: Environment,
                           fields: FieldConfig, s_b: float,
                           search: SearchSettings,
                           consts: PhysicalConstants) -> SearchSettings:
    """Search settings whose derivative step clears the washed sub-feature.

    The field average smears the sharp Doppler-free structure at the window
    center into a bump of scale ``s_res * delta_B`` (evaluated for the
    Doppler-detuned classes that dominate it); slope and curvature of the
    averaged curve describe the window envelope only when the difference
    step stays above that bump.  Explicit ``fd_step`` settings win, and a
    zero gradient falls through to the homogeneous step choice.
    """
    search = search or SearchSettings()
    if s_b == 0 or search.fd_step:
        return search
    s_res = scheme.two_photon_slope(consts)
    delta_ref = fields.pump_detuning + s_res * fields.b_field
    wash = s_res * float(averaging_width(scheme, env, fields, delta_ref,
                                         env.doppler_width, s_b, consts=consts))
    narrow = narrow_feature_scale(scheme, env, fields, consts)
    step = max(width_estimate(scheme, env, fields, consts) / 50.0,
               2.0 * (narrow + wash))
    return replace(search, fd_step=step)


def gradient_resonance(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                       s_b: float, search: SearchSettings = None,
                       settings: GradientSettings = None,
                       consts: PhysicalConstants = RB87) -> ResonanceParams:
    """Window parameters of the local (x = 0) gradient-corrected response."""
    if s_b < 0:
        raise DomainError("s_b", f"gradient must be nonnegative, got {s_b}")
    fields = replace(fields, gradient=s_b)
    search = _washed_feature_search(scheme, env, fields, s_b, search, consts)
    chi_fn = gradient_chi_fn(scheme, env, fields, s_b, settings,
                             search.quadrature, consts)
    return characterize_resonance(scheme, env, fields, search, chi_fn=chi_fn,
                                  consts=consts)


@dataclass(frozen=True)
class ChannelPerformance:
    """Channelized delay-device figures for one gradient setting."""

    bandwidth: float          # rad/s, s_res * S_B * w_int
    max_mismatch: float       # rad/s, largest local detuning at the cell edge
    effective_slope: float    # seconds
    max_density: float        # optical density giving 1/e transmission
    max_delay: float          # seconds
    delay_bandwidth: float    # dimensionless
    dispersion_slope_setting: float = 0.0  # rad/s per m, transverse dispersion used
    resonance: ResonanceParams = None
    diagnostics: dict = field(default_factory=dict)


def _linear_region_bound(chi_fn, res: ResonanceParams) -> float:
    """Largest offset from the window center over which the dispersion stays linear.

    Scans the real part on both sides and keeps the secant slope within a
    factor two of the central slope.
    """
    w = res.curvature_width
    offsets = np.linspace(0.125, 2.0, 16) * w
    grid = np.concatenate([res.center - offsets[::-1], [res.center], res.center + offsets])
    chi = np.asarray(chi_fn(grid))
    center_val = chi[len(offsets)].real
    bound = 2.0 * w
    for off in offsets:
        hi = np.interp(res.center + off, grid, chi.real)
        lo = np.interp(res.center - off, grid, chi.real)
        secant = (hi - lo) / (2 * off)
        if not (0.5 * res.dispersion_slope <= secant <= 2.0 * res.dispersion_slope + 1e-300):
            bound = off
            break
    return float(bound)


def channel_performance(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                        s_b: float, search: SearchSettings = None,
                        settings: GradientSettings = None,
                        consts: PhysicalConstants = RB87) -> ChannelPerformance:
    """Full channelization pipeline for one gradient value.

    Characterizes the gradient-corrected window, then picks the maximum
    optical density for 1/e transmission, the largest resonance mismatch
    compatible with both absorption and dispersion linearity, and the
    dispersion slope that realizes it.
    """
    fields = replace(fields, gradient=s_b)
    s_res = scheme.two_photon_slope(consts)
    bandwidth = s_res * s_b * env.interaction_width

    search = _washed_feature_search(scheme, env, fields, s_b, search, consts)
    chi_fn = gradient_chi_fn(scheme, env, fields, s_b, settings,
                             search.quadrature, consts)
    res = characterize_resonance(scheme, env, fields, search, chi_fn=chi_fn,
                                 consts=consts)
    a = res.min_absorption
    if a <= 0:
        est = analytic_estimates(scheme, env, fields, consts)
        floor = est["min_absorption"] + est["gradient_absorption"] + est["offres_absorption"]
        warnings.warn(f"numerical minimum absorption {a:.3g} <= 0; "
                      f"clamping to analytic floor {floor:.3g}")
        a = floor
    d_max = 1.0 / (2.0 * a)
    absorption_bound = res.curvature_width / np.sqrt(2.0 * d_max)
    linear_bound = _linear_region_bound(chi_fn, res)
    mismatch = min(absorption_bound, linear_bound)

    if s_b > 0:
        disp_slope = s_b * s_res + 2.0 * mismatch / env.interaction_width
        eff_slope = ((disp_slope - s_b * s_res) / disp_slope) * res.dispersion_slope
    else:
        disp_slope = 2.0 * mismatch / env.interaction_width
        eff_slope = res.dispersion_slope
    max_delay = eff_slope * d_max / 2.0
    dbw = max_delay * bandwidth

    closed_eff = res.dispersion_slope * np.sqrt(2 * a) * res.curvature_width / bandwidth \
        if bandwidth > 0 else np.inf
    diagnostics = {
        "absorption_bound_rad_s": float(absorption_bound),
        "linear_region_bound_rad_s": float(linear_bound),
        "closed_form_effective_slope_s": float(closed_eff),
        "closed_form_delay_bandwidth": float(
            res.curvature_width * res.dispersion_slope / np.sqrt(2 * a)),
    }
    return ChannelPerformance(
        bandwidth=float(bandwidth),
        max_mismatch=float(mismatch),
        effective_slope=float(eff_slope),
        max_density=float(d_max),
        max_delay=float(max_delay),
        delay_bandwidth=float(dbw),
        dispersion_slope_setting=float(disp_slope),
        resonance=res,
        diagnostics=diagnostics,
    )


def pressure_scan(scheme: LevelScheme, base_env: Environment, fields: FieldConfig,
                  s_b: float, pressures, search: SearchSettings = None,
                  settings: GradientSettings = None,
                  consts: PhysicalConstants = RB87):
    """Channel performance at each pressure; returns (rows, best_pressure).

    Rows are ``(pressure, ChannelPerformance | None, error_message | None)``;
    a failing point is recorded and the scan continues.
    """
    pressures = [float(p) for p in pressures]
    if not pressures:
        raise DomainError("pressures", "pressure list must be nonempty")
    if any(p <= 0 for p in pressures):
        raise DomainError("pressures", "all pressures must be positive")
    rows = []
    for p in pressures:
        env = derive_environment(base_env.temperature, p, base_env.density,
                                 base_env.cell_length, base_env.interaction_width,
                                 base_env.interaction_height, consts)
        try:
            perf = channel_performance(scheme, env, fields, s_b, search, settings, consts)
            rows.append((p, perf, None))
        except Exception as exc:  # noqa: BLE001 - per-point robustness
            rows.append((p, None, f"{type(exc).__name__}: {exc}"))
    best = None
    best_dbw = -np.inf
    for p, perf, err in rows:
        if perf is not None and perf.delay_bandwidth > best_dbw:
            best, best_dbw = p, perf.delay_bandwidth
    return rows, best
