"""Doppler-averaged susceptibility, transparency-window characterization,
analytic estimates, and the closed-form delay/loss/bandwidth figures.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import roots_hermite

from .constants import RB87, TWO_PI, LevelScheme, PhysicalConstants
from .core import FieldConfig, chi_single_velocity, coherences, shifted_detunings
from .environment import Environment
from .errors import DomainError, QuadratureError, ResonanceError


@dataclass(frozen=True)
class QuadratureSettings:
    """Gaussian-weight quadrature controls for velocity / field averaging.

    ``nodes = 0`` picks the node count automatically from the ratio of the
    Gaussian width to the narrowest Lorentzian scale in the integrand.
    The uniform trapezoid rule is the default: on a Gaussian-weighted
    infinite interval it converges geometrically with rate set by the
    distance of the integrand's poles from the real axis, which stays
    accurate even when the homogeneous linewidth is far narrower than the
    Doppler width (where Gauss-Hermite stalls).
    """

    nodes: int = 0
    span: float = 6.0          # half-width of the node window, in Gaussian widths
    rel_tol: float = 1e-3
    max_nodes: int = 16385
    min_nodes: int = 65
    method: str = "trapezoid"  # or "hermite"


DEFAULT_QUADRATURE = QuadratureSettings()


def _gaussian_nodes(width: float, narrow_scale: float,
                    settings: QuadratureSettings):
    """Nodes and normalized weights for averaging over exp(-x^2/width^2)."""
    if settings.nodes:
        n = settings.nodes
    else:
        # Resolve the narrowest Lorentzian with ~4 nodes per half-width.
        spacing = max(narrow_scale, 1e-12) / 4.0
        n = 2 * int(np.ceil(settings.span * width / spacing)) + 1
        n = int(np.clip(n, settings.min_nodes, settings.max_nodes))
    return _nodes_for_count(width, n, settings)


def _nodes_for_count(width: float, n: int, settings: QuadratureSettings):
    if settings.method == "hermite":
        x, w = roots_hermite(n)
        return width * x, w / np.sqrt(np.pi)
    x = np.linspace(-settings.span * width, settings.span * width, n)
    w = np.exp(-(x / width) ** 2)
    return x, w / w.sum()


def _refined_count(n: int, settings: QuadratureSettings) -> int:
    return 2 * n if settings.method == "hermite" else 2 * n - 1


def doppler_averaged_chi(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                         delta_s_bar, settings: QuadratureSettings = None,
                         per_velocity_chi=None, consts: PhysicalConstants = RB87):
    """Thermal average of the single-velocity susceptibility.

    ``delta_s_bar`` may be a scalar or 1-D array.  ``per_velocity_chi``,
    when given, is called as ``fn(delta_s_bar_col, delta_d_row)`` with
    broadcastable arrays and must return the susceptibility on that grid;
    it is how the gradient pipeline injects its field-averaged response.
    Convergence is verified by refining the node count; failure to settle
    within the node budget raises :class:`QuadratureError` carrying both
    estimates.
    """
    settings = settings or DEFAULT_QUADRATURE
    if settings.nodes and settings.nodes < 16:
        raise DomainError("nodes", f"need at least 16 quadrature nodes, got {settings.nodes}")
    delta = np.atleast_1d(np.asarray(delta_s_bar, dtype=float))

    if per_velocity_chi is None:
        def per_velocity_chi(d, dd):
            rho = coherences(scheme, env, fields, d, dd, consts=consts)
            return chi_single_velocity(rho, scheme, fields.signal_rabi, consts)

    def evaluate(n):
        nodes, weights = _nodes_for_count(env.doppler_width, n, settings)
        vals = per_velocity_chi(delta[:, None], nodes[None, :])
        return vals @ weights

    nodes0, _ = _gaussian_nodes(env.doppler_width, env.optical_dephasing, settings)
    n = len(nodes0)
    coarse = evaluate(n)
    while True:
        n_fine = _refined_count(n, settings)
        fine = evaluate(n_fine)
        scale = np.maximum(np.abs(fine), 1e-3 * np.max(np.abs(fine)) + 1e-300)
        err = np.max(np.abs(fine - coarse) / scale)
        if err <= settings.rel_tol:
            result = fine
            break
        if n_fine >= settings.max_nodes:
            raise QuadratureError(
                f"Doppler average not converged at {n_fine} nodes "
                f"(relative change {err:.3g})", coarse=coarse, fine=fine)
        n, coarse = n_fine, fine
    return result if np.ndim(delta_s_bar) else complex(result[0])


@dataclass(frozen=True)
class SusceptibilityCurve:
    """Sampled Doppler-averaged susceptibility versus signal detuning."""

    detunings: np.ndarray      # rad/s, strictly increasing
    values: np.ndarray         # complex, dimensionless
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(self.detunings, dtype=float)
        v = np.asarray(self.values)
        if d.ndim != 1 or v.shape != d.shape:
            raise DomainError("detunings", "detunings and values must be matching 1-D arrays")
        if not np.all(np.diff(d) > 0):
            raise DomainError("detunings", "must be strictly increasing")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(v))):
            raise DomainError("values", "curve contains NaN or Inf samples")
        object.__setattr__(self, "detunings", d)
        object.__setattr__(self, "values", v)


def susceptibility_curve(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                         detunings, settings: QuadratureSettings = None,
                         per_velocity_chi=None,
                         consts: PhysicalConstants = RB87) -> SusceptibilityCurve:
    values = doppler_averaged_chi(scheme, env, fields, np.asarray(detunings, dtype=float),
                                  settings, per_velocity_chi, consts)
    meta = {
        "scheme": scheme.scheme_id,
        "pressure_torr": env.pressure,
        "temperature_k": env.temperature,
        "pump_rabi_rad_s": fields.pump_rabi,
        "b_field_gauss": fields.b_field,
        "gradient_gauss_per_m": fields.gradient,
        "quadrature": (settings or DEFAULT_QUADRATURE).method,
    }
    return SusceptibilityCurve(np.asarray(detunings, dtype=float), values, meta)


@dataclass(frozen=True)
class ResonanceParams:
    """Local expansion of the transparency window: minimum absorption plus
    parabola in the imaginary part, offset plus linear slope in the real part."""

    center: float              # rad/s, minimum of Im chi
    phase_offset: float        # Re chi at the center
    min_absorption: float      # Im chi at the center
    dispersion_slope: float    # d Re chi / d Delta at the center, seconds
    curvature_width: float     # rad/s; d^2 Im chi / d Delta^2 = 2 / width^2
    transparency_ratio: float  # min absorption over its no-pump value


@dataclass(frozen=True)
class SearchSettings:
    """Controls for locating and differentiating the transparency minimum."""

    bracket_halfwidth: float = None   # rad/s; default 3x the estimated width
    max_widenings: int = 2
    fd_step: float = None             # rad/s; default width_est / 50
    xatol: float = None               # rad/s; default width_est / 500
    quadrature: QuadratureSettings = None


def analytic_estimates(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                       consts: PhysicalConstants = RB87) -> dict:
    """Closed-form estimates for the window parameters and level-4 corrections."""
    omega2 = abs(fields.pump_rabi) ** 2
    if omega2 == 0:
        raise DomainError("pump_rabi", "analytic estimates require a nonzero pump")
    gamma_r = consts.radiative_rate
    gamma_e = env.optical_dephasing
    _, _, delta_43 = shifted_detunings(scheme, fields, 0.0, env.pressure, consts=consts)
    denom = 4.0 * (delta_43 ** 2 + gamma_e ** 2)
    s_res = scheme.two_photon_slope(consts)
    return {
        "min_absorption": 2.0 * env.ground_dephasing * gamma_r / omega2,
        "dispersion_slope": 2.0 * gamma_r / omega2,
        "curvature_width": omega2 / np.sqrt(8.0 * gamma_e * gamma_r),
        "offres_absorption": (scheme.beta14 - scheme.beta24) ** 2 * gamma_e * gamma_r / denom,
        "ac_stark_shift": scheme.beta24 * (scheme.beta24 - scheme.beta14) * omega2 * gamma_e / denom,
        "gradient_absorption": (64.0 * (env.diffusion_const / 3.0) * fields.gradient ** 2
                                * s_res ** 2 * gamma_r * gamma_e ** 2 / omega2 ** 3),
    }


def width_estimate(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                   consts: PhysicalConstants = RB87) -> float:
    """Estimated window width used to scale brackets and difference steps."""
    if fields.pump_rabi > 0:
        return analytic_estimates(scheme, env, fields, consts)["curvature_width"]
    return TWO_PI * 10e3


def narrow_feature_scale(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                         consts: PhysicalConstants = RB87) -> float:
    """Width of the sharp Doppler-free structure at the window center.

    Velocity classes detuned by the Doppler width stay two-photon resonant
    and stack a sub-feature of roughly the diffusion rate plus their (much
    reduced) power broadening on top of the main window; local derivatives
    of the averaged curve must be taken on a coarser scale than this.
    """
    gamma_e = env.optical_dephasing
    power = (abs(fields.pump_rabi) ** 2 * gamma_e
             / (4.0 * (gamma_e ** 2 + env.doppler_width ** 2)))
    return env.ground_dephasing + power


def characterize_resonance(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                           search: SearchSettings = None, chi_fn=None,
                           consts: PhysicalConstants = RB87) -> ResonanceParams:
    """Locate the transparency minimum and extract its local expansion.

    ``chi_fn(delta_array) -> complex array`` overrides the Doppler-averaged
    susceptibility (the gradient pipeline passes its own); the no-pump
    reference for the transparency ratio always uses the homogeneous path.
    """
    search = search or SearchSettings()
    w_est = width_estimate(scheme, env, fields, consts)
    est = analytic_estimates(scheme, env, fields, consts) if fields.pump_rabi > 0 else None
    ac_shift = est["ac_stark_shift"] if est else 0.0
    center_guess = scheme.two_photon_slope(consts) * fields.b_field - ac_shift

    quad = search.quadrature
    if chi_fn is None:
        def chi_fn(d):
            return np.atleast_1d(doppler_averaged_chi(scheme, env, fields, d, quad,
                                                      consts=consts))

    halfwidth = search.bracket_halfwidth or 3.0 * w_est
    xatol = search.xatol or w_est / 500.0

    def im_chi(d):
        return float(np.imag(chi_fn(np.array([d]))[0]))

    delta0 = None
    for _ in range(search.max_widenings + 1):
        lo, hi = center_guess - halfwidth, center_guess + halfwidth
        res = minimize_scalar(im_chi, bounds=(lo, hi), method="bounded",
                              options={"xatol": xatol})
        interior = lo + 2 * xatol < res.x < hi - 2 * xatol
        if interior and res.fun <= min(im_chi(lo), im_chi(hi)):
            delta0 = float(res.x)
            break
        halfwidth *= 3.0
    if delta0 is None:
        raise ResonanceError(
            f"no transparency minimum found within +-{halfwidth:.3g} rad/s "
            f"of {center_guess:.3g} rad/s")

    # Differentiate on the window scale.  Gradient-averaged curves carry a
    # washed-out sub-feature at the center; callers on that path supply a
    # coarser fd_step that stays above it.
    h = search.fd_step or w_est / 50.0
    offsets = np.array([-2.0, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0]) * h
    chi = np.asarray(chi_fn(delta0 + offsets))
    c = {off: val for off, val in zip(offsets / h, chi)}

    # Slope of the real part: central difference, Richardson once.
    d_h = (c[1.0].real - c[-1.0].real) / (2 * h)
    d_h2 = (c[0.5].real - c[-0.5].real) / h
    slope = (4 * d_h2 - d_h) / 3.0

    # Curvature of the imaginary part: 5-point stencil, Richardson once.
    def second(step_key, step):
        return (-c[2 * step_key].imag + 16 * c[step_key].imag - 30 * c[0.0].imag
                + 16 * c[-step_key].imag - c[-2 * step_key].imag) / (12 * step ** 2)

    curv_h = second(1.0, h)
    curv_h2 = second(0.5, h / 2)
    curvature = (16 * curv_h2 - curv_h) / 15.0
    if curvature <= 0:
        raise ResonanceError(
            f"negative curvature {curvature:.3g} at the located minimum "
            f"{delta0:.6g} rad/s (step {h:.3g} rad/s); not a parabolic window")
    width = float(np.sqrt(2.0 / curvature))

    min_abs = float(c[0.0].imag)
    no_pump = replace(fields, pump_rabi=0.0)
    background = float(np.imag(doppler_averaged_chi(scheme, env, no_pump, delta0,
                                                    quad, consts=consts)))
    ratio = min_abs / background if background > 0 else np.nan
    return ResonanceParams(
        center=delta0,
        phase_offset=float(c[0.0].real),
        min_absorption=min_abs,
        dispersion_slope=float(slope),
        curvature_width=width,
        transparency_ratio=float(ratio),
    )


@dataclass(frozen=True)
class DelayFigures:
    """Closed-form pulse figures at a given optical density."""

    delay: float                 # seconds
    loss: float                  # fraction of peak intensity lost
    bandwidth: float             # rad/s
    delay_bandwidth: float       # dimensionless
    optical_density: float
    max_density: float           # density for 1/e transmission
    best_delay_bandwidth: float  # product evaluated at max_density


def pulse_figures(res: ResonanceParams, density: float) -> DelayFigures:
    """Delay, loss and bandwidth for a pulse at optical density ``density``."""
    if density < 0:
        raise DomainError("density", f"must be nonnegative, got {density}")
    a, s, w = res.min_absorption, res.dispersion_slope, res.curvature_width
    delay = s * density / 2.0
    loss = 1.0 - np.exp(-a * density)
    bandwidth = w / np.sqrt(density) if density > 0 else np.inf
    dbw = s * w * np.sqrt(density) / 2.0
    max_density = 1.0 / a if a > 0 else np.inf
    best = s * w / (2.0 * np.sqrt(a)) if a > 0 else np.inf
    return DelayFigures(delay=float(delay), loss=float(loss), bandwidth=float(bandwidth),
                        delay_bandwidth=float(dbw), optical_density=float(density),
                        max_density=float(max_density), best_delay_bandwidth=float(best))


def optical_density(env: Environment, scheme: LevelScheme,
                    consts: PhysicalConstants = RB87) -> float:
    """Absorption depth f13 * N * sigma * l_cell of the cell."""
    return scheme.f13 * env.density * consts.unity_cross_section * env.cell_length


def b_field_sensitivity_scan(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                             b_values, search: SearchSettings = None,
                             consts: PhysicalConstants = RB87):
    """Characterize the window at each magnetic field value.

    Returns a list of ``(b_gauss, ResonanceParams)``; the search bracket
    tracks the two-photon resonance shift.
    """
    b_values = list(b_values)
    if not b_values:
        raise DomainError("b_values", "scan range must be nonempty")
    out = []
    for b in b_values:
        f = replace(fields, b_field=float(b))
        out.append((float(b), characterize_resonance(scheme, env, f, search, consts=consts)))
    return out
