"""Slow-light transparency simulator for warm rubidium vapor.

Library layout:

* :mod:`eitsim.constants` / :mod:`eitsim.environment` -- atomic data,
  level schemes, cell conditions.
* :mod:`eitsim.core` -- single-velocity steady-state response.
* :mod:`eitsim.spectral` -- Doppler averaging, window characterization,
  closed-form delay figures.
* :mod:`eitsim.gradient` -- field-gradient corrections and channelized
  delay performance.
* :mod:`eitsim.pulse` -- spectral-domain pulse propagation.
* :mod:`eitsim.cli` -- the ``eitsim`` command.
"""

__version__ = "0.1.0"

from .constants import (RB87, SCHEME_A, SCHEME_B, LevelScheme,
                        PhysicalConstants, get_scheme, rabi_from_power)
from .core import (FieldConfig, build_evolution_matrix, chi_single_velocity,
                   coherences, evolution_matrices, source_vector, steady_state,
                   steady_state_reduced)
from .environment import Environment, derive_environment
from .errors import (ConfigError, DerivativeError, DomainError, EitsimError,
                     MeasurementError, QuadratureError, ResonanceError,
                     SolverError)
from .gradient import (ChannelPerformance, GradientSettings, averaging_width,
                       channel_performance, diffusion_averaged_rho,
                       gradient_chi_fn, gradient_resonance,
                       perturbative_correction, pressure_scan, rho_d2_db,
                       second_derivative)
from .pulse import (GridSpec, PulseMetrics, TimeSeries, auto_grid,
                    gaussian_pulse, measure_pulse, propagate)
from .spectral import (DelayFigures, QuadratureSettings, ResonanceParams,
                       SearchSettings, SusceptibilityCurve, analytic_estimates,
                       b_field_sensitivity_scan, characterize_resonance,
                       doppler_averaged_chi, optical_density, pulse_figures,
                       susceptibility_curve, width_estimate)

__all__ = [name for name in dir() if not name.startswith("_")]
