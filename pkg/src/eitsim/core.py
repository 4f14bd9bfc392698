"""Linearized steady-state response of a single velocity class.

The weak-signal coherences (rho_21, rho_31, rho_41) obey
``d rho/dt = M rho + S``; the Fourier-domain steady state is
``rho = -M^-1 S``.  Everything here is vectorized: detunings, Doppler
shifts and magnetic fields may be broadcastable arrays, in which case
matrices of shape ``(..., 3, 3)`` are assembled and solved in a batch.
"""

from dataclasses import dataclass

import numpy as np

from .constants import RB87, TWO_PI, LevelScheme, PhysicalConstants
from .environment import Environment
from .errors import DomainError, SolverError

DEFAULT_SIGNAL_RABI = TWO_PI * 1.0e3  # reference signal amplitude; results cancel it


@dataclass(frozen=True)
class FieldConfig:
    """Pump/signal field settings and the applied magnetic field."""

    pump_rabi: float                 # rad/s, real nonnegative
    pump_detuning: float = 0.0       # rad/s, bare pump detuning
    b_field: float = 0.0             # gauss
    gradient: float = 0.0            # gauss/m, 0 for homogeneous runs
    signal_rabi: float = DEFAULT_SIGNAL_RABI  # rad/s

    def __post_init__(self):
        if self.pump_rabi < 0:
            raise DomainError("pump_rabi", f"must be nonnegative, got {self.pump_rabi}")


def shifted_detunings(scheme: LevelScheme, fields: FieldConfig, delta_s_bar,
                      pressure: float, b_field=None,
                      consts: PhysicalConstants = RB87):
    """Zeeman- and pressure-shifted detunings (signal, pump, level-4 splitting).

    ``b_field`` overrides ``fields.b_field`` when given (used by the
    magnetic-field averaging machinery); it may be an array.
    """
    b = fields.b_field if b_field is None else b_field
    z1 = scheme.zeeman_shift(1, b, consts)
    z2 = scheme.zeeman_shift(2, b, consts)
    z3 = scheme.zeeman_shift(3, b, consts)
    z4 = scheme.zeeman_shift(4, b, consts)
    shift_e = consts.excited_pressure_shift * pressure
    delta_s = delta_s_bar - z3 - shift_e + z1
    delta_p = fields.pump_detuning - z3 - shift_e + z2
    delta_43 = consts.excited_hf_splitting + z4 - z3
    return delta_s, delta_p, delta_43


def evolution_matrices(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                       delta_s_bar, delta_d, b_field=None,
                       consts: PhysicalConstants = RB87) -> np.ndarray:
    """Assemble the 3x3 evolution matrix, broadcasting over array inputs."""
    delta_s, delta_p, delta_43 = shifted_detunings(
        scheme, fields, delta_s_bar, env.pressure, b_field, consts)
    shape = np.broadcast(np.asarray(delta_s), np.asarray(delta_d)).shape
    m = np.zeros(shape + (3, 3), dtype=complex)
    omega_p = fields.pump_rabi
    # Row 1 is independent of the Doppler shift: two-photon resonance is
    # maintained for all velocity classes (co-propagating beams).
    m[..., 0, 0] = 1j * (delta_s - delta_p) - env.ground_dephasing
    m[..., 0, 1] = -0.5j * np.conj(omega_p)
    m[..., 0, 2] = -0.5j * scheme.beta24 * np.conj(omega_p)
    m[..., 1, 0] = -0.5j * omega_p
    m[..., 1, 1] = 1j * (delta_s + delta_d) - env.optical_dephasing
    m[..., 2, 0] = -0.5j * scheme.beta24 * omega_p
    m[..., 2, 2] = 1j * (delta_s - delta_43 + delta_d) - env.optical_dephasing
    return m


def build_evolution_matrix(scheme: LevelScheme, env: Environment, fields: FieldConfig,
                           delta_s_bar: float, delta_d: float,
                           consts: PhysicalConstants = RB87) -> np.ndarray:
    """Single 3x3 evolution matrix for scalar inputs."""
    return evolution_matrices(scheme, env, fields, float(delta_s_bar),
                              float(delta_d), consts=consts)


def source_vector(scheme: LevelScheme, signal_rabi: float) -> np.ndarray:
    return np.array([0.0, -0.5j * signal_rabi, -0.5j * scheme.beta14 * signal_rabi])


def steady_state(matrix: np.ndarray, scheme: LevelScheme,
                 signal_rabi: float = DEFAULT_SIGNAL_RABI) -> np.ndarray:
    """Solve ``M rho + S = 0`` for the coherence vector(s).

    Accepts a single matrix or a batch ``(..., 3, 3)``.  One step of
    iterative refinement keeps the residual at the 1e-12 * |S| level even
    for poorly scaled matrices.
    """
    source = source_vector(scheme, signal_rabi)
    src = np.broadcast_to(source, matrix.shape[:-2] + (3,))
    try:
        rho = np.linalg.solve(matrix, -src[..., None])[..., 0]
        residual = np.einsum("...ij,...j->...i", matrix, rho) + src
        rho = rho - np.linalg.solve(matrix, residual[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"singular evolution matrix: {exc}") from exc
    return rho


def steady_state_reduced(matrix: np.ndarray, scheme: LevelScheme,
                         signal_rabi: float = DEFAULT_SIGNAL_RABI) -> np.ndarray:
    """2x2 fast path for scheme B (inert third row); rho_41 is identically 0."""
    if scheme.has_level4:
        raise DomainError("scheme", "reduced solve only applies to schemes without level 4")
    sub = matrix[..., :2, :2]
    src = np.broadcast_to(np.array([0.0, -0.5j * signal_rabi]),
                          matrix.shape[:-2] + (2,))
    try:
        rho2 = np.linalg.solve(sub, -src[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"singular evolution matrix: {exc}") from exc
    rho = np.zeros(matrix.shape[:-2] + (3,), dtype=complex)
    rho[..., :2] = rho2
    return rho


def coherences(scheme: LevelScheme, env: Environment, fields: FieldConfig,
               delta_s_bar, delta_d, b_field=None,
               consts: PhysicalConstants = RB87) -> np.ndarray:
    """Steady-state coherence vector(s) for the given detunings and fields."""
    m = evolution_matrices(scheme, env, fields, delta_s_bar, delta_d, b_field, consts)
    return steady_state(m, scheme, fields.signal_rabi)


def chi_single_velocity(rho: np.ndarray, scheme: LevelScheme, signal_rabi: float,
                        consts: PhysicalConstants = RB87):
    """Dimensionless susceptibility from a coherence vector computed at ``signal_rabi``."""
    if signal_rabi == 0:
        raise DomainError("signal_rabi",
                          "linear response is defined per unit signal; use a nonzero reference")
    return -(consts.radiative_rate / signal_rabi) * (
        rho[..., 1] + scheme.beta14 * rho[..., 2])
