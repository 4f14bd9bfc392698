"""Cell environment: temperature, buffer gas, geometry and derived rates."""

from dataclasses import dataclass
import math

from .constants import RB87, K_B, TWO_PI, PhysicalConstants
from .errors import DomainError

# Lowest diffusion-mode eigenvalue factor for a rectangular interaction region.
_BESSEL_J0_ROOT = 2.405


@dataclass(frozen=True)
class Environment:
    """Inputs plus all derived rates for one cell configuration."""

    temperature: float        # K
    pressure: float           # Torr
    density: float            # atoms / m^3
    cell_length: float        # m
    interaction_width: float  # m
    interaction_height: float  # m
    # derived
    thermal_velocity: float   # m/s
    diffusion_const: float    # m^2/s
    mean_free_path: float     # m
    ground_dephasing: float   # rad/s  (diffusion out of the beam)
    optical_dephasing: float  # rad/s  (radiative + pressure broadening)
    doppler_width: float      # rad/s


def derive_environment(temperature: float, pressure: float, density: float,
                       cell_length: float, interaction_width: float,
                       interaction_height: float,
                       consts: PhysicalConstants = RB87) -> Environment:
    """Build an :class:`Environment`, deriving every rate from the inputs.

    Raises :class:`DomainError` naming the first nonpositive input.
    """
    fields = {
        "temperature": temperature,
        "pressure": pressure,
        "cell_length": cell_length,
        "interaction_width": interaction_width,
        "interaction_height": interaction_height,
    }
    for name, value in fields.items():
        if not value > 0:
            raise DomainError(name, f"must be positive, got {value}")
    if density < 0:
        raise DomainError("density", f"must be nonnegative, got {density}")

    v_th = math.sqrt(3.0 * K_B * temperature / consts.mass)
    d_g = consts.diffusion_ref * (1.0 / pressure) * math.sqrt(temperature / 273.0)
    l_mfp = 3.0 * d_g / v_th
    area = interaction_width * interaction_height
    gamma_diff = ((2.0 / 3.0) * _BESSEL_J0_ROOT ** 2 * d_g / area
                  / (1.0 + 6.8 * l_mfp / math.sqrt(area)))
    gamma_e = consts.radiative_rate / 2.0 + consts.pressure_broadening * pressure
    doppler_width = math.sqrt(2.0 / 3.0) * TWO_PI * v_th / consts.wavelength

    return Environment(
        temperature=temperature,
        pressure=pressure,
        density=density,
        cell_length=cell_length,
        interaction_width=interaction_width,
        interaction_height=interaction_height,
        thermal_velocity=v_th,
        diffusion_const=d_g,
        mean_free_path=l_mfp,
        ground_dephasing=gamma_diff,
        optical_dephasing=gamma_e,
        doppler_width=doppler_width,
    )
