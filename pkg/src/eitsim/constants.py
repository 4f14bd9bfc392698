"""Physical constants and Lambda-scheme definitions for the Rb-87 D1 line.

All angular frequencies are stored in rad/s.  Magnetic fields are in gauss,
buffer-gas pressures in Torr, lengths in SI units.
"""

from dataclasses import dataclass
import math

from .errors import DomainError

TWO_PI = 2.0 * math.pi

K_B = 1.380649e-23          # J/K
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg


@dataclass(frozen=True)
class PhysicalConstants:
    """Rb-87 D1 constants with helium buffer gas coefficients."""

    radiative_rate: float = TWO_PI * 6.0e6          # rad/s
    wavelength: float = 795e-9                      # m
    zeeman_slope: float = TWO_PI * 1.4e6            # rad/s per gauss
    excited_hf_splitting: float = TWO_PI * 817e6    # rad/s
    excited_pressure_shift: float = -TWO_PI * 0.9e6  # rad/s per Torr
    pressure_broadening: float = TWO_PI * 5.0e6     # rad/s per Torr
    diffusion_ref: float = 410e-4                   # m^2/s at 1 Torr, 273 K
    mass: float = 86.909180527 * ATOMIC_MASS_UNIT   # kg

    @property
    def unity_cross_section(self) -> float:
        """Resonant cross section 3*lambda^2/(2*pi) for unity oscillator strength."""
        return 3.0 * self.wavelength ** 2 / TWO_PI


RB87 = PhysicalConstants()

_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class LevelScheme:
    """One of the two Lambda configurations on the D1 line.

    Levels 1 and 2 are the stable ground sublevels, level 3 the shared
    excited sublevel, level 4 the unwanted extra excited sublevel (absent
    in scheme B).  ``g_factors`` and ``m_values`` are indexed by level.
    """

    scheme_id: str
    g_factors: tuple
    m_values: tuple
    f13: float
    f23: float
    beta14: float
    beta24: float
    has_level4: bool

    @property
    def f14(self) -> float:
        return abs(self.beta14) ** 2 * self.f13

    @property
    def f24(self) -> float:
        return abs(self.beta24) ** 2 * self.f23

    @property
    def pump_strength(self) -> float:
        """Oscillator strength of the pump transition (level 2 -> 3)."""
        return self.f23

    def zeeman_shift(self, level: int, b_gauss: float, consts: PhysicalConstants = RB87):
        """Linear Zeeman shift of ``level`` (1-based) in rad/s."""
        i = level - 1
        return consts.zeeman_slope * self.g_factors[i] * self.m_values[i] * b_gauss

    def two_photon_slope(self, consts: PhysicalConstants = RB87) -> float:
        """Shift of the two-photon resonance per gauss (rad/s per gauss)."""
        return consts.zeeman_slope * (
            self.g_factors[1] * self.m_values[1] - self.g_factors[0] * self.m_values[0]
        )


# Level assignments:
#   A: |1> = F=2,m=-2; |2> = F=1,m=0; |3> = F'=1,m=-1; |4> = F'=2,m=-1
#   B: |1> = F=1,m=+1; |2> = F=2,m=+1; |3> = F'=2,m=+2
SCHEME_A = LevelScheme(
    scheme_id="A",
    g_factors=(0.5, -0.5, -1.0 / 6.0, 1.0 / 6.0),
    m_values=(-2, 0, -1, -1),
    f13=0.5,
    f23=1.0 / 12.0,
    beta14=1.0 / _SQRT3,
    beta24=-_SQRT3,
    has_level4=True,
)

SCHEME_B = LevelScheme(
    scheme_id="B",
    g_factors=(-0.5, 0.5, 1.0 / 6.0, 0.0),
    m_values=(1, 1, 2, 0),
    f13=0.5,
    f23=1.0 / 6.0,
    beta14=0.0,
    beta24=0.0,
    has_level4=False,
)

_SCHEMES = {"A": SCHEME_A, "B": SCHEME_B}


def get_scheme(name: str) -> LevelScheme:
    try:
        return _SCHEMES[name.upper()]
    except KeyError:
        raise DomainError("scheme", f"unknown scheme {name!r}; expected A or B")


# Pump Rabi calibration: 1 mW over a (2 mm)^2 area on the scheme-A pump
# transition (f = 1/12) gives (2*pi) 8.45 MHz.
_CAL_RABI = TWO_PI * 8.45e6
_CAL_INTENSITY_ARG = (1.0 / 12.0) * 1.0e-3 / 4.0e-6
RABI_CALIBRATION = _CAL_RABI / math.sqrt(_CAL_INTENSITY_ARG)


def rabi_from_power(power_w: float, width_m: float, height_m: float,
                    pump_strength: float) -> float:
    """Pump Rabi frequency (rad/s) for a given power, beam area and transition strength."""
    for name, value in (("power_w", power_w), ("width_m", width_m),
                        ("height_m", height_m), ("pump_strength", pump_strength)):
        if not value > 0:
            raise DomainError(name, f"must be positive, got {value}")
    return RABI_CALIBRATION * math.sqrt(pump_strength * power_w / (width_m * height_m))
