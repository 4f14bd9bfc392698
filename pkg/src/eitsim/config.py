"""Run configuration: flat key=value documents, defaults, and figure presets.

Keys carry explicit unit suffixes (``pressure_torr``, ``pump.power_mw``,
``gradient_gauss_per_mm``) so values can never be mistaken for rad/s.
"""

from dataclasses import dataclass, field

from .constants import TWO_PI, get_scheme, rabi_from_power
from .core import FieldConfig
from .environment import derive_environment
from .errors import ConfigError
from .gradient import GradientSettings
from .spectral import QuadratureSettings, SearchSettings

# key -> (type, default).  A default of None means "unset".
SCHEMA = {
    "scheme": (str, "B"),
    "temp_k": (float, 333.0),
    "pressure_torr": (float, 15.0),
    "density_per_cm3": (float, 2.5e11),
    "cell_length_m": (float, 0.01),
    "interaction_width_m": (float, 2e-3),
    "interaction_height_m": (float, 2e-3),
    "bz_gauss": (float, 0.0),
    "gradient_gauss_per_mm": (float, 0.0),
    "pump.power_mw": (float, 1.0),
    "pump.rabi_mhz": (float, None),
    "pump.detuning_mhz": (float, 0.0),
    "signal.rabi_khz": (float, 1.0),
    "numerics.doppler_nodes": (int, 0),
    "numerics.quad_rel_tol": (float, 1e-3),
    "numerics.bstep_gauss": (float, 0.0),
    "chi.min_mhz": (float, -40.0),
    "chi.max_mhz": (float, 40.0),
    "chi.points": (int, 401),
    "pulse.half_width_us": (float, 0.0),   # 0 = auto: 10 / bandwidth
    "pulse.optical_density": (float, -1.0),  # negative = use the cell's density
    "sweep.axis": (str, ""),
    "sweep.values": (str, ""),
    "sweep.quantity": (str, ""),
}

SWEEP_AXES = ("pressure_torr", "gradient_gauss_per_mm", "bz_gauss", "optical_density")
SWEEP_QUANTITIES = ("", "resonance", "channel", "pulse_figures")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration for one CLI run."""

    values: dict = field(default_factory=dict)

    def get(self, key):
        return self.values[key]

    def with_overrides(self, overrides: dict) -> "RunConfig":
        merged = dict(self.values)
        for key, raw in overrides.items():
            merged[key] = _coerce(key, raw, context=f"override {key}")
        return RunConfig(merged)


def _coerce(key, raw, context=""):
    if key not in SCHEMA:
        raise ConfigError(f"unknown key {key!r}{f' ({context})' if context else ''}")
    typ, _ = SCHEMA[key]
    if isinstance(raw, typ) and not isinstance(raw, str):
        return raw
    text = str(raw).strip()
    try:
        if typ is int:
            return int(text)
        if typ is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse {text!r} as {typ.__name__}")


def default_config() -> RunConfig:
    return RunConfig({key: default for key, (_, default) in SCHEMA.items()})


def parse_config(text: str) -> RunConfig:
    """Parse a ``key = value`` document; unknown keys fail with line context."""
    values = dict(default_config().values)
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw, context=f"line {lineno}")
    cfg = RunConfig(values)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig):
    v = cfg.values
    for key in ("temp_k", "pressure_torr", "cell_length_m",
                "interaction_width_m", "interaction_height_m"):
        if not v[key] > 0:
            raise ConfigError(f"key {key!r}: must be positive, got {v[key]}")
    if v["density_per_cm3"] < 0:
        raise ConfigError(f"key 'density_per_cm3': must be nonnegative")
    if v["gradient_gauss_per_mm"] < 0:
        raise ConfigError(f"key 'gradient_gauss_per_mm': must be nonnegative")
    if v["pump.rabi_mhz"] is not None and v["pump.rabi_mhz"] <= 0:
        raise ConfigError(f"key 'pump.rabi_mhz': must be positive when set")
    if v["pump.power_mw"] is not None and v["pump.power_mw"] <= 0:
        raise ConfigError(f"key 'pump.power_mw': must be positive")
    if v["scheme"].upper() not in ("A", "B"):
        raise ConfigError(f"key 'scheme': expected A or B, got {v['scheme']!r}")
    if not v["chi.max_mhz"] > v["chi.min_mhz"]:
        raise ConfigError("chi range: chi.max_mhz must exceed chi.min_mhz")
    if v["chi.points"] < 2:
        raise ConfigError("key 'chi.points': need at least 2 samples")
    if v["sweep.axis"] and v["sweep.axis"] not in SWEEP_AXES:
        raise ConfigError(f"key 'sweep.axis': expected one of {SWEEP_AXES}")
    if v["sweep.quantity"] not in SWEEP_QUANTITIES:
        raise ConfigError(f"key 'sweep.quantity': expected one of {SWEEP_QUANTITIES[1:]}")
    if v["sweep.axis"]:
        vals = sweep_values(cfg)
        if not vals:
            raise ConfigError("key 'sweep.values': nonempty list required with sweep.axis")


def sweep_values(cfg: RunConfig):
    text = cfg.get("sweep.values").strip()
    if not text:
        return []
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"key 'sweep.values': cannot parse {text!r} as a float list")


def build_physics(cfg: RunConfig):
    """Instantiate (scheme, env, fields) from a resolved config."""
    v = cfg.values
    scheme = get_scheme(v["scheme"])
    env = derive_environment(
        temperature=v["temp_k"],
        pressure=v["pressure_torr"],
        density=v["density_per_cm3"] * 1e6,  # cm^-3 -> m^-3
        cell_length=v["cell_length_m"],
        interaction_width=v["interaction_width_m"],
        interaction_height=v["interaction_height_m"],
    )
    if v["pump.rabi_mhz"] is not None:
        pump_rabi = TWO_PI * v["pump.rabi_mhz"] * 1e6
    else:
        pump_rabi = rabi_from_power(v["pump.power_mw"] * 1e-3,
                                    v["interaction_width_m"],
                                    v["interaction_height_m"],
                                    scheme.pump_strength)
    fields = FieldConfig(
        pump_rabi=pump_rabi,
        pump_detuning=TWO_PI * v["pump.detuning_mhz"] * 1e6,
        b_field=v["bz_gauss"],
        gradient=v["gradient_gauss_per_mm"] * 1e3,  # G/mm -> G/m
        signal_rabi=TWO_PI * v["signal.rabi_khz"] * 1e3,
    )
    return scheme, env, fields


def quadrature_settings(cfg: RunConfig) -> QuadratureSettings:
    return QuadratureSettings(nodes=cfg.get("numerics.doppler_nodes"),
                              rel_tol=cfg.get("numerics.quad_rel_tol"))


def search_settings(cfg: RunConfig) -> SearchSettings:
    return SearchSettings(quadrature=quadrature_settings(cfg))


def gradient_settings(cfg: RunConfig) -> GradientSettings:
    return GradientSettings(b_step=cfg.get("numerics.bstep_gauss"))


# Parameter sets matching the paper-figure scenarios.
PRESETS = {
    # Broad-scale susceptibility curves at low and high pressure.
    "fig2": {
        "scheme": "A", "chi.min_mhz": -1500.0, "chi.max_mhz": 1500.0,
        "chi.points": 1201, "sweep.axis": "pressure_torr", "sweep.values": "3,30",
    },
    # Delay / loss / inverse-bandwidth versus optical density.
    "fig3a": {
        "scheme": "A", "pressure_torr": 2.0,
        "sweep.axis": "optical_density",
        "sweep.values": ",".join(str(10 * k) for k in range(41)),
    },
    "fig3b": {
        "scheme": "B", "pressure_torr": 15.0,
        "sweep.axis": "optical_density",
        "sweep.values": ",".join(str(10 * k) for k in range(41)),
    },
    # Window parameters versus homogeneous magnetic field.
    "fig5": {
        "scheme": "B", "pressure_torr": 30.0,
        "sweep.axis": "bz_gauss", "sweep.values": "-200,-100,0,100,200",
        "sweep.quantity": "resonance",
    },
    # Gradient-corrected local susceptibility curves.
    "fig6": {
        "scheme": "B", "pressure_torr": 25.0, "pump.power_mw": 5.0,
        "interaction_width_m": 0.02, "interaction_height_m": 5e-4,
        "chi.min_mhz": -12.0, "chi.max_mhz": 12.0, "chi.points": 241,
        "sweep.axis": "gradient_gauss_per_mm", "sweep.values": "0,2,8",
    },
    # Window parameters versus gradient.
    "fig7": {
        "scheme": "B", "pressure_torr": 25.0, "pump.power_mw": 5.0,
        "interaction_width_m": 0.02, "interaction_height_m": 5e-4,
        "sweep.axis": "gradient_gauss_per_mm", "sweep.values": "0.5,1,2,4,8",
        "sweep.quantity": "resonance",
    },
    # Maximum delay versus channelized bandwidth.
    "fig8c": {
        "scheme": "B", "pressure_torr": 25.0, "pump.power_mw": 5.0,
        "interaction_width_m": 0.02, "interaction_height_m": 5e-4,
        "sweep.axis": "gradient_gauss_per_mm", "sweep.values": "0.5,1,2,4,8",
        "sweep.quantity": "channel",
    },
    # Delay-bandwidth product versus pressure at fixed gradient.
    "fig9": {
        "scheme": "B", "pump.power_mw": 5.0, "gradient_gauss_per_mm": 2.0,
        "interaction_width_m": 0.02, "interaction_height_m": 5e-4,
        "sweep.axis": "pressure_torr", "sweep.values": "10,15,20,25,30,40",
        "sweep.quantity": "channel",
    },
}

# The command each preset is naturally rendered with.
PRESET_COMMANDS = {
    "fig2": "chi", "fig3a": "sweep", "fig3b": "sweep", "fig5": "sweep",
    "fig6": "gradient", "fig7": "sweep", "fig8c": "sweep", "fig9": "sweep",
}


def preset(name: str) -> RunConfig:
    """Figure parameter set as a resolved config."""
    try:
        overrides = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    cfg = default_config().with_overrides(overrides)
    validate(cfg)
    return cfg
