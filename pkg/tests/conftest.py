"""Shared fixtures: standard cell environments and pump configurations."""

import pytest

from eitsim import (SCHEME_A, SCHEME_B, FieldConfig, characterize_resonance,
                    derive_environment, rabi_from_power)

DENSITY = 2.5e17          # atoms / m^3
CELL_LENGTH = 0.01        # m
BEAM = 2e-3               # m, square beam side for the narrow-beam runs
WIDE_W, WIDE_H = 0.02, 5e-4  # m, wide-beam interaction region


def narrow_env(pressure):
    return derive_environment(333.0, pressure, DENSITY, CELL_LENGTH, BEAM, BEAM)


def wide_env(pressure):
    return derive_environment(333.0, pressure, DENSITY, CELL_LENGTH, WIDE_W, WIDE_H)


def narrow_pump(scheme, power_w=1e-3):
    return FieldConfig(pump_rabi=rabi_from_power(power_w, BEAM, BEAM,
                                                 scheme.pump_strength))


def wide_pump(scheme, power_w=5e-3):
    return FieldConfig(pump_rabi=rabi_from_power(power_w, WIDE_W, WIDE_H,
                                                 scheme.pump_strength))


@pytest.fixture(scope="session")
def env_a2():
    return narrow_env(2.0)


@pytest.fixture(scope="session")
def env_b15():
    return narrow_env(15.0)


@pytest.fixture(scope="session")
def env_wide25():
    return wide_env(25.0)


@pytest.fixture(scope="session")
def pump_a():
    return narrow_pump(SCHEME_A)


@pytest.fixture(scope="session")
def pump_b():
    return narrow_pump(SCHEME_B)


@pytest.fixture(scope="session")
def res_a2(env_a2, pump_a):
    return characterize_resonance(SCHEME_A, env_a2, pump_a)


@pytest.fixture(scope="session")
def res_b15(env_b15, pump_b):
    return characterize_resonance(SCHEME_B, env_b15, pump_b)
