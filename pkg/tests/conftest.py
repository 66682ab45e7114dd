"""Shared fixtures: the bundled 480 V / 60 Hz two-inverter test network."""

import pytest

from droopsim import Mode, load_from_power, solve_equilibrium
from droopsim.cli import bundled_config_path, parse_config


@pytest.fixture(scope="session")
def cfg():
    return parse_config(bundled_config_path())


@pytest.fixture(scope="session")
def model_on(cfg):
    """On-grid model at the 500 kW / 220 kVAr peak load."""
    return cfg.model(Mode.ON_GRID)


@pytest.fixture(scope="session")
def model_off(cfg):
    """Islanded model at the 250 kW / 100 kVAr critical load, anchored frame."""
    return cfg.model(Mode.OFF_GRID, load=cfg.load_params(250e3, 100e3))


@pytest.fixture(scope="session")
def x_on_eq(model_on):
    x, report = solve_equilibrium(model_on)
    assert report.converged
    return x


@pytest.fixture(scope="session")
def x_off_eq(model_off):
    x, report = solve_equilibrium(model_off)
    assert report.converged
    return x
