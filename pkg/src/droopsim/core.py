"""Domain types, units policy, and reference-frame conventions.

All internal computation uses SI base units: W, VAr, V, A, rad/s, H, Ohm,
F, s.  Voltages are peak phase quantities (the amplitude that multiplies
cos/sin in the dq source model); line-to-line RMS ratings are converted at
ingestion with V_peak_phase = sqrt(2) * V_LL_rms / sqrt(3).

The common rotating reference frame has the PCC at angle zero.  A phasor
of magnitude X at absolute angle beta is represented in a frame of angle
theta_ref as (X*cos(beta - theta_ref), X*sin(beta - theta_ref)).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace as _dc_replace

import numpy as np

TWO_PI = 2.0 * math.pi


class DroopsimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DroopsimError):
    """Malformed configuration input (unknown key, bad unit suffix, ...)."""


class ParameterError(DroopsimError):
    """A physical or control parameter violates its validity range."""


class UsageError(DroopsimError):
    """An operation was called with inconsistent arguments (e.g. mode mismatch)."""


class NumericalError(DroopsimError):
    """Non-finite values or singular linear algebra encountered."""


# ---------------------------------------------------------------------------
# Units
# ---------------------------------------------------------------------------

# Multiplicative factors into SI base units.  Droop-gain suffixes follow the
# engineering convention of quoting gains per kW / per kVAr.
_UNIT_SCALE = {
    "W": 1.0, "kW": 1e3, "MW": 1e6,
    "VAr": 1.0, "var": 1.0, "kVAr": 1e3, "kvar": 1e3,
    "VA": 1.0, "kVA": 1e3,
    "V": 1.0, "kV": 1e3, "mV": 1e-3, "volt": 1.0,
    "A": 1.0, "kA": 1e3,
    "Hz": 1.0, "kHz": 1e3,
    "s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6,
    "Ohm": 1.0, "ohm": 1.0, "Ω": 1.0,
    "mOhm": 1e-3, "mohm": 1e-3, "mΩ": 1e-3,
    "H": 1.0, "mH": 1e-3, "uH": 1e-6, "µH": 1e-6,
    "F": 1.0, "mF": 1e-3, "uF": 1e-6, "µF": 1e-6,
    "rad/s": 1.0,
    "rad/s/W": 1.0, "rad/s/kW": 1e-3,
    "V/VAr": 1.0, "V/kVAr": 1e-3, "volt/kVAr": 1e-3,
    "V/s/VAr": 1.0, "V/s/kVAr": 1e-3, "volt/s/kVAr": 1e-3,
}


def to_internal_units(value: float, unit: str) -> float:
    """Convert ``value`` carrying the given unit suffix to SI base units."""
    if not math.isfinite(value):
        raise ConfigError(f"non-finite quantity {value!r} {unit!r}")
    try:
        scale = _UNIT_SCALE[unit]
    except KeyError:
        raise ConfigError(f"unknown unit suffix {unit!r}") from None
    return value * scale


def from_internal_units(value: float, unit: str) -> float:
    """Inverse of :func:`to_internal_units` (exact for these power-of-ten scales)."""
    try:
        scale = _UNIT_SCALE[unit]
    except KeyError:
        raise ConfigError(f"unknown unit suffix {unit!r}") from None
    return value / scale


def parse_quantity(raw: float | int | str) -> float:
    """Parse a config quantity: bare numbers are SI, strings are "<number> <unit>"."""
    if isinstance(raw, bool):
        raise ConfigError(f"expected a quantity, got boolean {raw!r}")
    if isinstance(raw, (int, float)):
        value = float(raw)
        if not math.isfinite(value):
            raise ConfigError(f"non-finite quantity {raw!r}")
        return value
    if isinstance(raw, str):
        parts = raw.split(maxsplit=1)
        if len(parts) != 2:
            raise ConfigError(f"cannot parse quantity {raw!r}; expected '<number> <unit>'")
        try:
            value = float(parts[0])
        except ValueError:
            raise ConfigError(f"cannot parse number in quantity {raw!r}") from None
        return to_internal_units(value, parts[1].strip())
    raise ConfigError(f"cannot parse quantity of type {type(raw).__name__}")


# ---------------------------------------------------------------------------
# Basic value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DqPair:
    """A d/q component pair (volts or amps, consistent across both axes)."""

    d: float
    q: float

    def __post_init__(self):
        if not (math.isfinite(self.d) and math.isfinite(self.q)):
            raise ParameterError(f"non-finite dq pair ({self.d}, {self.q})")

    @property
    def mag(self) -> float:
        return math.hypot(self.d, self.q)

    def rotated(self, angle: float) -> "DqPair":
        c, s = math.cos(angle), math.sin(angle)
        return DqPair(self.d * c - self.q * s, self.d * s + self.q * c)


@dataclass(frozen=True)
class Nominals:
    """Nominal voltage set-point (peak phase volts) and frequency (rad/s)."""

    v_nom: float
    omega_nom: float

    def __post_init__(self):
        if not (self.v_nom > 0.0):
            raise ParameterError(f"v_nom must be positive, got {self.v_nom}")
        if not (self.omega_nom > 0.0):
            raise ParameterError(f"omega_nom must be positive, got {self.omega_nom}")

    @property
    def f_nom(self) -> float:
        return self.omega_nom / TWO_PI

    @classmethod
    def from_ratings(cls, v_ll_rms: float, f_hz: float) -> "Nominals":
        """Build from line-to-line RMS voltage and frequency in Hz."""
        return cls(v_nom=math.sqrt(2.0) * v_ll_rms / math.sqrt(3.0),
                   omega_nom=TWO_PI * f_hz)

    @property
    def v_ll_rms(self) -> float:
        return self.v_nom * math.sqrt(3.0) / math.sqrt(2.0)


class Mode(enum.Enum):
    """Grid-availability mode; ``i_gs`` is the binary status bit (1 = on-grid)."""

    ON_GRID = "on"
    OFF_GRID = "off"

    @property
    def i_gs(self) -> int:
        return 1 if self is Mode.ON_GRID else 0

    @property
    def order(self) -> int:
        return 15 if self is Mode.ON_GRID else 10

    @property
    def labels(self) -> tuple[str, ...]:
        return _ON_LABELS if self is Mode.ON_GRID else _OFF_LABELS


class FrameAnchor(enum.Enum):
    """How the common reference frame is driven.

    FIXED rotates at a constant rate (nominal unless stated otherwise);
    VSI1 slaves the frame rate to the first inverter's internal frequency,
    which freezes that inverter's angle state.
    """

    FIXED = "fixed"
    VSI1 = "vsi1"


@dataclass(frozen=True)
class ReferenceFrame:
    omega_ref: float
    anchor: FrameAnchor

    def __post_init__(self):
        if not (math.isfinite(self.omega_ref) and self.omega_ref > 0.0):
            raise ParameterError(f"omega_ref must be positive and finite, got {self.omega_ref}")

    @classmethod
    def fixed_nominal(cls, nominals: Nominals) -> "ReferenceFrame":
        return cls(omega_ref=nominals.omega_nom, anchor=FrameAnchor.FIXED)

    @classmethod
    def synchronous(cls, omega: float) -> "ReferenceFrame":
        """Fixed frame rotating at an arbitrary constant rate (e.g. an islanded
        steady-state frequency)."""
        return cls(omega_ref=omega, anchor=FrameAnchor.FIXED)

    @classmethod
    def vsi1_anchored(cls, nominals: Nominals) -> "ReferenceFrame":
        return cls(omega_ref=nominals.omega_nom, anchor=FrameAnchor.VSI1)

    def rate(self, omega_vsi1: float) -> float:
        """Instantaneous frame rate given the current VSI-1 frequency state."""
        if self.anchor is FrameAnchor.VSI1:
            return omega_vsi1
        return self.omega_ref


# ---------------------------------------------------------------------------
# Parameter blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ControlParams:
    """Droop and power-filter parameters of one inverter (SI units)."""

    n: float          # P-f droop gain, rad/s per W
    m: float          # Q-V proportional gain, V per VAr
    m_int: float      # Q-V integral gain, V per (VAr*s); acts on-grid only
    tau_s: float      # power low-pass filter time constant, s
    p_ref: float      # active power set-point, W
    q_ref: float      # reactive power set-point, VAr
    p_rated: float    # W
    q_rated: float    # VAr

    def __post_init__(self):
        for name in ("n", "m", "m_int", "tau_s"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ParameterError(f"{name} must be positive, got {v}")
        if not (0.0 <= self.p_ref <= self.p_rated):
            raise ParameterError(
                f"p_ref must lie in [0, p_rated]: p_ref={self.p_ref}, p_rated={self.p_rated}")
        if not (abs(self.q_ref) <= self.q_rated):
            raise ParameterError(
                f"|q_ref| must not exceed q_rated: q_ref={self.q_ref}, q_rated={self.q_rated}")

    @property
    def k_m(self) -> float:
        """Feed-through coefficient of the on-grid voltage dynamics."""
        return 1.0 - self.tau_s * self.m_int / self.m


@dataclass(frozen=True)
class FilterParams:
    """LCL filter constants; only the inverter-side branch feeds the gain helper."""

    l_f: float
    r_f: float
    c_f: float

    def __post_init__(self):
        if not (self.l_f > 0.0):
            raise ParameterError(f"l_f must be positive, got {self.l_f}")
        if self.r_f < 0.0 or self.c_f < 0.0:
            raise ParameterError("filter resistances/capacitances must be non-negative")


@dataclass(frozen=True)
class VsiParams:
    """One inverter: control block plus the lumped coupling impedance to the PCC."""

    control: ControlParams
    l_l: float                      # grid-side filter + line inductance, H
    r_l: float = 0.0                # lumped series resistance, Ohm
    filter: FilterParams | None = None

    def __post_init__(self):
        if not (self.l_l > 0.0):
            raise ParameterError(f"l_l must be positive, got {self.l_l}")
        if self.r_l < 0.0:
            raise ParameterError(f"r_l must be non-negative, got {self.r_l}")


@dataclass(frozen=True)
class GridParams:
    """Stiff grid behind a lumped feeder/transformer impedance."""

    l_lg: float
    r_lg: float = 0.0

    def __post_init__(self):
        if not (self.l_lg > 0.0):
            raise ParameterError(f"l_lg must be positive, got {self.l_lg}")
        if self.r_lg < 0.0:
            raise ParameterError(f"r_lg must be non-negative, got {self.r_lg}")


@dataclass(frozen=True)
class LoadParams:
    """Constant-impedance series R-L load lumped at the PCC."""

    r_load: float
    l_load: float

    def __post_init__(self):
        if not (self.r_load > 0.0):
            raise ParameterError(f"r_load must be positive, got {self.r_load}")
        if not (self.l_load > 0.0):
            raise ParameterError(f"l_load must be positive, got {self.l_load}")


# ---------------------------------------------------------------------------
# State vector
# ---------------------------------------------------------------------------

_ON_LABELS = ("theta1", "theta2", "theta_g",
              "omega1", "omega2", "v1", "v2", "psi1", "psi2",
              "id1", "id2", "id_g", "iq1", "iq2", "iq_g")
_OFF_LABELS = ("theta1", "theta2", "omega1", "omega2", "v1", "v2",
               "id1", "id2", "iq1", "iq2")

_ON_INDEX = {name: i for i, name in enumerate(_ON_LABELS)}
_OFF_INDEX = {name: i for i, name in enumerate(_OFF_LABELS)}


def state_labels(mode: Mode) -> tuple[str, ...]:
    return mode.labels


def state_index(mode: Mode, name: str) -> int:
    table = _ON_INDEX if mode is Mode.ON_GRID else _OFF_INDEX
    try:
        return table[name]
    except KeyError:
        raise UsageError(f"no state {name!r} in {mode.value}-grid layout") from None


@dataclass(frozen=True)
class SystemState:
    """Flat state vector tagged with its mode.

    On-grid layout (15): theta1, theta2, theta_g, omega1, omega2, v1, v2,
    psi1, psi2, id1, id2, id_g, iq1, iq2, iq_g.
    Off-grid layout (10): theta1, theta2, omega1, omega2, v1, v2,
    id1, id2, iq1, iq2.
    """

    mode: Mode
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, copy=True)
        if arr.shape != (self.mode.order,):
            raise UsageError(
                f"{self.mode.value}-grid state needs {self.mode.order} entries, "
                f"got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NumericalError("state vector contains non-finite entries")
        for name in ("v1", "v2"):
            if arr[state_index(self.mode, name)] <= 0.0:
                raise ParameterError(f"voltage state {name} must stay positive")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.mode.labels

    def get(self, name: str) -> float:
        return float(self.values[state_index(self.mode, name)])

    def replace(self, **updates: float) -> "SystemState":
        arr = self.values.copy()
        for name, value in updates.items():
            arr[state_index(self.mode, name)] = value
        return SystemState(self.mode, arr)

    def __len__(self) -> int:
        return self.values.shape[0]


def flat_start(mode: Mode, nominals: Nominals) -> SystemState:
    """All angles zero, frequencies and voltages at nominal, currents zero."""
    values = np.zeros(mode.order)
    for name in ("omega1", "omega2"):
        values[state_index(mode, name)] = nominals.omega_nom
    for name in ("v1", "v2"):
        values[state_index(mode, name)] = nominals.v_nom
    return SystemState(mode, values)


def replace_params(obj, **updates):
    """dataclasses.replace passthrough, re-exported for callers tweaking params."""
    return _dc_replace(obj, **updates)
