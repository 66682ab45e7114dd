"""Simulation and small-signal analysis of a two-inverter microgrid with
mode-dependent droop control."""

from .core import (
    ConfigError,
    ControlParams,
    DqPair,
    DroopsimError,
    FilterParams,
    FrameAnchor,
    GridParams,
    LoadParams,
    Mode,
    Nominals,
    NumericalError,
    ParameterError,
    ReferenceFrame,
    SystemState,
    UsageError,
    VsiParams,
    flat_start,
    from_internal_units,
    parse_quantity,
    state_index,
    state_labels,
    to_internal_units,
)
from .components import (
    inner_loop_current_gains,
    instantaneous_power,
    load_from_power,
    pcc_coefficients,
    pcc_voltage,
)
from .system import Outputs, SystemModel, frame_invariant_coords, outputs, vector_field
from .solver import (
    ConvergenceError,
    IntegratorSettings,
    Method,
    NewtonSettings,
    grid_return_state,
    integrate,
    islanding_state,
    jacobian,
    solve_equilibrium,
)

__version__ = "0.1.0"
