"""Equilibrium root finding, finite-difference Jacobians, and fixed-step
time integration.

The droop-controlled system carries one structurally frozen angle per frame
policy (the grid angle in a fixed nominal frame, the first inverter's angle
in an anchored frame).  Its vector-field row is identically zero, so Newton
iterations pin that state and solve the reduced system.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    FrameAnchor,
    Mode,
    Nominals,
    NumericalError,
    ParameterError,
    ReferenceFrame,
    SystemState,
    UsageError,
    state_index,
)
from .system import SystemModel, flat_start, make_field

Field = Callable[[np.ndarray], np.ndarray]

#: Any state magnitude beyond this (SI units) is treated as divergence.
DIVERGENCE_LIMIT = 1e9


@dataclass(frozen=True)
class NewtonSettings:
    tol: float = 1e-9           # infinity-norm threshold on the scaled residual
    max_iter: int = 50
    fd_step: float = 1e-6       # relative finite-difference perturbation

    def __post_init__(self):
        if not (self.tol > 0.0):
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ParameterError(f"max_iter must be >= 1, got {self.max_iter}")
        if not (0.0 < self.fd_step <= 1e-3):
            raise ParameterError(f"fd_step must lie in (0, 1e-3], got {self.fd_step}")


class Method(enum.Enum):
    FORWARD_EULER = "euler"
    RK4 = "rk4"


@dataclass(frozen=True)
class IntegratorSettings:
    method: Method = Method.FORWARD_EULER
    h: float = 1e-5
    t_end: float = 1.0

    def __post_init__(self):
        if not (self.h > 0.0):
            raise ParameterError(f"step size must be positive, got {self.h}")
        if not (self.t_end > 0.0):
            raise ParameterError(f"t_end must be positive, got {self.t_end}")
        if self.h > 1e-4:
            warnings.warn(
                f"step size {self.h} s exceeds 100 us; electromagnetic line "
                "modes may be underresolved", stacklevel=2)


@dataclass
class NewtonReport:
    converged: bool
    iterations: int
    residual: float
    condition: float = float("nan")
    pinned: tuple[int, ...] = ()
    message: str = ""


class ConvergenceError(NumericalError):
    """Newton failed; carries the final report rather than a partial result."""

    def __init__(self, message: str, report: NewtonReport):
        super().__init__(message)
        self.report = report


def jacobian(f: Field, x: np.ndarray, fd_step: float = 1e-6) -> np.ndarray:
    """Dense Jacobian by central differences with per-column step
    eps_j = fd_step * max(1, |x_j|)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    f0 = np.asarray(f(x), dtype=float)
    if f0.shape != (n,):
        raise UsageError(f"field must map R^{n} to R^{n}, got output shape {f0.shape}")
    jac = np.empty((n, n))
    for j in range(n):
        eps = fd_step * max(1.0, abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] += eps
        xm[j] -= eps
        fp = f(xp)
        fm = f(xm)
        col = (fp - fm) / (2.0 * eps)
        if not np.all(np.isfinite(col)):
            bad = int(np.flatnonzero(~np.isfinite(col))[0])
            raise NumericalError(
                f"non-finite field evaluation while perturbing state {j} (row {bad})")
        jac[:, j] = col
    return jac


def find_equilibrium(f: Field, x0: np.ndarray, settings: NewtonSettings = NewtonSettings(),
                     *, pin: Sequence[int] = (), scale: np.ndarray | None = None,
                     ) -> tuple[np.ndarray, NewtonReport]:
    """Damped Newton iteration for f(x) = 0.

    ``pin`` lists state indices held at their initial values (their residual
    rows are dropped); ``scale`` holds per-row characteristic rates used to
    normalise the residual before the tolerance test.  Raises
    :class:`ConvergenceError` instead of returning a partial result.
    """
    x = np.array(x0, dtype=float)
    n = x.shape[0]
    if scale is None:
        scale = np.ones(n)
    free = np.array([i for i in range(n) if i not in set(pin)], dtype=int)
    report = NewtonReport(converged=False, iterations=0, residual=float("inf"),
                          pinned=tuple(pin))

    r = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(r)):
        raise NumericalError("non-finite residual at the initial guess")
    res_norm = float(np.max(np.abs(r[free] / scale[free]))) if free.size else 0.0

    for it in range(settings.max_iter):
        if res_norm <= settings.tol:
            report.converged = True
            report.iterations = it
            report.residual = res_norm
            return x, report
        jac = jacobian(f, x, settings.fd_step)
        jr = jac[np.ix_(free, free)]
        report.condition = float(np.linalg.cond(jr))
        try:
            step = np.linalg.solve(jr, -r[free])
        except np.linalg.LinAlgError:
            report.iterations = it
            report.residual = res_norm
            report.message = (
                "singular Newton step; a structurally frozen angle state "
                "likely needs pinning")
            raise ConvergenceError(report.message, report) from None
        # Halve the step until the scaled residual stops growing.
        best = None
        damping = 1.0
        for _ in range(9):
            x_try = x.copy()
            x_try[free] += damping * step
            r_try = np.asarray(f(x_try), dtype=float)
            if np.all(np.isfinite(r_try)):
                norm_try = float(np.max(np.abs(r_try[free] / scale[free])))
                if norm_try < res_norm or best is None:
                    best = (x_try, r_try, norm_try)
                if norm_try < res_norm:
                    break
            damping *= 0.5
        x, r, res_norm = best

    report.iterations = settings.max_iter
    report.residual = res_norm
    if res_norm <= settings.tol:
        report.converged = True
        return x, report
    report.message = (
        f"no convergence after {settings.max_iter} iterations "
        f"(scaled residual {res_norm:.3e} > tol {settings.tol:.1e})")
    raise ConvergenceError(report.message, report)


# ---------------------------------------------------------------------------
# System-aware wrappers
# ---------------------------------------------------------------------------

def residual_scale(model: SystemModel) -> np.ndarray:
    """Characteristic rate magnitude of every residual row, used to make the
    Newton tolerance meaningful across rows spanning six decades."""
    wn = model.nominals.omega_nom
    vn = model.nominals.v_nom
    c1, c2 = (v.control for v in model.vsis)
    scale = {
        "theta1": wn, "theta2": wn, "theta_g": wn,
        "omega1": wn / c1.tau_s, "omega2": wn / c2.tau_s,
        "v1": vn / c1.tau_s, "v2": vn / c2.tau_s,
        "psi1": vn / c1.m, "psi2": vn / c2.m,
        "id1": vn / model.vsis[0].l_l, "iq1": vn / model.vsis[0].l_l,
        "id2": vn / model.vsis[1].l_l, "iq2": vn / model.vsis[1].l_l,
        "id_g": vn / model.grid.l_lg, "iq_g": vn / model.grid.l_lg,
    }
    return np.array([scale[name] for name in model.mode.labels])


def frozen_angle_index(model: SystemModel) -> int | None:
    """Index of the state whose derivative is identically zero under the
    model's frame policy, or None if no row is structurally frozen."""
    if model.frame.anchor is FrameAnchor.VSI1:
        return state_index(model.mode, "theta1")
    if model.mode is Mode.ON_GRID and model.frame.omega_ref == model.nominals.omega_nom:
        return state_index(model.mode, "theta_g")
    return None


def solve_equilibrium(model: SystemModel, x0: SystemState | None = None,
                      settings: NewtonSettings = NewtonSettings(),
                      ) -> tuple[SystemState, NewtonReport]:
    """Newton solve of the system vector field from ``x0`` (flat start by
    default), pinning the structurally frozen angle of the frame policy."""
    if model.mode is Mode.OFF_GRID and model.frame.anchor is not FrameAnchor.VSI1:
        raise UsageError(
            "an off-grid equilibrium generally exists only in the "
            "VSI1-anchored frame; anchor the model before solving")
    if x0 is None:
        x0 = flat_start(model)
    if x0.mode is not model.mode:
        raise UsageError("initial guess mode does not match the model")
    pin = frozen_angle_index(model)
    x, report = find_equilibrium(
        make_field(model), x0.values, settings,
        pin=() if pin is None else (pin,),
        scale=residual_scale(model))
    return SystemState(model.mode, x), report


# ---------------------------------------------------------------------------
# Fixed-step integration
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Sampled fixed-step trajectory; ``rows`` holds observer samples when an
    observer is supplied, raw state copies otherwise."""

    t: np.ndarray
    rows: np.ndarray
    aborted: bool = False
    x_final: np.ndarray = field(default_factory=lambda: np.empty(0))


def _step_euler(f: Field, x: np.ndarray, h: float) -> np.ndarray:
    return x + h * f(x)


def _step_rk4(f: Field, x: np.ndarray, h: float) -> np.ndarray:
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(f: Field, x0: np.ndarray, settings: IntegratorSettings,
              *, t0: float = 0.0, store_every: int = 1,
              observer: Callable[[np.ndarray], tuple] | None = None,
              ) -> Trajectory:
    """Integrate dx/dt = f(x) from t0 to t0 + t_end on a uniform grid.

    Samples are recorded every ``store_every`` steps (always including the
    first and last point).  A state magnitude beyond
    :data:`DIVERGENCE_LIMIT` aborts the run, returning the valid prefix.
    """
    stepper = _step_euler if settings.method is Method.FORWARD_EULER else _step_rk4
    h = settings.h
    n_steps = max(1, int(round(settings.t_end / h)))
    x = np.array(x0, dtype=float)

    times = [t0]
    rows = [observer(x) if observer else x.copy()]
    aborted = False
    for k in range(1, n_steps + 1):
        x = stepper(f, x, h)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > DIVERGENCE_LIMIT:
            aborted = True
            break
        if k % store_every == 0 or k == n_steps:
            times.append(t0 + k * h)
            rows.append(observer(x) if observer else x.copy())
    return Trajectory(t=np.array(times), rows=np.array(rows),
                      aborted=aborted, x_final=x)


# ---------------------------------------------------------------------------
# Mode-transition state remaps
# ---------------------------------------------------------------------------

def islanding_state(x_on: SystemState) -> SystemState:
    """Grid loss: keep the states shared by both layouts, drop the grid angle,
    grid current, and the integral correction states."""
    if x_on.mode is not Mode.ON_GRID:
        raise UsageError("islanding remap expects an on-grid state")
    values = [x_on.get(name) for name in Mode.OFF_GRID.labels]
    return SystemState(Mode.OFF_GRID, np.array(values))


def grid_return_state(x_off: SystemState, model_on: SystemModel) -> SystemState:
    """Grid reconnection with an angle-matched close.

    The grid angle is seeded at the instantaneous PCC voltage angle (what a
    re-synchronization controller matches before closing the breaker), the
    grid current starts at zero, and each integral state is seeded on its
    stationary manifold psi = (v_nom - v_r) / m_int so the voltage dynamics
    stay continuous across the switch.
    """
    if x_off.mode is not Mode.OFF_GRID:
        raise UsageError("grid-return remap expects an off-grid state")
    from .components import pcc_voltage  # local import, avoids a cycle

    vn = model_on.nominals.v_nom
    v_pcc = pcc_voltage(x_off, model_on.vsis, model_on.grid, model_on.load,
                        model_on.nominals)
    values = np.zeros(Mode.ON_GRID.order)
    for name in Mode.OFF_GRID.labels:
        values[state_index(Mode.ON_GRID, name)] = x_off.get(name)
    values[state_index(Mode.ON_GRID, "theta_g")] = math.atan2(v_pcc.q, v_pcc.d)
    for i, name in enumerate(("psi1", "psi2")):
        ctrl = model_on.vsis[i].control
        v_r = x_off.get(f"v{i + 1}")
        values[state_index(Mode.ON_GRID, name)] = (vn - v_r) / ctrl.m_int
    return SystemState(Mode.ON_GRID, values)
