"""Stateless component relations: droop law, source powers, coupling-line and
grid dynamics, and the algebraic PCC voltage mix.

Sign and frame conventions follow :mod:`droopsim.core`.  Inverter powers are
evaluated at the internal source EMF (amplitude v_r behind the coupling
impedance), which is the reduced model obtained once the inner control loops
are abstracted away as an ideal AC voltage source.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .core import (
    ControlParams,
    DqPair,
    GridParams,
    LoadParams,
    Mode,
    Nominals,
    ParameterError,
    VsiParams,
)

# Purely resistive load specs would zero the load inductance and with it the
# 1/L_L term of the PCC algebra; keep a 1 uH floor so the mix stays well-posed.
LOAD_INDUCTANCE_FLOOR = 1e-6


def instantaneous_power(v: DqPair, i: DqPair) -> tuple[float, float]:
    """Instantaneous p, q of a dq voltage/current pair (peak conventions).

    p = (3/2) (v_d i_d + v_q i_q),  q = (3/2) (v_q i_d - v_d i_q).
    """
    p = 1.5 * (v.d * i.d + v.q * i.q)
    q = 1.5 * (v.q * i.d - v.d * i.q)
    return p, q


def source_power(v_r: float, theta: float, i_d: float, i_q: float) -> tuple[float, float]:
    """p, q delivered by a source EMF of amplitude ``v_r`` at angle ``theta``."""
    c, s = math.cos(theta), math.sin(theta)
    p = 1.5 * v_r * (i_d * c + i_q * s)
    q = 1.5 * v_r * (i_d * s - i_q * c)
    return p, q


def droop_setpoints(ctrl: ControlParams, nominals: Nominals,
                    p_avg: float, q_avg: float, psi_q: float,
                    mode: Mode) -> tuple[float, float]:
    """Mode-dependent droop law mapping filtered powers to (omega_r, v_r).

    The power references are gated out on-grid; the integral correction
    psi_q is gated in on-grid only.
    """
    i_gs = mode.i_gs
    omega_r = nominals.omega_nom - ctrl.n * (p_avg - (1 - i_gs) * ctrl.p_ref)
    v_r = (nominals.v_nom
           - ctrl.m * (q_avg - (1 - i_gs) * ctrl.q_ref)
           - i_gs * ctrl.m_int * psi_q)
    return omega_r, v_r


# ---------------------------------------------------------------------------
# PCC algebraic coupling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PccCoefficients:
    """Admittance-mix coefficients of the algebraic PCC voltage.

    The PCC voltage is a weighted combination of every source EMF and branch
    current; the weights are ratios of reciprocal inductances, with the grid
    branch gated by the grid-status bit.
    """

    k_v_g: float
    k_c_g: float
    k_v: tuple[float, float]
    k_c: tuple[float, float]
    k_t: float


def pcc_coefficients(vsis: Sequence[VsiParams], grid: GridParams,
                     load: LoadParams, mode: Mode) -> PccCoefficients:
    if len(vsis) != 2:
        raise ParameterError(f"exactly two inverters expected, got {len(vsis)}")
    i_gs = mode.i_gs
    l_load = max(load.l_load, LOAD_INDUCTANCE_FLOOR)
    rl_ratio = load.r_load / l_load

    k_t = 1.0 / l_load + i_gs / grid.l_lg + sum(1.0 / v.l_l for v in vsis)
    k_v_g = (1.0 / grid.l_lg) / k_t
    k_c_g = (rl_ratio - grid.r_lg / grid.l_lg) / k_t
    k_v = tuple((1.0 / v.l_l) / k_t for v in vsis)
    k_c = tuple((rl_ratio - v.r_l / v.l_l) / k_t for v in vsis)
    return PccCoefficients(k_v_g=k_v_g, k_c_g=k_c_g, k_v=k_v, k_c=k_c, k_t=k_t)


def pcc_voltage_from_parts(coeff: PccCoefficients,
                           sources: Sequence[tuple[float, float]],
                           currents: Sequence[DqPair],
                           grid_source: tuple[float, float] | None,
                           grid_current: DqPair | None,
                           mode: Mode) -> DqPair:
    """PCC voltage given per-branch (amplitude, angle) sources and currents."""
    d = 0.0
    q = 0.0
    if mode is Mode.ON_GRID:
        v_g, theta_g = grid_source
        d += coeff.k_v_g * v_g * math.cos(theta_g) + coeff.k_c_g * grid_current.d
        q += coeff.k_v_g * v_g * math.sin(theta_g) + coeff.k_c_g * grid_current.q
    for (v_r, theta), i, kv, kc in zip(sources, currents, coeff.k_v, coeff.k_c):
        d += kv * v_r * math.cos(theta) + kc * i.d
        q += kv * v_r * math.sin(theta) + kc * i.q
    return DqPair(d, q)


def pcc_voltage(state, vsis: Sequence[VsiParams], grid: GridParams,
                load: LoadParams, nominals: Nominals) -> DqPair:
    """PCC voltage of a full system state (grid terms present on-grid only)."""
    mode = state.mode
    coeff = pcc_coefficients(vsis, grid, load, mode)
    sources = [(state.get("v1"), state.get("theta1")),
               (state.get("v2"), state.get("theta2"))]
    currents = [DqPair(state.get("id1"), state.get("iq1")),
                DqPair(state.get("id2"), state.get("iq2"))]
    if mode is Mode.ON_GRID:
        grid_source = (nominals.v_nom, state.get("theta_g"))
        grid_current = DqPair(state.get("id_g"), state.get("iq_g"))
    else:
        grid_source = None
        grid_current = None
    return pcc_voltage_from_parts(coeff, sources, currents, grid_source,
                                  grid_current, mode)


# ---------------------------------------------------------------------------
# Per-component derivatives
# ---------------------------------------------------------------------------

class VsiStateOff(NamedTuple):
    theta: float
    omega: float
    v_r: float
    i_d: float
    i_q: float


class VsiStateOn(NamedTuple):
    theta: float
    omega: float
    v_r: float
    psi: float
    i_d: float
    i_q: float


class VsiDerivOff(NamedTuple):
    d_theta: float
    d_omega: float
    d_v: float
    d_i_d: float
    d_i_q: float


class VsiDerivOn(NamedTuple):
    d_theta: float
    d_omega: float
    d_v: float
    d_psi: float
    d_i_d: float
    d_i_q: float


class GridDeriv(NamedTuple):
    d_theta: float
    d_i_d: float
    d_i_q: float


def _line_derivatives(v_r: float, theta: float, i_d: float, i_q: float,
                      l_l: float, r_l: float, v_pcc: DqPair,
                      omega_ref: float) -> tuple[float, float]:
    c, s = math.cos(theta), math.sin(theta)
    # Both axes use the common frame rate in the cross-coupling term; an
    # asymmetric rate here would break the algebraic PCC reduction.
    d_i_d = (v_r * c - r_l * i_d - v_pcc.d) / l_l + omega_ref * i_q
    d_i_q = (v_r * s - r_l * i_q - v_pcc.q) / l_l - omega_ref * i_d
    return d_i_d, d_i_q


def vsi_derivatives_offgrid(s: VsiStateOff, ctrl: ControlParams,
                            nominals: Nominals, l_l: float, r_l: float,
                            v_pcc: DqPair, omega_ref: float) -> VsiDerivOff:
    """Off-grid inverter dynamics: droop references carry the power set-points."""
    p, q = source_power(s.v_r, s.theta, s.i_d, s.i_q)
    d_theta = s.omega - omega_ref
    d_omega = (nominals.omega_nom - s.omega - ctrl.n * (p - ctrl.p_ref)) / ctrl.tau_s
    d_v = (nominals.v_nom - s.v_r - ctrl.m * (q - ctrl.q_ref)) / ctrl.tau_s
    d_i_d, d_i_q = _line_derivatives(s.v_r, s.theta, s.i_d, s.i_q,
                                     l_l, r_l, v_pcc, omega_ref)
    return VsiDerivOff(d_theta, d_omega, d_v, d_i_d, d_i_q)


def vsi_derivatives_ongrid(s: VsiStateOn, ctrl: ControlParams,
                           nominals: Nominals, l_l: float, r_l: float,
                           v_pcc: DqPair, omega_ref: float) -> VsiDerivOn:
    """On-grid inverter dynamics: zero power references plus the integral
    voltage correction state."""
    if ctrl.m <= 0.0:
        raise ParameterError("on-grid voltage dynamics require m > 0")
    p, q = source_power(s.v_r, s.theta, s.i_d, s.i_q)
    d_theta = s.omega - omega_ref
    d_omega = (nominals.omega_nom - s.omega - ctrl.n * p) / ctrl.tau_s
    residual = nominals.v_nom - s.v_r - ctrl.m_int * s.psi
    d_psi = residual / ctrl.m
    d_v = (ctrl.k_m * residual - ctrl.m * q) / ctrl.tau_s
    d_i_d, d_i_q = _line_derivatives(s.v_r, s.theta, s.i_d, s.i_q,
                                     l_l, r_l, v_pcc, omega_ref)
    return VsiDerivOn(d_theta, d_omega, d_v, d_psi, d_i_d, d_i_q)


def grid_derivatives(theta_g: float, i_g: DqPair, grid: GridParams,
                     nominals: Nominals, v_pcc: DqPair,
                     omega_ref: float) -> GridDeriv:
    """Stiff-grid branch: source pinned at nominal amplitude and frequency."""
    d_theta = nominals.omega_nom - omega_ref
    d_i_d, d_i_q = _line_derivatives(nominals.v_nom, theta_g, i_g.d, i_g.q,
                                     grid.l_lg, grid.r_lg, v_pcc, omega_ref)
    return GridDeriv(d_theta, d_i_d, d_i_q)


# ---------------------------------------------------------------------------
# Parameter helpers
# ---------------------------------------------------------------------------

def load_from_power(p: float, q: float, v_ll_rms: float,
                    omega: float) -> LoadParams:
    """Series R-L load drawing (p, q) three-phase at the rated L-L voltage.

    |Z| = V_LL^2 / |S|, split into R and X in proportion to p and q; purely
    resistive specs land on the inductance floor.
    """
    if not (p > 0.0):
        raise ParameterError(f"load active power must be positive, got {p}")
    if q < 0.0:
        raise ParameterError(f"load reactive power must be non-negative, got {q}")
    if not (v_ll_rms > 0.0 and omega > 0.0):
        raise ParameterError("load rating needs positive voltage and frequency")
    s_mag = math.hypot(p, q)
    z_mag = v_ll_rms * v_ll_rms / s_mag
    r = z_mag * p / s_mag
    x = z_mag * q / s_mag
    l = max(x / omega, LOAD_INDUCTANCE_FLOOR)
    return LoadParams(r_load=r, l_load=l)


def load_power_rating(load: LoadParams, v_ll_rms: float,
                      omega: float) -> tuple[float, float]:
    """Complex power the load draws at the rated voltage (inverse of
    :func:`load_from_power`, used as its independent check)."""
    z = complex(load.r_load, omega * load.l_load)
    s = v_ll_rms * v_ll_rms / z.conjugate()
    return s.real, s.imag


def inner_loop_current_gains(l_f: float, r_f: float,
                             tau_c: float) -> tuple[float, float]:
    """PI gains of the inner current loop for a first-order L-R plant:
    k_pc = L_f / tau_c, k_ic = R_f / tau_c."""
    if not (tau_c > 0.0):
        raise ParameterError(f"tau_c must be positive, got {tau_c}")
    if not (5e-4 <= tau_c <= 2e-3):
        warnings.warn(
            f"current-loop time constant {tau_c} s outside the usual 0.5-2 ms band",
            stacklevel=2)
    return l_f / tau_c, r_f / tau_c
