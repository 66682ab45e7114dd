"""Assembly of the component relations into autonomous system vector fields.

On-grid the state is 15-dimensional (two 6th-order inverters sharing angle/
frequency/voltage/integral/current states, plus the 3rd-order stiff-grid
branch); off-grid it is 10-dimensional.  The PCC voltage is algebraic, so the
composed model is a plain ODE in either mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import components as comp
from .core import (
    DqPair,
    FrameAnchor,
    GridParams,
    LoadParams,
    Mode,
    Nominals,
    ReferenceFrame,
    SystemState,
    UsageError,
    VsiParams,
    flat_start as _flat_start_state,
)

# State layout indices (see core.SystemState docstring).
_ON = {n: i for i, n in enumerate(Mode.ON_GRID.labels)}
_OFF = {n: i for i, n in enumerate(Mode.OFF_GRID.labels)}


@dataclass(frozen=True)
class SystemModel:
    """Immutable bundle of everything the vector field needs."""

    vsis: tuple[VsiParams, VsiParams]
    grid: GridParams
    load: LoadParams
    nominals: Nominals
    frame: ReferenceFrame
    mode: Mode

    def __post_init__(self):
        if len(self.vsis) != 2:
            raise UsageError("SystemModel is defined for exactly two inverters")

    def with_mode(self, mode: Mode, frame: ReferenceFrame | None = None) -> "SystemModel":
        return replace(self, mode=mode, frame=frame if frame is not None else self.frame)

    def with_load(self, load: LoadParams) -> "SystemModel":
        return replace(self, load=load)

    def with_frame(self, frame: ReferenceFrame) -> "SystemModel":
        return replace(self, frame=frame)


def flat_start(model: SystemModel) -> SystemState:
    return _flat_start_state(model.mode, model.nominals)


def make_field(model: SystemModel) -> Callable[[np.ndarray], np.ndarray]:
    """Compile the model into a fast ``f(x) -> dx`` closure on raw arrays.

    The closure inlines the component equations; a regression test pins it
    against the compositional per-component functions.
    """
    v1p, v2p = model.vsis
    c1p, c2p = v1p.control, v2p.control
    n1, m1, tau1, pref1, qref1 = c1p.n, c1p.m, c1p.tau_s, c1p.p_ref, c1p.q_ref
    n2, m2, tau2, pref2, qref2 = c2p.n, c2p.m, c2p.tau_s, c2p.p_ref, c2p.q_ref
    mint1, mint2 = c1p.m_int, c2p.m_int
    km1, km2 = c1p.k_m, c2p.k_m
    ll1, rl1 = v1p.l_l, v1p.r_l
    ll2, rl2 = v2p.l_l, v2p.r_l
    llg, rlg = model.grid.l_lg, model.grid.r_lg
    wn = model.nominals.omega_nom
    vn = model.nominals.v_nom
    anchored = model.frame.anchor is FrameAnchor.VSI1
    wref0 = model.frame.omega_ref

    k = comp.pcc_coefficients(model.vsis, model.grid, model.load, model.mode)
    kv1, kv2 = k.k_v
    kc1, kc2 = k.k_c
    kvg, kcg = k.k_v_g, k.k_c_g

    cos, sin = math.cos, math.sin

    if model.mode is Mode.ON_GRID:

        def field(x: np.ndarray) -> np.ndarray:
            (th1, th2, thg, w1, w2, v1, v2, ps1, ps2,
             id1, id2, idg, iq1, iq2, iqg) = x
            wref = w1 if anchored else wref0
            c1, s1 = cos(th1), sin(th1)
            c2, s2 = cos(th2), sin(th2)
            cg, sg = cos(thg), sin(thg)
            vpd = kvg * vn * cg + kcg * idg + kv1 * v1 * c1 + kc1 * id1 \
                + kv2 * v2 * c2 + kc2 * id2
            vpq = kvg * vn * sg + kcg * iqg + kv1 * v1 * s1 + kc1 * iq1 \
                + kv2 * v2 * s2 + kc2 * iq2
            p1 = 1.5 * v1 * (id1 * c1 + iq1 * s1)
            q1 = 1.5 * v1 * (id1 * s1 - iq1 * c1)
            p2 = 1.5 * v2 * (id2 * c2 + iq2 * s2)
            q2 = 1.5 * v2 * (id2 * s2 - iq2 * c2)
            res1 = vn - v1 - mint1 * ps1
            res2 = vn - v2 - mint2 * ps2
            return np.array([
                w1 - wref,
                w2 - wref,
                wn - wref,
                (wn - w1 - n1 * p1) / tau1,
                (wn - w2 - n2 * p2) / tau2,
                (km1 * res1 - m1 * q1) / tau1,
                (km2 * res2 - m2 * q2) / tau2,
                res1 / m1,
                res2 / m2,
                (v1 * c1 - rl1 * id1 - vpd) / ll1 + wref * iq1,
                (v2 * c2 - rl2 * id2 - vpd) / ll2 + wref * iq2,
                (vn * cg - rlg * idg - vpd) / llg + wref * iqg,
                (v1 * s1 - rl1 * iq1 - vpq) / ll1 - wref * id1,
                (v2 * s2 - rl2 * iq2 - vpq) / ll2 - wref * id2,
                (vn * sg - rlg * iqg - vpq) / llg - wref * idg,
            ])

    else:

        def field(x: np.ndarray) -> np.ndarray:
            th1, th2, w1, w2, v1, v2, id1, id2, iq1, iq2 = x
            wref = w1 if anchored else wref0
            c1, s1 = cos(th1), sin(th1)
            c2, s2 = cos(th2), sin(th2)
            vpd = kv1 * v1 * c1 + kc1 * id1 + kv2 * v2 * c2 + kc2 * id2
            vpq = kv1 * v1 * s1 + kc1 * iq1 + kv2 * v2 * s2 + kc2 * iq2
            p1 = 1.5 * v1 * (id1 * c1 + iq1 * s1)
            q1 = 1.5 * v1 * (id1 * s1 - iq1 * c1)
            p2 = 1.5 * v2 * (id2 * c2 + iq2 * s2)
            q2 = 1.5 * v2 * (id2 * s2 - iq2 * c2)
            return np.array([
                w1 - wref,
                w2 - wref,
                (wn - w1 - n1 * (p1 - pref1)) / tau1,
                (wn - w2 - n2 * (p2 - pref2)) / tau2,
                (vn - v1 - m1 * (q1 - qref1)) / tau1,
                (vn - v2 - m2 * (q2 - qref2)) / tau2,
                (v1 * c1 - rl1 * id1 - vpd) / ll1 + wref * iq1,
                (v2 * c2 - rl2 * id2 - vpd) / ll2 + wref * iq2,
                (v1 * s1 - rl1 * iq1 - vpq) / ll1 - wref * id1,
                (v2 * s2 - rl2 * iq2 - vpq) / ll2 - wref * id2,
            ])

    return field


def vector_field(model: SystemModel, state: SystemState) -> np.ndarray:
    """Rate vector in the same layout as the state (mode must match)."""
    if state.mode is not model.mode:
        raise UsageError(
            f"state is {state.mode.value}-grid but model is {model.mode.value}-grid")
    return make_field(model)(state.values)


# ---------------------------------------------------------------------------
# Output map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Outputs:
    """Measured signals.

    Measurement boundary: inverter powers are evaluated at the internal
    source EMF (they include the coupling-line loss), while grid and load
    powers are evaluated at the PCC.  At the PCC node the current balance
    makes load power equal the sum of PCC-side injections exactly.
    """

    p: tuple[float, float]
    q: tuple[float, float]
    p_filtered: tuple[float, float]
    q_filtered: tuple[float, float]
    p_grid: float
    q_grid: float
    p_load: float
    q_load: float
    v_pcc: DqPair
    v_pcc_rms_ll: float
    frequency: float
    i_gs: int


def outputs(model: SystemModel, state: SystemState) -> Outputs:
    if state.mode is not model.mode:
        raise UsageError(
            f"state is {state.mode.value}-grid but model is {model.mode.value}-grid")
    row = make_output_row(model)(state.values)
    return Outputs(p=(row[0], row[1]), q=(row[2], row[3]),
                   p_filtered=(row[12], row[13]), q_filtered=(row[14], row[15]),
                   p_grid=row[4], q_grid=row[5], p_load=row[6], q_load=row[7],
                   v_pcc=DqPair(row[10], row[11]), v_pcc_rms_ll=row[8],
                   frequency=row[9], i_gs=model.mode.i_gs)


#: Column ordering produced by :func:`make_output_row`.  The ``p_f``/``q_f``
#: entries are the low-pass-filtered powers implied by the droop states (the
#: controller's own measurement), reconstructed by inverting the droop law.
OUTPUT_ROW = ("p_1", "p_2", "q_1", "q_2", "p_grid", "q_grid",
              "p_load", "q_load", "v_pcc_rms_ll", "frequency",
              "v_pcc_d", "v_pcc_q", "p_f_1", "p_f_2", "q_f_1", "q_f_2")

_RMS_LL = math.sqrt(3.0) / math.sqrt(2.0)


def make_output_row(model: SystemModel) -> Callable[[np.ndarray], tuple]:
    """Compile an output sampler ``x -> row`` matching :data:`OUTPUT_ROW`."""
    v1p, v2p = model.vsis
    k = comp.pcc_coefficients(model.vsis, model.grid, model.load, model.mode)
    kv1, kv2 = k.k_v
    kc1, kc2 = k.k_c
    kvg, kcg = k.k_v_g, k.k_c_g
    vn = model.nominals.v_nom
    wn = model.nominals.omega_nom
    f_nom = model.nominals.f_nom
    c1p, c2p = v1p.control, v2p.control
    on = model.mode is Mode.ON_GRID
    cos, sin = math.cos, math.sin
    two_pi = 2.0 * math.pi

    def sample(x: np.ndarray) -> tuple:
        ps1 = ps2 = 0.0
        if on:
            (th1, th2, thg, w1, w2, v1, v2, ps1, ps2,
             id1, id2, idg, iq1, iq2, iqg) = x
        else:
            th1, th2, w1, w2, v1, v2, id1, id2, iq1, iq2 = x
        c1, s1 = cos(th1), sin(th1)
        c2, s2 = cos(th2), sin(th2)
        vpd = kv1 * v1 * c1 + kc1 * id1 + kv2 * v2 * c2 + kc2 * id2
        vpq = kv1 * v1 * s1 + kc1 * iq1 + kv2 * v2 * s2 + kc2 * iq2
        if on:
            cg, sg = cos(thg), sin(thg)
            vpd += kvg * vn * cg + kcg * idg
            vpq += kvg * vn * sg + kcg * iqg
            il_d = idg + id1 + id2
            il_q = iqg + iq1 + iq2
            p_grid = 1.5 * (vpd * idg + vpq * iqg)
            q_grid = 1.5 * (vpq * idg - vpd * iqg)
            freq = f_nom
        else:
            il_d = id1 + id2
            il_q = iq1 + iq2
            p_grid = 0.0
            q_grid = 0.0
            freq = w1 / two_pi
        p1 = 1.5 * v1 * (id1 * c1 + iq1 * s1)
        q1 = 1.5 * v1 * (id1 * s1 - iq1 * c1)
        p2 = 1.5 * v2 * (id2 * c2 + iq2 * s2)
        q2 = 1.5 * v2 * (id2 * s2 - iq2 * c2)
        p_load = 1.5 * (vpd * il_d + vpq * il_q)
        q_load = 1.5 * (vpq * il_d - vpd * il_q)
        v_rms_ll = _RMS_LL * math.hypot(vpd, vpq)
        # Filtered powers via the inverted droop law; the integral term and
        # the power references are gated by the mode.
        i_gs = 1 if on else 0
        p_f1 = (wn - w1) / c1p.n + (1 - i_gs) * c1p.p_ref
        p_f2 = (wn - w2) / c2p.n + (1 - i_gs) * c2p.p_ref
        q_f1 = (vn - v1 - i_gs * c1p.m_int * ps1) / c1p.m + (1 - i_gs) * c1p.q_ref
        q_f2 = (vn - v2 - i_gs * c2p.m_int * ps2) / c2p.m + (1 - i_gs) * c2p.q_ref
        return (p1, p2, q1, q2, p_grid, q_grid, p_load, q_load,
                v_rms_ll, freq, vpd, vpq, p_f1, p_f2, q_f1, q_f2)

    return sample


# ---------------------------------------------------------------------------
# Frame-invariant coordinates
# ---------------------------------------------------------------------------

def frame_invariant_coords(state: SystemState) -> np.ndarray:
    """Gauge-invariant coordinates: angle differences to the first inverter
    plus all current pairs rotated back by its angle.

    Absolute angles ramp in an unanchored frame when the islanded frequency
    departs from nominal; comparisons between trajectories and equilibria
    must happen in these coordinates.
    """
    th1 = state.get("theta1")
    c, s = math.cos(-th1), math.sin(-th1)

    def rot(d, q):
        return (d * c - q * s, d * s + q * c)

    vals = [state.get("theta2") - th1,
            state.get("omega1"), state.get("omega2"),
            state.get("v1"), state.get("v2")]
    if state.mode is Mode.ON_GRID:
        vals.insert(1, state.get("theta_g") - th1)
        vals += [state.get("psi1"), state.get("psi2")]
        vals += rot(state.get("id_g"), state.get("iq_g"))
    vals += rot(state.get("id1"), state.get("iq1"))
    vals += rot(state.get("id2"), state.get("iq2"))
    return np.array(vals)
