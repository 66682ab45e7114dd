"""Assembled vector fields: composition, symmetry, balance, gauge invariance."""

import math

import numpy as np
import pytest

from droopsim import (
    DqPair,
    Mode,
    Nominals,
    SystemState,
    UsageError,
    outputs,
    solve_equilibrium,
    vector_field,
)
from droopsim.components import (
    grid_derivatives,
    pcc_voltage,
    vsi_derivatives_offgrid,
    vsi_derivatives_ongrid,
    VsiStateOff,
    VsiStateOn,
)
from droopsim.core import ReferenceFrame, state_index
from droopsim.system import frame_invariant_coords, make_field


def _compose_field(model, state):
    """Reference implementation: compose the per-component relations."""
    vpcc = pcc_voltage(state, model.vsis, model.grid, model.load, model.nominals)
    omega_ref = model.frame.rate(state.get("omega1"))
    rows = {}
    for i in (1, 2):
        vsi = model.vsis[i - 1]
        if model.mode is Mode.ON_GRID:
            s = VsiStateOn(state.get(f"theta{i}"), state.get(f"omega{i}"),
                           state.get(f"v{i}"), state.get(f"psi{i}"),
                           state.get(f"id{i}"), state.get(f"iq{i}"))
            d = vsi_derivatives_ongrid(s, vsi.control, model.nominals,
                                       vsi.l_l, vsi.r_l, vpcc, omega_ref)
            rows[f"psi{i}"] = d.d_psi
        else:
            s = VsiStateOff(state.get(f"theta{i}"), state.get(f"omega{i}"),
                            state.get(f"v{i}"), state.get(f"id{i}"),
                            state.get(f"iq{i}"))
            d = vsi_derivatives_offgrid(s, vsi.control, model.nominals,
                                        vsi.l_l, vsi.r_l, vpcc, omega_ref)
        rows[f"theta{i}"] = d.d_theta
        rows[f"omega{i}"] = d.d_omega
        rows[f"v{i}"] = d.d_v
        rows[f"id{i}"] = d.d_i_d
        rows[f"iq{i}"] = d.d_i_q
    if model.mode is Mode.ON_GRID:
        g = grid_derivatives(state.get("theta_g"),
                             DqPair(state.get("id_g"), state.get("iq_g")),
                             model.grid, model.nominals, vpcc, omega_ref)
        rows["theta_g"] = g.d_theta
        rows["id_g"] = g.d_i_d
        rows["iq_g"] = g.d_i_q
    return np.array([rows[name] for name in model.mode.labels])


def _random_state(mode, nominals, rng):
    values = rng.normal(scale=0.2, size=mode.order)
    for name in ("omega1", "omega2"):
        values[state_index(mode, name)] = nominals.omega_nom + rng.normal(scale=1.0)
    for name in ("v1", "v2"):
        values[state_index(mode, name)] = nominals.v_nom * (1 + rng.normal(scale=0.02))
    for name in mode.labels:
        if name.startswith(("id", "iq")):
            values[state_index(mode, name)] = rng.normal(scale=300.0)
        if name.startswith("psi"):
            values[state_index(mode, name)] = rng.normal(scale=5e3)
    return SystemState(mode, values)


class TestVectorField:
    @pytest.mark.parametrize("mode", [Mode.ON_GRID, Mode.OFF_GRID])
    def test_matches_component_composition(self, cfg, mode):
        model = cfg.model(mode)
        rng = np.random.default_rng(7)
        for _ in range(12):
            state = _random_state(mode, model.nominals, rng)
            got = vector_field(model, state)
            expected = _compose_field(model, state)
            np.testing.assert_allclose(got, expected, rtol=1e-11, atol=1e-8)

    def test_mode_mismatch_rejected(self, cfg, x_on_eq):
        model_off = cfg.model(Mode.OFF_GRID)
        with pytest.raises(UsageError):
            vector_field(model_off, x_on_eq)

    def test_equilibrium_annihilates_field(self, model_on, x_on_eq):
        f = vector_field(model_on, x_on_eq)
        # Scale-aware check: residual rows span several decades.
        from droopsim.solver import residual_scale
        assert np.max(np.abs(f / residual_scale(model_on))) < 1e-9

    def test_symmetric_state_symmetric_rates(self, cfg):
        model = cfg.model(Mode.OFF_GRID)
        rng = np.random.default_rng(3)
        state = _random_state(Mode.OFF_GRID, model.nominals, rng)
        sym = state.replace(theta2=state.get("theta1"),
                            omega2=state.get("omega1"),
                            v2=state.get("v1"),
                            id2=state.get("id1"), iq2=state.get("iq1"))
        f = vector_field(model, sym)

        def row(name):
            return f[state_index(Mode.OFF_GRID, name)]

        assert row("theta1") == row("theta2")
        assert row("omega1") == row("omega2")
        assert row("v1") == row("v2")
        assert row("id1") == row("id2")
        assert row("iq1") == row("iq2")

    def test_unloaded_open_circuit_fixed_point(self, cfg):
        # Huge load impedance, zero refs: nominal flat state is stationary.
        from dataclasses import replace as dc_replace
        from droopsim import LoadParams
        from droopsim.core import flat_start

        model = cfg.model(Mode.OFF_GRID, load=LoadParams(r_load=1e9, l_load=1e6))
        vsis = tuple(dc_replace(v, control=dc_replace(v.control, p_ref=0.0, q_ref=0.0))
                     for v in model.vsis)
        model = dc_replace(model, vsis=vsis,
                           frame=ReferenceFrame.fixed_nominal(model.nominals))
        x = flat_start(Mode.OFF_GRID, model.nominals)
        f = vector_field(model, x)
        from droopsim.solver import residual_scale
        assert np.max(np.abs(f / residual_scale(model))) < 1e-9

    @pytest.mark.parametrize("mode", [Mode.ON_GRID, Mode.OFF_GRID])
    def test_rotational_equivariance(self, cfg, mode):
        # Shifting every angle by a constant and rotating every current pair
        # by the same angle maps rates onto equally rotated rates.
        model = cfg.model(mode)
        if mode is Mode.OFF_GRID:
            model = model.with_frame(ReferenceFrame.fixed_nominal(model.nominals))
        rng = np.random.default_rng(11)
        state = _random_state(mode, model.nominals, rng)
        alpha = 0.7
        c, s = math.cos(alpha), math.sin(alpha)

        def gauge(st):
            updates = {}
            names = ["theta1", "theta2"] + (["theta_g"] if mode is Mode.ON_GRID else [])
            for name in names:
                updates[name] = st.get(name) + alpha
            pairs = [("id1", "iq1"), ("id2", "iq2")]
            if mode is Mode.ON_GRID:
                pairs.append(("id_g", "iq_g"))
            for dn, qn in pairs:
                d, q = st.get(dn), st.get(qn)
                updates[dn] = d * c - q * s
                updates[qn] = d * s + q * c
            return st.replace(**updates)

        f0 = vector_field(model, state)
        f1 = vector_field(model, gauge(state))
        expected = f0.copy()
        pairs = [("id1", "iq1"), ("id2", "iq2")]
        if mode is Mode.ON_GRID:
            pairs.append(("id_g", "iq_g"))
        for dn, qn in pairs:
            i, j = state_index(mode, dn), state_index(mode, qn)
            expected[i] = f0[i] * c - f0[j] * s
            expected[j] = f0[i] * s + f0[j] * c
        np.testing.assert_allclose(f1, expected, rtol=1e-8, atol=1e-7)


class TestOutputs:
    def test_zero_current_zero_power(self, cfg):
        from droopsim.core import flat_start

        model = cfg.model(Mode.OFF_GRID)
        x = flat_start(Mode.OFF_GRID, model.nominals)
        o = outputs(model, x)
        assert o.p == (0.0, 0.0)
        assert o.q == (0.0, 0.0)

    def test_ongrid_equilibrium_balance(self, model_on, x_on_eq):
        o = outputs(model_on, x_on_eq)
        assert abs(o.p[0]) < 1e-6 * 120e3
        assert abs(o.p_grid - o.p_load) <= 1e-6 * abs(o.p_load)
        assert abs(o.q_grid - o.q_load) <= 1e-6 * abs(o.q_load)
        assert o.frequency == pytest.approx(60.0)
        assert o.i_gs == 1

    def test_offgrid_equal_sharing(self, model_off, x_off_eq):
        o = outputs(model_off, x_off_eq)
        assert o.p[0] == pytest.approx(o.p[1], rel=1e-9)
        assert o.p[0] + o.p[1] == pytest.approx(o.p_load, rel=1e-3)
        assert o.i_gs == 0

    def test_offgrid_sharing_identities(self, cfg):
        # Weighted active sharing holds whenever the weighted references
        # match; here n_2 = 2 n_1 with p_ref halved.
        from dataclasses import replace as dc_replace

        model = cfg.model(Mode.OFF_GRID, load=cfg.load_params(250e3, 100e3))
        v1, v2 = model.vsis
        ctrl2 = dc_replace(v2.control, n=2 * v2.control.n,
                           p_ref=0.5 * v2.control.p_ref)
        model = dc_replace(model, vsis=(v1, dc_replace(v2, control=ctrl2)))
        x_eq, _ = solve_equilibrium(model)
        o = outputs(model, x_eq)
        lhs = v1.control.n * o.p[0]
        rhs = ctrl2.n * o.p[1]
        assert lhs == pytest.approx(rhs, rel=5e-3)
        # Frequency synchronization identity.
        assert x_eq.get("omega1") == pytest.approx(x_eq.get("omega2"), abs=1e-9)

    def test_filtered_matches_instantaneous_at_equilibrium(self, model_off, x_off_eq):
        o = outputs(model_off, x_off_eq)
        assert o.p_filtered[0] == pytest.approx(o.p[0], rel=1e-6)
        assert o.q_filtered[1] == pytest.approx(o.q[1], rel=1e-6)


class TestFrameInvariantCoords:
    def test_gauge_shift_invariance(self, cfg):
        model = cfg.model(Mode.OFF_GRID)
        rng = np.random.default_rng(5)
        state = _random_state(Mode.OFF_GRID, model.nominals, rng)
        alpha = 1.1
        c, s = math.cos(alpha), math.sin(alpha)
        shifted = state.replace(
            theta1=state.get("theta1") + alpha,
            theta2=state.get("theta2") + alpha,
            id1=state.get("id1") * c - state.get("iq1") * s,
            iq1=state.get("id1") * s + state.get("iq1") * c,
            id2=state.get("id2") * c - state.get("iq2") * s,
            iq2=state.get("id2") * s + state.get("iq2") * c)
        np.testing.assert_allclose(frame_invariant_coords(shifted),
                                   frame_invariant_coords(state),
                                   rtol=1e-9, atol=1e-9)
