"""Exploratory run: equilibria, powers, voltages (not part of the package)."""
import math
import time

import numpy as np

from droopsim import (
    ControlParams, FilterParams, GridParams, Mode, Nominals, ReferenceFrame,
    SystemModel, VsiParams, load_from_power, outputs, solve_equilibrium,
)
from droopsim.solver import islanding_state
from droopsim.system import make_field, flat_start

nom = Nominals.from_ratings(480.0, 60.0)
print("v_nom peak phase:", nom.v_nom, "omega:", nom.omega_nom)

ctrl = ControlParams(
    n=2.08e-5, m=208.3e-6, m_int=0.67e-3, tau_s=0.033,
    p_ref=102e3, q_ref=63.214e3, p_rated=102e3, q_rated=63.214e3)
vsi = VsiParams(control=ctrl, l_l=215e-6, r_l=0.55e-3,
                filter=FilterParams(l_f=150e-6, r_f=0.0, c_f=110e-6))
grid = GridParams(l_lg=30e-6, r_lg=5e-3)
load_full = load_from_power(500e3, 220e3, 480.0, nom.omega_nom)
print("load 500/220:", load_full)

model_on = SystemModel(vsis=(vsi, vsi), grid=grid, load=load_full,
                       nominals=nom, frame=ReferenceFrame.fixed_nominal(nom),
                       mode=Mode.ON_GRID)

t0 = time.perf_counter()
x_eq, rep = solve_equilibrium(model_on)
dt = time.perf_counter() - t0
print(f"on-grid newton: iters={rep.iterations} res={rep.residual:.2e} time={dt*1e3:.1f} ms")
out = outputs(model_on, x_eq)
print("P_i:", out.p, "Q_i:", out.q)
print("p_grid:", out.p_grid, "p_load:", out.p_load, "rel err:",
      abs(out.p_grid - out.p_load) / abs(out.p_load))
print("q_grid:", out.q_grid, "q_load:", out.q_load)
print("v_pcc_rms_ll:", out.v_pcc_rms_ll, "deviation:",
      1 - out.v_pcc_rms_ll / 480.0)
print("theta_g:", x_eq.get("theta_g"), "theta1:", x_eq.get("theta1"),
      "v1:", x_eq.get("v1"))
print("i_g:", x_eq.get("id_g"), x_eq.get("iq_g"))

# Off-grid: critical load 250 kW / 100 kVAr, anchored frame
load_crit = load_from_power(250e3, 100e3, 480.0, nom.omega_nom)
model_off = SystemModel(vsis=(vsi, vsi), grid=grid, load=load_crit,
                        nominals=nom, frame=ReferenceFrame.vsi1_anchored(nom),
                        mode=Mode.OFF_GRID)
x_off, rep2 = solve_equilibrium(model_off)
print(f"\noff-grid newton: iters={rep2.iterations} res={rep2.residual:.2e}")
out2 = outputs(model_off, x_off)
print("P_i:", out2.p, "Q_i:", out2.q)
print("p_load:", out2.p_load, "sum P_i:", sum(out2.p))
print("v_pcc_rms_ll:", out2.v_pcc_rms_ll, "dev:", 1 - out2.v_pcc_rms_ll / 480)
print("freq:", out2.frequency, "dev:", out2.frequency - 60)
print("omega1:", x_off.get("omega1"), "omega2:", x_off.get("omega2"))
print("droop identity: n(P1-pref) =", ctrl.n * (out2.p[0] - ctrl.p_ref),
      "omega dev =", x_off.get("omega1") - nom.omega_nom)

# islanding start from on-grid equilibrium: check residual magnitude
x_init = islanding_state(x_eq)
f_off = make_field(model_off)
print("\n|f_off(x_init)| rows:", np.max(np.abs(f_off(x_init.values))))

# off-grid at 200/80
load_low = load_from_power(200e3, 80e3, 480.0, nom.omega_nom)
model_off2 = model_off.with_load(load_low)
x_off2, _ = solve_equilibrium(model_off2)
out3 = outputs(model_off2, x_off2)
print("\noff-grid 200/80: P_i:", out3.p, "freq dev:", out3.frequency - 60,
      "v dev:", 1 - out3.v_pcc_rms_ll / 480)
