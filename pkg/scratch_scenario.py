"""Smoke-run the canonical scenario."""
import time

import numpy as np

from droopsim import (
    ControlParams, GridParams, IntegratorSettings, Method, Mode, Nominals,
    ReferenceFrame, SystemModel, VsiParams, load_from_power,
)
from droopsim.scenario import CANONICAL_T_END, canonical_events, run_scenario

nom = Nominals.from_ratings(480.0, 60.0)
ctrl = ControlParams(n=2.08e-5, m=208.3e-6, m_int=0.67e-3, tau_s=0.033,
                     p_ref=102e3, q_ref=63.214e3, p_rated=102e3, q_rated=63.214e3)
vsi = VsiParams(control=ctrl, l_l=215e-6, r_l=0.55e-3)
grid = GridParams(l_lg=30e-6, r_lg=5e-3)
load0 = load_from_power(500e3, 220e3, 480.0, nom.omega_nom)
model = SystemModel(vsis=(vsi, vsi), grid=grid, load=load0, nominals=nom,
                    frame=ReferenceFrame.fixed_nominal(nom), mode=Mode.ON_GRID)

t0 = time.perf_counter()
res = run_scenario(model, canonical_events(),
                   IntegratorSettings(method=Method.FORWARD_EULER, h=1e-5,
                                      t_end=CANONICAL_T_END))
print(f"runtime: {time.perf_counter() - t0:.1f} s, samples: {res.timeseries.data.shape}")

ts = res.timeseries
t = ts.t
igs = ts.column("i_gs")
for name in ("p_1", "p_2", "q_1", "q_2", "p_grid", "v_pcc_rms_ll", "frequency"):
    col = ts.column(name)
    print(f"{name:13s} min={col.min():12.2f} max={col.max():12.2f}")

on = igs == 1.0
off = ~on
print("\non-grid VSI power max |p_i|:", np.abs(ts.column("p_1")[on]).max(),
      " pu:", np.abs(ts.column("p_1")[on]).max() / 120e3)
print("off-grid sharing: max |p1-p2|/p1:",
      np.max(np.abs(ts.column("p_1")[off] - ts.column("p_2")[off])
             / np.maximum(np.abs(ts.column("p_1")[off]), 1.0)))
print("v_pcc band: min", ts.column("v_pcc_rms_ll").min() / 480 - 1,
      "max", ts.column("v_pcc_rms_ll").max() / 480 - 1)
offmask = off & (t > 3.0) & (t < 3.9)
print("off-grid freq dev at 250kW:", np.abs(ts.column("frequency")[offmask] - 60).max())
print("\nsettling metrics:")
for m in res.metrics:
    print(f"  t={m.event_t:5.2f} {m.signal:13s} settled={m.settled} "
          f"t_settle={m.settling_time}  steady={m.steady_value:12.2f}")
print("\nenergy bookkeeping: max rel |p_load - igs*p_grid - p1 - p2|:")
bal = ts.column("p_load") - igs * ts.column("p_grid") - ts.column("p_1") - ts.column("p_2")
print(np.max(np.abs(bal) / np.maximum(np.abs(ts.column("p_load")), 1.0)))
