"""How does the X/R line angle change the destabilization picture?"""
import numpy as np

from droopsim import (
    ControlParams, GridParams, Mode, Nominals, ReferenceFrame, SystemModel,
    VsiParams, load_from_power,
)
from droopsim.smallsignal import apply_parameter, parameter_sweep

nom = Nominals.from_ratings(480.0, 60.0)
ctrl = ControlParams(n=2.08e-5, m=208.3e-6, m_int=0.67e-3, tau_s=0.033,
                     p_ref=102e3, q_ref=63.214e3, p_rated=102e3, q_rated=63.214e3)
vsi = VsiParams(control=ctrl, l_l=215e-6, r_l=0.55e-3)
grid = GridParams(l_lg=30e-6, r_lg=5e-3)
load_full = load_from_power(500e3, 220e3, 480.0, nom.omega_nom)
load_crit = load_from_power(250e3, 100e3, 480.0, nom.omega_nom)

model_on = SystemModel(vsis=(vsi, vsi), grid=grid, load=load_full, nominals=nom,
                       frame=ReferenceFrame.fixed_nominal(nom), mode=Mode.ON_GRID)
model_off = SystemModel(vsis=(vsi, vsi), grid=grid, load=load_crit, nominals=nom,
                        frame=ReferenceFrame.vsi1_anchored(nom), mode=Mode.OFF_GRID)

# X/R sweep at selected control values (the instability study the figures pair
# with the gain sweeps)
for name, model in (("ON", model_on), ("OFF", model_off)):
    sweep = parameter_sweep(model, "x_over_r", np.geomspace(0.2, 137, 16))
    print(f"== {name} x_over_r sweep (|Z| fixed)")
    for v, a in zip(sweep.values, sweep.abscissa):
        print(f"   X/R={v:8.3f}  abscissa={a:10.4f}")

# n sweep at a line angle inside the studied X/R band
for xr in (3.0, 1.0, 0.33):
    for name, model in (("ON", model_on), ("OFF", model_off)):
        base = apply_parameter(model, "x_over_r", xr)
        vals = np.geomspace(1.04e-5, 3.64e-5 * 30, 20)
        sweep = parameter_sweep(base, "n", vals)
        a = sweep.abscissa
        pos = np.flatnonzero(np.isfinite(a) & (a > 0))
        first = f"{sweep.values[pos[0]]:.3e} (ratio {sweep.values[pos[0]]/3.64e-5:.2f})" if pos.size else "none"
        print(f"X/R={xr:5.2f} {name}: abscissa {a[0]:8.3f} .. {a[-1] if np.isfinite(a[-1]) else float('nan'):8.3f}  first crossing: {first}")
