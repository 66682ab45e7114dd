"""m / tau_s crossings at the resistive line angle; m_int flatness off-grid."""
import numpy as np

from droopsim import (
    ControlParams, GridParams, Mode, Nominals, ReferenceFrame, SystemModel,
    VsiParams, load_from_power,
)
from droopsim.smallsignal import apply_parameter, find_critical, parameter_sweep

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

bounds = {"n": (1.04e-5, 3.64e-5), "m": (41.67e-6, 416.6e-6),
          "tau_s": (24.7e-3, 41.2e-3)}

for name, model in (("ON", model_on), ("OFF", model_off)):
    base = apply_parameter(model, "x_over_r", 0.33)
    for par in ("n", "m", "tau_s"):
        lb, ub = bounds[par]
        vals = np.geomspace(lb, ub * 30, 24)
        sweep = parameter_sweep(base, par, vals)
        a = sweep.abscissa
        pos = np.flatnonzero(np.isfinite(a) & (a > 0))
        msg = "none"
        if pos.size:
            k = pos[0]
            msg = f"{sweep.values[k]:.3e} ({sweep.values[k]/ub:.2f} x ub)"
        print(f"{name} {par:6s}: a[0]={a[0]:9.3f} a[-1]={a[-1]:9.3f} crossing {msg}")
        # abscissa increasing over upper portion of Table range?
        in_range = parameter_sweep(base, par, np.linspace(lb, ub, 9))
        diffs = np.diff(in_range.abscissa[4:])
        print(f"        table-range abscissas: "
              + " ".join(f"{x:8.4f}" for x in in_range.abscissa))

# off-grid m_int flatness (the parameter does not enter the off-grid field)
sweep = parameter_sweep(model_off, "m_int", np.linspace(0.6e-3, 0.84e-3, 5))
print("OFF m_int abscissas:", sweep.abscissa)
spread = max(np.nanmax(np.abs(sweep.abscissa - sweep.abscissa[0])), 0)
print("spread:", spread)

# find_critical runs
base_on = apply_parameter(model_on, "x_over_r", 0.33)
crit = find_critical(base_on, "n", 1.04e-5, 3.64e-5 * 10)
print("ON n critical:", crit.value, "ratio to ub:", crit.value / 3.64e-5)
base_off = apply_parameter(model_off, "x_over_r", 0.33)
crit2 = find_critical(base_off, "n", 1.04e-5, 3.64e-5 * 10)
print("OFF n critical:", crit2.value, "ratio to ub:", crit2.value / 3.64e-5)
