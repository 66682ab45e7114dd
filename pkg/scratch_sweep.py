"""Symmetry preservation + root-locus destabilization exploration."""
import numpy as np

from droopsim import (
    ControlParams, GridParams, IntegratorSettings, Method, Mode, Nominals,
    ReferenceFrame, SystemModel, VsiParams, integrate, load_from_power,
    solve_equilibrium, islanding_state,
)
from droopsim.system import make_field
from droopsim.smallsignal import parameter_sweep, find_critical

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

# --- symmetry preservation over a long off-grid run
x_on, _ = solve_equilibrium(model_on)
x0 = islanding_state(x_on)
f = make_field(model_off)
traj = integrate(f, x0.values, IntegratorSettings(method=Method.FORWARD_EULER,
                                                  h=1e-5, t_end=2.0),
                 store_every=20000)
asym = np.max(np.abs(traj.rows[:, 0] - traj.rows[:, 1])), \
       np.max(np.abs(traj.rows[:, 6] - traj.rows[:, 7])), \
       np.max(np.abs(traj.rows[:, 8] - traj.rows[:, 9]))
print("max asymmetry over 2 s (theta, id, iq):", asym)
x_off_eq, _ = solve_equilibrium(model_off, islanding_state(x_on))
print("terminal deviation from newton eq:",
      np.max(np.abs(traj.x_final - x_off_eq.values)))

# --- sweeps: where do the reduced models destabilize?
for name, model in (("ON", model_on), ("OFF", model_off)):
    for par, si in (("n", 1e-3), ("m", 1e-3), ("tau_s", 1.0)):
        # Table I bounds in SI
        bounds = {"n": (1.04e-5, 3.64e-5), "m": (41.67e-6, 416.6e-6),
                  "tau_s": (24.7e-3, 41.2e-3)}[par]
        grid_vals = np.geomspace(bounds[0], bounds[1] * 30, 25)
        sweep = parameter_sweep(model, par, grid_vals)
        rows = [f"{v:9.3e}:{a:9.3f}" for v, a in zip(sweep.values, sweep.abscissa)]
        print(f"== {name} {par}")
        for i in range(0, len(rows), 5):
            print("   " + "  ".join(rows[i:i + 5]))
        # crossing?
        finite = np.isfinite(sweep.abscissa)
        pos = np.flatnonzero(finite & (sweep.abscissa > 0))
        if pos.size:
            k = pos[0]
            print(f"   first positive at {sweep.values[k]:.4e} "
                  f"(upper bound {bounds[1]:.3e}, ratio {sweep.values[k]/bounds[1]:.2f})")
        else:
            print("   no crossing found in range")
