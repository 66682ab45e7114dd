"""Is the full EM model really unstable at the selected values?"""
import numpy as np

from droopsim import (
    ControlParams, GridParams, IntegratorSettings, Method, Mode, Nominals,
    ReferenceFrame, SystemModel, VsiParams, integrate, load_from_power,
    solve_equilibrium,
)
from droopsim.system import make_field
from droopsim.smallsignal import linearize, eigen_spectrum

nom = Nominals.from_ratings(480.0, 60.0)
ctrl = ControlParams(n=2.08e-5, m=208.3e-6, m_int=0.67e-3, tau_s=0.033,
                     p_ref=102e3, q_ref=63.214e3, p_rated=102e3, q_rated=63.214e3)
vsi = VsiParams(control=ctrl, l_l=215e-6, r_l=0.55e-3)
grid = GridParams(l_lg=30e-6, r_lg=5e-3)
load_crit = load_from_power(250e3, 100e3, 480.0, nom.omega_nom)

model_off = SystemModel(vsis=(vsi, vsi), grid=grid, load=load_crit, nominals=nom,
                        frame=ReferenceFrame.vsi1_anchored(nom), mode=Mode.OFF_GRID)
x_eq, _ = solve_equilibrium(model_off)
f = make_field(model_off)

# fast-block eigenvalues at the equilibrium
lin = linearize(model_off, x_eq)
a = lin.a
fast = [6, 7, 8, 9]
azz = a[np.ix_(fast, fast)]
print("A_zz eigs:", np.linalg.eigvals(azz))

# per-block inspection of the suspicious mode
spec = eigen_spectrum(lin)
lam = spec.eigenvalues
idx = int(np.argmax(lam.real))
print("worst eig:", lam[idx])
w, v = np.linalg.eig(a)
i2 = int(np.argmax(w.real))
vec = v[:, i2]
print("worst eig mode shape (|components| by state):")
for name, c in zip(model_off.mode.labels, np.abs(vec)):
    print(f"   {name:8s} {c:10.4f}")

# nonlinear check: perturb and integrate
rng = np.random.default_rng(0)
x0 = x_eq.values + rng.normal(scale=[1e-3, 1e-3, 1e-2, 1e-2, 1e-1, 1e-1, 1, 1, 1, 1])
traj = integrate(f, x0, IntegratorSettings(method=Method.RK4, h=1e-5, t_end=1.0),
                 store_every=1000)
dev = np.max(np.abs(traj.rows - x_eq.values), axis=1)
print("max dev over time:", dev[::10])
print("aborted:", traj.aborted)
