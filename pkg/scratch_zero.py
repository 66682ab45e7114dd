"""Structural-zero magnitude checks across sweep points."""
import numpy as np

from droopsim import (
    ControlParams, GridParams, Mode, Nominals, ReferenceFrame, SystemModel,
    VsiParams, load_from_power, solve_equilibrium,
)
from droopsim.smallsignal import (
    apply_parameter, eigen_spectrum, linearize, reduce,
)

nom = Nominals.from_ratings(480.0, 60.0)
ctrl = ControlParams(n=2.08e-5, m=208.3e-6, m_int=0.67e-3, tau_s=0.033,
                     p_ref=102e3, q_ref=63.214e3, p_rated=102e3, q_rated=63.214e3)
vsi = VsiParams(control=ctrl, l_l=215e-6, r_l=0.55e-3)
grid = GridParams(l_lg=30e-6, r_lg=5e-3)
load_crit = load_from_power(250e3, 100e3, 480.0, nom.omega_nom)
load_full = load_from_power(500e3, 220e3, 480.0, nom.omega_nom)

model_on = SystemModel(vsis=(vsi, vsi), grid=grid, load=load_full, nominals=nom,
                       frame=ReferenceFrame.fixed_nominal(nom), mode=Mode.ON_GRID)
model_off = SystemModel(vsis=(vsi, vsi), grid=grid, load=load_crit, nominals=nom,
                        frame=ReferenceFrame.vsi1_anchored(nom), mode=Mode.OFF_GRID)

for name, model in (("ON", model_on), ("OFF", model_off)):
    worst_full = worst_red = 0.0
    for v in np.geomspace(1.04e-5, 3.64e-5 * 20, 12):
        m = apply_parameter(model, "n", float(v))
        x_eq, _ = solve_equilibrium(m)
        lin = linearize(m, x_eq)
        red = reduce(lin)
        sf, sr = eigen_spectrum(lin), eigen_spectrum(red)
        zf = min(abs(z) for z in sf.eigenvalues)
        zr = min(abs(z) for z in sr.eigenvalues)
        worst_full = max(worst_full, zf)
        worst_red = max(worst_red, zr)
        nf, nr = len(sf.structural_zero_idx), len(sr.structural_zero_idx)
        if nf != 1 or nr != 1:
            print(f"  {name} n={v:.3e}: flagged full={nf} red={nr}")
    print(f"{name}: worst |zero| full={worst_full:.2e} reduced={worst_red:.2e}")

# pinned submatrix has no near-zero mode
x_eq, _ = solve_equilibrium(model_off)
lin = linearize(model_off, x_eq)
red = reduce(lin)
a = np.delete(np.delete(red.a, 0, axis=0), 0, axis=1)  # drop theta1
print("pinned reduced eigs min |z|:", min(abs(z) for z in np.linalg.eigvals(a)))
