"""Exploratory small-signal checks."""
import numpy as np

from droopsim import (
    ControlParams, FilterParams, GridParams, Mode, Nominals, ReferenceFrame,
    SystemModel, VsiParams, load_from_power, solve_equilibrium,
)
from droopsim.smallsignal import (
    eigen_spectrum, find_critical, linearize, match_slow_eigenvalues,
    parameter_sweep, reduce,
)

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

for name, model in (("ON", model_on), ("OFF", model_off)):
    x_eq, _ = solve_equilibrium(model)
    lin = linearize(model, x_eq)
    red = reduce(lin)
    sf = eigen_spectrum(lin)
    sr = eigen_spectrum(red)
    print(f"== {name} full order {lin.order} reduced {red.order}")
    print("full eigs:")
    for z in sf.eigenvalues:
        print(f"   {z.real:14.4f} {z.imag:+14.4f}j   |z|={abs(z):10.3f}")
    print("full structural:", sf.structural_zero_idx, "abscissa:", sf.abscissa)
    print("reduced eigs:")
    for z in sr.eigenvalues:
        print(f"   {z.real:14.4f} {z.imag:+14.4f}j")
    print("reduced structural:", sr.structural_zero_idx, "abscissa:", sr.abscissa)
    pairs = match_slow_eigenvalues(sf.eigenvalues, sr.eigenvalues)
    worst = max(p[2] for p in pairs)
    print("match rel errs:", [f"{p[2]:.3%}" for p in pairs])
    print("worst:", f"{worst:.3%}")
