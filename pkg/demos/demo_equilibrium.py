"""Steady states of the two-inverter network, on-grid and islanded.

On-grid the droop law parks both inverters at zero output while the grid
serves the whole load; islanded, the inverters split the critical load
evenly and the frequency settles on the droop characteristic.
"""

from droopsim import Mode, outputs, solve_equilibrium
from droopsim.cli import bundled_config_path, parse_config

cfg = parse_config(bundled_config_path())

print("== on-grid, 500 kW / 220 kVAr peak load")
model_on = cfg.model(Mode.ON_GRID)
x_on, report = solve_equilibrium(model_on)
o = outputs(model_on, x_on)
print(f"Newton: {report.iterations} iterations, residual {report.residual:.2e}")
print(f"inverter powers: P = {o.p[0]:.6f} / {o.p[1]:.6f} W, "
      f"Q = {o.q[0]:.6f} / {o.q[1]:.6f} VAr   (idle)")
print(f"grid: {o.p_grid / 1e3:.1f} kW / {o.q_grid / 1e3:.1f} kVAr "
      f"= load: {o.p_load / 1e3:.1f} kW / {o.q_load / 1e3:.1f} kVAr")
print(f"PCC voltage {o.v_pcc_rms_ll:.2f} V L-L "
      f"({(o.v_pcc_rms_ll / 480 - 1) * 100:+.2f}% of nominal, the feeder "
      "impedance divider at peak load)")

print("\n== islanded, 250 kW / 100 kVAr critical load")
model_off = cfg.model(Mode.OFF_GRID, load=cfg.load_params(250e3, 100e3))
x_off, _ = solve_equilibrium(model_off)
o = outputs(model_off, x_off)
print(f"inverter powers: P = {o.p[0] / 1e3:.2f} / {o.p[1] / 1e3:.2f} kW "
      f"(equal split), Q = {o.q[0] / 1e3:.2f} / {o.q[1] / 1e3:.2f} kVAr")
print(f"frequency {o.frequency:.4f} Hz "
      f"({o.frequency - 60:+.4f} Hz droop offset), "
      f"PCC voltage {o.v_pcc_rms_ll:.2f} V L-L")

ctrl = cfg.vsis[0].control
droop_residual = (x_off.get("omega1") - cfg.nominals.omega_nom
                  + ctrl.n * (o.p[0] - ctrl.p_ref))
print(f"droop identity residual: {droop_residual:.2e} rad/s")
