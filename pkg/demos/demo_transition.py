"""Islanding transition study: the power-filter constant paces recovery.

Starting from the idle on-grid steady state, the grid is lost at t = 50 ms
and the inverters pick up the 250 kW / 100 kVAr critical load.  Larger
power-filter time constants visibly slow the filtered power recovery.
"""

from pathlib import Path

from droopsim import IntegratorSettings, Method, Mode
from droopsim.cli import bundled_config_path, parse_config, write_csv
from droopsim.scenario import run_transition_study

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

cfg = parse_config(bundled_config_path())
model = cfg.model(Mode.ON_GRID, load=cfg.load_params(250e3, 100e3))

runs = run_transition_study(
    model, [24.7e-3, 33e-3, 41.2e-3], t_switch=0.05, t_end=1.1,
    settings=IntegratorSettings(method=Method.FORWARD_EULER, h=1e-5, t_end=1.1))

paths = []
for run in runs:
    path = OUT / f"transition_tau_{run.tau_s * 1e3:.1f}ms.csv"
    write_csv(path, list(run.timeseries.columns), run.timeseries.data)
    paths.append(path)
    print(f"tau_s = {run.tau_s * 1e3:5.1f} ms: filtered-power settling "
          f"{run.settling_p1.settling_time:.3f} s, terminal "
          f"P = {run.p_eq[0] / 1e3:.1f} kW per inverter -> {path.name}")

try:
    from droopplots.transition_overlay import main as overlay
    fig = OUT / "transition_overlay.png"
    overlay([str(p) for p in paths] + ["-o", str(fig)])
    print(f"figure: {fig}")
except ImportError:
    print("(install droopsim-plots to render the overlay figure)")
