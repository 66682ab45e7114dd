"""Full multi-event sequence: load drop, islanding with shed, load jump,
synchronized grid return.

Writes the scenario CSV plus a settling report, and renders the four-panel
figure when the plots package is installed.  The run covers 12.6 simulated
seconds at a 10 us step, so expect tens of seconds of wall time.
"""

import json
from pathlib import Path

from droopsim import IntegratorSettings, Method, Mode
from droopsim.cli import bundled_config_path, parse_config, write_csv
from droopsim.scenario import CANONICAL_T_END, canonical_events, run_scenario

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

cfg = parse_config(bundled_config_path())
model = cfg.model(Mode.ON_GRID)

result = run_scenario(model, canonical_events(),
                      IntegratorSettings(method=Method.FORWARD_EULER, h=1e-5,
                                         t_end=CANONICAL_T_END))

csv_path = OUT / "scenario.csv"
write_csv(csv_path, list(result.timeseries.columns), result.timeseries.data)
manifest = OUT / "scenario_manifest.json"
manifest.write_text(json.dumps({
    "events": [{"t": ev.t, "kind": ev.kind.value,
                **({"p": ev.p, "q": ev.q} if ev.p is not None else {})}
               for ev in result.events]}, indent=2), encoding="utf-8")
print(f"wrote {csv_path} ({result.timeseries.data.shape[0]} samples)")

print("\nper-event settling (2% band):")
for m in result.metrics:
    state = f"{m.settling_time:.3f} s" if m.settled else "unsettled"
    print(f"  t = {m.event_t:6.3f}  {m.signal:13s} {state}")
print("\nnote: events touching the on-grid reactive equilibrium settle on "
      "the integral timescale (m/m_int, about 0.3 s and slower modes), "
      "while the islanding transitions recover within 0.2 s.")

try:
    from droopplots.timeseries_panel import main as panel
    fig = OUT / "scenario_panels.png"
    panel([str(csv_path), "-o", str(fig), "--manifest", str(manifest)])
    print(f"figure: {fig}")
except ImportError:
    print("(install droopsim-plots to render the panel figure)")
