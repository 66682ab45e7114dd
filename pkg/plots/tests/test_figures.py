"""Render the three figure kinds from real simulator outputs and check the
renders are byte-stable; degenerate and malformed inputs behave as documented.

The simulator is driven exclusively through its command line; these tests
never import it.
"""

import json
import shutil
import subprocess
import sys

import pytest

from droopplots import FigureKind, FigureSpec, SchemaError, render
from droopplots.eigen_scatter import main as eigen_main
from droopplots.timeseries_panel import main as panel_main
from droopplots.transition_overlay import main as overlay_main

DROOPSIM = shutil.which("droopsim")


def _run_droopsim(args, out_dir):
    if DROOPSIM is None:
        pytest.fail("the droopsim command line tool must be installed")
    subprocess.run([DROOPSIM, *args, "--out", str(out_dir)], check=True,
                   capture_output=True)


@pytest.fixture(scope="session")
def sim_outputs(tmp_path_factory):
    """Real eigen-sweep, scenario, and transition CSVs from the simulator."""
    out = tmp_path_factory.mktemp("sim")
    cfg_text = subprocess.run(
        [sys.executable, "-c",
         "from droopsim.cli import bundled_config_path; print(bundled_config_path())"],
        check=True, capture_output=True, text=True).stdout.strip()

    _run_droopsim(["sweep", "--config", cfg_text, "--grid-mode", "off",
                   "--param", "n", "--from", "1.04e-2", "--to", "10.9e-2",
                   "--points", "8", "--x-over-r", "0.33"], out)

    events = {"t_end": 1.3,
              "events": [{"t": 0.2, "kind": "set_load",
                          "p": "200 kW", "q": "80 kVAr"},
                         {"t": 0.2, "kind": "island"}]}
    ev_path = out / "events.json"
    ev_path.write_text(json.dumps(events), encoding="utf-8")
    _run_droopsim(["scenario", "--config", cfg_text,
                   "--events", str(ev_path)], out)

    _run_droopsim(["transition", "--config", cfg_text, "--tau-values",
                   "24.7,41.2", "--t-end", "1.1"], out)
    return out


def _assert_byte_stable(render_once, tmp_path, name):
    a = tmp_path / f"{name}_a.png"
    b = tmp_path / f"{name}_b.png"
    render_once(a)
    render_once(b)
    assert a.stat().st_size > 1000
    assert a.read_bytes() == b.read_bytes()


class TestEigenScatter:
    def test_renders_and_byte_stable(self, sim_outputs, tmp_path):
        csv = sim_outputs / "sweep_off_n.csv"

        def once(path):
            assert eigen_main([str(csv), "-o", str(path)]) == 0

        _assert_byte_stable(once, tmp_path, "eigen")

    def test_header_only_csv(self, tmp_path):
        csv = tmp_path / "empty.csv"
        csv.write_text("value,re_1,im_1,abscissa\n")
        out = render(FigureSpec(inputs=(str(csv),),
                                kind=FigureKind.EIGEN_SCATTER,
                                output=str(tmp_path / "empty.png")))
        assert out.exists()

    def test_missing_column_named(self, tmp_path, capsys):
        csv = tmp_path / "bad.csv"
        csv.write_text("foo,bar\n1,2\n")
        assert eigen_main([str(csv), "-o", str(tmp_path / "x.png")]) == 2
        assert "re_1" in capsys.readouterr().err


class TestTimeseriesPanel:
    def test_renders_with_event_markers(self, sim_outputs, tmp_path):
        csv = sim_outputs / "scenario.csv"
        manifest = sim_outputs / "scenario_manifest.json"

        def once(path):
            assert panel_main([str(csv), "-o", str(path),
                               "--manifest", str(manifest)]) == 0

        _assert_byte_stable(once, tmp_path, "panel")

    def test_missing_column_named(self, tmp_path):
        csv = tmp_path / "bad.csv"
        csv.write_text("t,p_1\n0,1\n")
        with pytest.raises(SchemaError, match="p_2"):
            render(FigureSpec(inputs=(str(csv),),
                              kind=FigureKind.TIMESERIES_PANEL,
                              output=str(tmp_path / "x.png")))

    def test_input_csv_not_mutated(self, sim_outputs, tmp_path):
        csv = sim_outputs / "scenario.csv"
        before = csv.read_bytes()
        assert panel_main([str(csv), "-o", str(tmp_path / "p.png")]) == 0
        assert csv.read_bytes() == before


class TestTransitionOverlay:
    def test_renders_and_byte_stable(self, sim_outputs, tmp_path):
        csvs = sorted(str(p) for p in sim_outputs.glob("transition_tau_*.csv"))
        assert len(csvs) == 2

        def once(path):
            assert overlay_main([*csvs, "-o", str(path)]) == 0

        _assert_byte_stable(once, tmp_path, "overlay")
