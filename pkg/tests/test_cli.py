"""Config ingestion, subcommand plumbing, and output determinism."""

import json

import pytest

from droopsim import ConfigError
from droopsim.cli import bundled_config_path, main, parse_config


@pytest.fixture()
def fairview_doc():
    with open(bundled_config_path(), encoding="utf-8") as fh:
        return json.load(fh)


def _write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


class TestParseConfig:
    def test_bundled_config_parses_to_si(self, cfg):
        ctrl = cfg.vsis[0].control
        assert ctrl.n == pytest.approx(2.08e-5, rel=1e-12)
        assert ctrl.m == pytest.approx(208.3e-6, rel=1e-12)
        assert ctrl.m_int == pytest.approx(0.67e-3, rel=1e-12)
        assert ctrl.tau_s == pytest.approx(0.033, rel=1e-12)
        assert cfg.vsis[1].l_l == pytest.approx(215e-6, rel=1e-12)
        assert cfg.grid.l_lg == pytest.approx(30e-6, rel=1e-12)
        assert cfg.load_p == 500e3
        assert cfg.nominals.v_ll_rms == pytest.approx(480.0)
        assert cfg.manifest_dict()["vsis"][0]["control"]["n"] == \
            pytest.approx(2.08e-5, rel=1e-12)

    def test_zero_m_rejected(self, tmp_path, fairview_doc):
        fairview_doc["vsi1"]["m"] = "0 V/kVAr"
        with pytest.raises(ConfigError, match=r"vsi1.*m must be positive"):
            parse_config(_write(tmp_path, fairview_doc))

    def test_unknown_key_rejected(self, tmp_path, fairview_doc):
        fairview_doc["foo"] = 1
        with pytest.raises(ConfigError, match="config.foo: unknown key"):
            parse_config(_write(tmp_path, fairview_doc))

    def test_nested_unknown_key_rejected(self, tmp_path, fairview_doc):
        fairview_doc["grid"]["bogus"] = 1
        with pytest.raises(ConfigError, match="config.grid.bogus"):
            parse_config(_write(tmp_path, fairview_doc))

    def test_missing_field_names_path(self, tmp_path, fairview_doc):
        del fairview_doc["vsi2"]["tau_s"]
        with pytest.raises(ConfigError, match="config.vsi2.tau_s: missing"):
            parse_config(_write(tmp_path, fairview_doc))

    def test_unit_error_names_path(self, tmp_path, fairview_doc):
        fairview_doc["vsi1"]["l_l"] = "215 lightyears"
        with pytest.raises(ConfigError, match="config.vsi1.l_l"):
            parse_config(_write(tmp_path, fairview_doc))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            parse_config(tmp_path / "nope.json")


class TestCliCommands:
    CFG = str(bundled_config_path())

    def test_equilibrium_writes_outputs(self, tmp_path, capsys):
        rc = main(["equilibrium", "--config", self.CFG, "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "equilibrium_on.csv").exists()
        manifest = json.loads(
            (tmp_path / "equilibrium_on_manifest.json").read_text())
        assert manifest["config"]["vsis"][0]["control"]["n"] == pytest.approx(2.08e-5)
        assert manifest["version"]
        out = capsys.readouterr().out
        assert "converged" in out

    def test_eigen_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            rc = main(["eigen", "--config", self.CFG, "--grid-mode", "off",
                       "--out", str(out)])
            assert rc == 0
        assert (a / "eigen_off_reduced.csv").read_bytes() == \
            (b / "eigen_off_reduced.csv").read_bytes()

    def test_sweep_csv_schema(self, tmp_path):
        rc = main(["sweep", "--config", self.CFG, "--grid-mode", "off",
                   "--param", "tau_s", "--from", "24.7", "--to", "41.2",
                   "--points", "3", "--out", str(tmp_path)])
        assert rc == 0
        header = (tmp_path / "sweep_off_tau_s.csv").read_text().splitlines()[0]
        cols = header.split(",")
        assert cols[0] == "value"
        assert cols[-1] == "abscissa"
        assert "re_1" in cols and "im_6" in cols

    def test_env_var_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("DROOPSIM_OUT", str(tmp_path / "enved"))
        rc = main(["eigen", "--config", self.CFG])
        assert rc == 0
        assert (tmp_path / "enved" / "eigen_on_reduced.csv").exists()

    def test_verify_passes_on_bundled_config(self, capsys):
        rc = main(["verify", "--config", self.CFG])
        out = capsys.readouterr().out
        assert rc == 0
        assert out.count("PASS") == 5
        assert "FAIL" not in out

    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        rc = main(["equilibrium", "--config", str(bad), "--out", str(tmp_path)])
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_scenario_events_file(self, tmp_path):
        events = {"t_end": 1.4,
                  "events": [{"t": 0.2, "kind": "set_load",
                              "p": "300 kW", "q": "120 kVAr"}]}
        ev_path = tmp_path / "events.json"
        ev_path.write_text(json.dumps(events))
        rc = main(["scenario", "--config", self.CFG, "--events", str(ev_path),
                   "--out", str(tmp_path)])
        assert rc == 0
        header = (tmp_path / "scenario.csv").read_text().splitlines()[0]
        assert header.startswith("t,p_1,p_2,q_1,q_2,p_grid,q_grid,"
                                 "p_load,q_load,v_pcc_rms_ll,frequency,i_gs")
        manifest = json.loads((tmp_path / "scenario_manifest.json").read_text())
        assert manifest["events"][0]["kind"] == "set_load"
