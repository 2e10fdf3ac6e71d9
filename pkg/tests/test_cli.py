import json
import math

import numpy as np
import pytest

from optoamp import cli
from optoamp.errors import ValidationError
from optoamp.experiments import figure_dataset, to_csv
from optoamp.scattering import gain, transmission_sweep
from optoamp.sysmodel import TWO_PI, preset


@pytest.fixture
def fig3_config(tmp_path):
    path = tmp_path / "fig3.json"
    path.write_text(json.dumps({"params": preset("fig3").to_megahertz()}))
    return str(path)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestCommands:
    def test_validate(self, capsys, fig3_config):
        code, out, err = run(capsys, "validate", "--config", fig3_config)
        assert code == 0
        assert out.startswith("stable, max Re λ = ")
        assert "params (MHz convention)" in err

    def test_gain(self, capsys, fig3_config):
        code, out, _ = run(capsys, "gain", "--config", fig3_config, "--format", "json")
        doc = json.loads(out)
        assert code == 0
        assert math.isclose(doc["gain_db"], 22.8, abs_tol=0.05)
        assert doc["t12_resonant_sq"] < 1e-20
        assert doc["gain_linear"] == gain(preset("fig3")).gain_linear

    def test_gain_text(self, capsys):
        code, out, _ = run(capsys, "gain")
        assert code == 0 and "22.847 dB" in out

    def test_transmit_matches_library(self, capsys, tmp_path):
        out_path = tmp_path / "t.csv"
        code, _, _ = run(capsys, "transmit", "--points", "11", "--out", str(out_path))
        assert code == 0
        rows = np.loadtxt(out_path, delimiter=",", skiprows=1)
        T = transmission_sweep(preset("fig3"), TWO_PI * np.linspace(-3, 3, 11))
        np.testing.assert_array_equal(rows[:, 4], np.abs(T[:, 1, 0]) ** 2)

    def test_stability_point(self, capsys):
        code, out, _ = run(capsys, "stability")
        assert code == 0 and out.count("\n  λ = ") == 4

    def test_stability_grid(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"params": {}, "conditions": True,
                                   "grid": {"g_min": 0.5, "g_max": 2.5, "g_points": 5}}))
        code, out, _ = run(capsys, "stability", "--grid", "--config", str(cfg))
        assert code == 0
        assert len(out.splitlines()) == 26

    def test_noise_and_delay(self, capsys):
        for cmd in ("noise", "delay"):
            code, out, _ = run(capsys, cmd, "--points", "21", "--set", "n_m=100")
            assert code == 0 and len(out.splitlines()) == 22

    def test_figure_single_file(self, capsys, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, out, _ = run(capsys, "figure", "fig2", "--out", "fig2.csv")
        assert code == 0
        assert (tmp_path / "fig2.csv").read_text() == to_csv(figure_dataset("fig2")[0])

    def test_figure_directory(self, capsys, tmp_path):
        code, _, _ = run(capsys, "figure", "fig5", "--out", str(tmp_path / "out"), "--format", "json",
                         "--workers", "2")
        assert code == 0
        assert len(list((tmp_path / "out").glob("fig5_*.json"))) == 4

    def test_figure_override(self, capsys, tmp_path):
        code, _, _ = run(capsys, "figure", "fig4", "--set", "f_kappa3=2.5", "--out", str(tmp_path))
        assert code == 0
        head = (tmp_path / "fig4.csv").read_text().splitlines()[0]
        assert head == "phi[rad],T12sq[dimensionless],T21sq[dimensionless]"


class TestConfig:
    def test_minimal_file(self, tmp_path, caplog):
        path = tmp_path / "m.json"
        path.write_text('{"params":{}}')
        cfg = cli.load_config(path)
        assert cfg.resolve() == preset("fig3")
        assert "preset" in caplog.text

    def test_unknown_keys(self, tmp_path):
        path = tmp_path / "u.json"
        path.write_text('{"params":{"f_G9":1}, "extra": 2}')
        with pytest.raises(ValidationError) as exc:
            cli.load_config(path)
        assert "f_G9" in str(exc.value) and "extra" in str(exc.value)

    def test_every_bad_field_listed(self):
        cfg = cli.config_from_dict({"params": {"f_kappa1": -1, "eta2": 2, "n_m": -3}})
        with pytest.raises(ValidationError) as exc:
            cfg.resolve()
        assert set(exc.value.fields) >= {"kappa1", "eta2", "n_m"}

    def test_set_keeps_g2(self):
        cfg = cli.apply_set(cli.config_from_dict({"params": {}}), "f_G1=5")
        p = cfg.resolve()
        assert p.G1 == TWO_PI * 5 and p.G2 == preset("fig3").G2

    def test_set_rule(self):
        cfg = cli.config_from_dict({"params": {}})
        cli.apply_set(cfg, "f_G1=5")
        cli.apply_set(cfg, "rule_g2=true")
        assert math.isclose(cfg.resolve().G2 / TWO_PI, 5 - 0.1 * math.sqrt(5), rel_tol=1e-14)

    def test_set_idempotent(self):
        once = cli.apply_set(cli.config_from_dict({"params": {}}), "f_G2=1.5").resolve()
        twice = cli.apply_set(cli.apply_set(cli.config_from_dict({"params": {}}), "f_G2=1.5"),
                              "f_G2=1.5").resolve()
        assert once == twice

    def test_conditions_explicit(self):
        cfg = cli.config_from_dict({"params": {"phi": 0.3}})
        assert cfg.resolve().phi == 0.3
        cfg.conditions = True
        assert cfg.resolve().phi == -math.pi / 2


class TestExitCodes:
    def test_malformed_json(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"params": {"f_G1": 2,}}')
        code, _, err = run(capsys, "validate", "--config", str(path))
        assert code == 1 and "line 1 column" in err

    def test_validation(self, capsys):
        code, _, err = run(capsys, "gain", "--set", "eta1=1.5")
        assert code == 1 and "eta1" in err

    def test_bad_set_syntax(self, capsys):
        assert run(capsys, "gain", "--set", "f_G1")[0] == 1
        assert run(capsys, "gain", "--set", "nope=1")[0] == 1

    def test_numerical(self, capsys):
        code, _, err = run(capsys, "transmit", "--set", "f_ga=0", "--set", "f_G1=0", "--set", "f_G2=0",
                           "--set", "f_G3=0", "--set", "f_J=0", "--points", "3")
        assert code == 2 and "omega" in err

    def test_gain_divergent(self, capsys):
        C2 = (4 * (TWO_PI * 1.0) ** 2) / (TWO_PI * 2 * TWO_PI * 0.02)
        f_G1 = math.sqrt((C2 + 1) * 2 * 0.02) / 2
        code, _, _ = run(capsys, "gain", "--set", "f_G2=1.0", "--set", f"f_G1={f_G1!r}",
                         "--apply-conditions")
        assert code == 2

    def test_missing_config(self, capsys, tmp_path):
        assert run(capsys, "validate", "--config", str(tmp_path / "nope.json"))[0] == 3

    def test_unwritable_output(self, capsys, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        code, _, err = run(capsys, "transmit", "--points", "3", "--out", str(blocker / "x.csv"))
        assert code == 3 and "file" in err
