import json

import pytest

from gcimpulse import cli


def run_cli(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestConfig:
    def test_emit_template_parses(self, capsys, tmp_path):
        code, out, _ = run_cli(["--emit-template"], capsys)
        assert code == 0
        f = tmp_path / "cfg.toml"
        f.write_text(out)
        cfg = cli.load_config(str(f), None, None)
        assert cfg.scenario == "spiral"
        assert cfg.s_max == 51.0

    def test_invalid_s_max_is_config_error(self, capsys, tmp_path):
        f = tmp_path / "bad.toml"
        f.write_text('[run]\nscenario = "spiral"\nhorizon = 1.0\ns_max = 0.5\n')
        code, _, err = run_cli(["simulate", "--config", str(f), "--out", str(tmp_path)], capsys)
        assert code != 0
        record = json.loads(err.strip().splitlines()[-1])
        assert record["error"] == "ConfigError"

    def test_unknown_scenario_is_config_error(self, capsys, tmp_path):
        f = tmp_path / "bad.toml"
        f.write_text('[run]\nscenario = "nope"\n')
        code, _, err = run_cli(["simulate", "--config", str(f), "--out", str(tmp_path)], capsys)
        assert code != 0
        assert json.loads(err.strip().splitlines()[-1])["error"] == "ConfigError"

    def test_negative_tolerance_rejected(self, tmp_path):
        f = tmp_path / "bad.toml"
        f.write_text("[tolerances]\nunit_speed = -1.0\n")
        with pytest.raises(cli.ConfigError):
            cli.load_config(str(f), None, None)


class TestCommands:
    def test_simulate_writes_artifacts(self, capsys, tmp_path):
        f = tmp_path / "cfg.toml"
        f.write_text('[run]\nscenario = "spiral"\n[grid]\ntime_cells = 256\n')
        code, _, _ = run_cli(["simulate", "--config", str(f), "--out", str(tmp_path / "o")], capsys)
        assert code == 0
        assert (tmp_path / "o" / "trajectory_t.csv").exists()
        assert (tmp_path / "o" / "control.csv").exists()

    def test_complete_writes_ledger_and_report(self, capsys, tmp_path):
        f = tmp_path / "cfg.toml"
        f.write_text(
            '[run]\nscenario = "one-jump"\n[grid]\nds = 0.01\n[partition]\nrule = "geometric"\ncount = 2\n'
        )
        code, out, _ = run_cli(["complete", "--config", str(f), "--out", str(tmp_path / "o")], capsys)
        assert code == 0
        assert "PASS" in out
        assert (tmp_path / "o" / "completion.csv").exists()
        assert (tmp_path / "o" / "ledger.txt").exists()
        assert (tmp_path / "o" / "feasibility.txt").exists()

    def test_payoff_table(self, capsys, tmp_path):
        f = tmp_path / "cfg.toml"
        f.write_text("[suite]\npayoff_k_list = [5]\n")
        code, out, _ = run_cli(["payoff", "--config", str(f), "--out", str(tmp_path / "o")], capsys)
        assert code == 0
        assert (tmp_path / "o" / "payoff.csv").exists()
        assert "k=5" in out
