import json
from pathlib import Path

import pytest

from wickspde import cli
from wickspde.errors import ConfigurationError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SMALL_TAILS = """
[run]
kind = tails
seed = 11
block_size = 250

[params]
eps = 0.1
sigma = 0.05
N = 4
T = 0.2
m_max = 2
paths = 1000
"""

STABLE_BASE = """
[run]
kind = stable

[params]
eps = 0.1
sigma = 0.01
"""


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.ini")), ids=lambda p: p.stem)
def test_fixture_configs_load_and_roundtrip(path):
    cfg = cli.load_config(path)
    again = cli.parse_config(cfg.to_ini())
    assert again == cfg
    assert again.config_hash() == cfg.config_hash()


class TestParsing:
    def test_even_degree_rejected(self):
        text = STABLE_BASE + "\n[drift]\nA0 = 0\nA1 = 1\nA2 = 0\nA3 = 0\nA4 = -1\n"
        with pytest.raises(ConfigurationError, match="oddness"):
            cli.parse_config(text)

    def test_missing_required_named(self):
        text = "[run]\nkind = probe\n\n[params]\nN = 8\n"
        with pytest.raises(ConfigurationError, match="'sigma'"):
            cli.parse_config(text)

    def test_unknown_key_named(self):
        with pytest.raises(ConfigurationError, match="'colour'"):
            cli.parse_config(SMALL_TAILS + "colour = blue\n")

    def test_unknown_section_and_kind(self):
        with pytest.raises(ConfigurationError, match=r"\[extra\]"):
            cli.parse_config(SMALL_TAILS + "\n[extra]\nx = 1\n")
        with pytest.raises(ConfigurationError, match="unknown experiment kind"):
            cli.parse_config("[run]\nkind = nonsense\n")

    def test_all_problems_collected(self):
        text = "[run]\nkind = tails\nworkers = 0\n\n[params]\neps = -1\nsigma = 0.1\nT = 1\nN = 4\n"
        with pytest.raises(ConfigurationError) as info:
            cli.parse_config(text)
        v = " ".join(info.value.violations)
        assert "m_max" in v and "workers" in v and "eps must be positive" in v

    def test_alias_grid_rejected(self):
        text = STABLE_BASE + "M = 8\n\n[drift]\nA0 = 1\nA1 = 0\nA2 = 0\nA3 = -1\n"
        with pytest.raises(ConfigurationError, match="alias-free"):
            cli.parse_config(text)

    def test_value_syntax(self):
        assert cli._floats("1e-4, 2e-4") == [1e-4, 2e-4]
        assert cli._floats("0:1:3") == [0.0, 0.5, 1.0]
        assert cli._float("inf") == float("inf")
        assert cli._bool("yes") and not cli._bool("off")
        with pytest.raises(ValueError):
            cli._bool("maybe")

    def test_hash_ignores_workers_and_directory(self):
        a = cli.parse_config(SMALL_TAILS)
        b = cli.parse_config(SMALL_TAILS.replace("seed = 11", "seed = 11\nworkers = 3")
                             + "\n[output]\ndirectory = elsewhere\n")
        assert a.config_hash() == b.config_hash()
        c = cli.parse_config(SMALL_TAILS.replace("seed = 11", "seed = 12"))
        assert c.config_hash() != a.config_hash()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            cli.load_config(tmp_path / "absent.ini")


class TestRuns:
    def test_selftest_fixture(self, tmp_path, capsys):
        out = tmp_path / "st"
        assert cli.main(["run", str(CONFIGS / "selftest.ini"), "--output", str(out)]) == 0
        man = json.loads((out / "manifest.json").read_text())
        assert man["complete"] and man["status"] == "ok"
        assert cli.main(["report", str(out / "manifest.json")]) == 0
        assert "gate chaos_oracle: PASS" in capsys.readouterr().out

    def test_zero_noise_pitchfork(self, tmp_path):
        out = tmp_path / "p0"
        assert cli.main(["run", str(CONFIGS / "pitchfork_sigma0.ini"), "--output", str(out)]) == 0
        rep = json.loads((out / "report.json").read_text())
        pt = rep["points"][0]
        assert pt["censored_plus"] == pt["paths"] == 20 and pt["exits_plus"] == 0

    def test_tampered_csv(self, tmp_path, capsys):
        out = tmp_path / "t"
        cli.run(cli.parse_config(SMALL_TAILS), out, workers=1)
        with open(out / "report.csv", "a") as fh:
            fh.write("1,2,3\n")
        assert cli.main(["report", str(out / "manifest.json")]) == 1
        assert "integrity error" in capsys.readouterr().err

    def test_empty_manifest(self, tmp_path, capsys):
        (tmp_path / "manifest.json").write_text(json.dumps({"kind": "tails", "files": []}))
        assert cli.main(["report", str(tmp_path / "manifest.json")]) == 0
        assert "no artifacts" in capsys.readouterr().out

    def test_byte_identical_across_workers(self, tmp_path):
        cfg = cli.parse_config(SMALL_TAILS + "\n[output]\nsnapshots = true\n")
        cli.run(cfg, tmp_path / "w1", workers=1)
        cli.run(cfg, tmp_path / "w2", workers=2)
        m1 = json.loads((tmp_path / "w1" / "manifest.json").read_text())
        m2 = json.loads((tmp_path / "w2" / "manifest.json").read_text())
        assert m1["files"] == m2["files"]
        names = [f["path"] for f in m1["files"]]
        assert {"report.json", "report.csv", "config.ini", "fields.wspf", "mode_variances.csv"} <= set(names)
        for name in names:
            assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w2" / name).read_bytes()

    def test_error_exit_and_manifest(self, tmp_path, capsys):
        bad = tmp_path / "bad.ini"
        bad.write_text("[run]\nkind = tails\n")
        assert cli.main(["run", str(bad), "--output", str(tmp_path / "o")]) == 1
        assert "missing required key" in capsys.readouterr().err

    def test_output_directory_env(self, tmp_path, monkeypatch):
        cfg = cli.parse_config(SMALL_TAILS)
        assert cli.output_directory(cfg).name.startswith("tails-")
        monkeypatch.setenv("WICKSPDE_OUTPUT_DIR", str(tmp_path / "env"))
        assert cli.output_directory(cfg) == tmp_path / "env"

    def test_selftest_command(self, capsys):
        assert cli.main(["selftest", "--quick"]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 4
