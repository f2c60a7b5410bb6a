from __future__ import annotations

import argparse

import pytest

from radarlz.cli import _seed_list, main
from radarlz.config import config_from_dict, load_config, sweep_configs
from radarlz.harness import ConfigError

EXAMPLE = """
[experiment]
scenario = "adaptive_order2"
objective = "entropy"
tracks = 2
cpis_per_track = 5
seeds = [0, 1]

[scene]
inr_db = 15.0

[learner]
discount = 0.9

[sweep]
policies = ["universal", "random"]
"""


class TestConfigFile:
    def test_load(self, tmp_path):
        path = tmp_path / "exp.toml"
        path.write_text(EXAMPLE)
        config, sweep = load_config(path)
        assert config.scenario == "adaptive_order2"
        assert config.scene.inr_db == 15.0
        assert config.learner.discount == 0.9
        assert sweep == {"policies": ["universal", "random"]}
        configs = sweep_configs(config, sweep)
        assert [c.policy for c in configs] == ["universal", "random"]
        assert all(c.objective == "entropy" for c in configs)

    @pytest.mark.parametrize("data", [
        {"extra": {}},
        {"experiment": {"bogus": 1}},
        {"scene": {"bogus": 1}},
        {"learner": {"bogus": 1}},
        {"sweep": {"bogus": ["x"]}},
        {"sweep": {"policies": ["nope"]}},
        {"experiment": {"tracks": 0}},
        {"learner": {"discount": 2.0}},
    ])
    def test_rejects(self, data):
        with pytest.raises(ConfigError):
            config_from_dict(data)

    def test_bad_toml(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[experiment\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_full_grid(self):
        config, _ = config_from_dict({})
        grid = sweep_configs(config, {"scenarios": ["stochastic_order3", "adaptive_order2"],
                                      "objectives": ["tracking", "entropy"],
                                      "policies": ["universal", "ts", "random"]})
        assert len({(c.scenario, c.objective, c.policy) for c in grid}) == 12


class TestCli:
    def test_seed_list(self):
        assert _seed_list("0-3") == [0, 1, 2, 3]
        assert _seed_list("1,4,7") == [1, 4, 7]
        assert _seed_list("0-1,5") == [0, 1, 5]
        with pytest.raises(argparse.ArgumentTypeError):
            _seed_list("a")

    def test_run_to_stdout(self, capsys):
        code = main(["run", "--tracks", "2", "--cpis-per-track", "5", "--seeds", "0-1",
                     "--policy", "random"])
        assert code == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0].startswith("policy,objective,scenario,track")
        assert len(out) == 3

    def test_sweep_and_plot(self, tmp_path):
        cfg = tmp_path / "exp.toml"
        cfg.write_text(EXAMPLE)
        out = tmp_path / "out"
        assert main(["sweep", "--config", str(cfg), "--output", str(out), "--plots"]) == 0
        names = sorted(p.name for p in out.iterdir())
        assert "summary_adaptive_order2_entropy_random.csv" in names
        assert "summary_adaptive_order2_entropy_universal.csv" in names
        assert "adaptive_order2_entropy.svg" in names
        summaries = sorted(out.glob("summary_*.csv"))
        assert main(["plot", *map(str, summaries), "--output", str(tmp_path / "plots")]) == 0
        assert (tmp_path / "plots" / "adaptive_order2_entropy.svg").read_bytes() == (
            out / "adaptive_order2_entropy.svg"
        ).read_bytes()

    def test_errors(self, tmp_path, capsys):
        assert main(["run", "--policy", "nope"]) == 2
        assert "error:" in capsys.readouterr().err
        bad = tmp_path / "bad.toml"
        bad.write_text("[experiment]\nunknown = 1\n")
        assert main(["run", "--config", str(bad)]) == 2
        assert main(["plot", str(tmp_path / "missing.csv"), "--output", str(tmp_path)]) == 2
