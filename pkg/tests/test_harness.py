import json
import math
from pathlib import Path

import numpy as np
import pytest

from gauss_ts.bandit import aggregate
from gauss_ts.errors import ConfigError
from gauss_ts.harness import output
from gauss_ts.harness.cli import main
from gauss_ts.harness.config import load_spec, spec_from_dict
from gauss_ts.harness.experiments import growth_exponent

BASE = """
name = "small"
horizon = 3000
reps = 24
seed = 5

[env]
mu = [0.0, -1.0, -2.0]
sigma2 = [1.0, 1.0, 4.0]

[policy]
alpha = -0.5
"""


def write(tmp_path, text, name="spec.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def base_dict(**over):
    d = {
        "name": "x",
        "horizon": 100,
        "reps": 2,
        "seed": 1,
        "env": {"mu": [0.0, -1.0], "sigma2": [1.0, 1.0]},
        "policy": {"alpha": -0.5},
    }
    d.update(over)
    return d


class TestConfig:
    def test_load(self, tmp_path):
        spec = load_spec(write(tmp_path, BASE))
        assert spec.name == "small" and spec.env.K == 3 and spec.reps == 24
        assert spec.checkpoints[-1] == 3000 and spec.policy.tie_break == "uniform_random"

    def test_roundtrip_dict(self, tmp_path):
        spec = load_spec(write(tmp_path, BASE + "\n[bounds]\nepsilon = 0.1\n"))
        assert spec_from_dict(spec.to_dict()) == spec

    def test_known_arms(self):
        spec = spec_from_dict(base_dict(policy={"alpha": 0.5, "known": {"1": -0.5}}))
        assert spec.policy.known == {1: -0.5}

    @pytest.mark.parametrize(
        "override,message",
        [
            ({"reps": 0}, "reps must be ≥ 1"),
            ({"horizon": 0}, "horizon must be ≥ 1"),
            ({"horizon": 5}, "horizon must be ≥ 8"),
            ({"seed": -1}, "seed must be ≥ 0"),
            ({"seed": 2**64}, "seed must be ≤"),
            ({"reps": 2.5}, "reps must be an integer"),
            ({"reps": True}, "reps must be an integer"),
            ({"name": ""}, "name must be a non-empty string"),
            ({"name": "a/b"}, "name must be usable as a file name"),
            ({"colour": 1}, "unknown key colour"),
            ({"env": {"mu": [0.0, -1.0], "sigma2": [1.0, 1.0], "extra": 1}}, "unknown key env.extra"),
            ({"env": {"mu": [0.0], "sigma2": [1.0]}}, "env.mu needs at least two arms"),
            ({"env": {"mu": [0.0, 1.0], "sigma2": [1.0]}}, "env.sigma2 must have the same length"),
            ({"env": {"mu": [0.0, 1.0], "sigma2": [1.0, 0.0]}}, r"env.sigma2\[1\] must be > 0"),
            ({"env": {"mu": [0.0, "a"], "sigma2": [1.0, 1.0]}}, r"env.mu\[1\] must be a number"),
            ({"policy": {}}, "missing required key policy.alpha"),
            ({"policy": {"alpha": 0.0, "tie_break": "coin"}}, "policy.tie_break"),
            ({"policy": {"alpha": 0.0, "known": {"7": 1.0}}}, "out of range"),
            ({"policy": {"alpha": 0.0, "known": {"0": 1.0, "1": 1.0}}}, "may not cover every arm"),
            ({"checkpoints": [10, 5]}, "strictly increasing"),
            ({"checkpoints": [10, 500]}, r"checkpoints\[1\] must be ≤ 100"),
            ({"bounds": {"epsilon": 0.6}}, "bounds.epsilon must lie in"),
            ({"bounds": {"epsilon": 0.1}, "policy": {"alpha": 0.5}}, "requires policy.alpha < 0"),
            ({"output": {"path": "x"}}, "unknown key output.path"),
        ],
    )
    def test_rejects(self, override, message):
        with pytest.raises(ConfigError, match=message):
            spec_from_dict(base_dict(**override))

    def test_missing_key(self):
        d = base_dict()
        del d["seed"]
        with pytest.raises(ConfigError, match="missing required key seed"):
            spec_from_dict(d)

    def test_bad_files(self, tmp_path):
        with pytest.raises(ConfigError, match="invalid TOML"):
            load_spec(write(tmp_path, "name = = 1"))
        with pytest.raises(ConfigError, match="cannot read"):
            load_spec(tmp_path / "missing.toml")
        with pytest.raises(ConfigError, match="no 'spec'"):
            load_spec(write(tmp_path, "{}", "m.json"))


class TestRunCommand:
    def test_outputs_and_determinism(self, tmp_path):
        spec = write(tmp_path, BASE + "\n[bounds]\nepsilon = 0.1\n")
        assert main(["--out", str(tmp_path / "a"), "run", str(spec)]) == 0
        assert main(["run", str(spec), "--out", str(tmp_path / "b"), "--jobs", "3"]) == 0
        a = (tmp_path / "a" / "small.csv").read_bytes()
        assert a == (tmp_path / "b" / "small.csv").read_bytes()
        lines = a.decode().splitlines()
        assert lines[0] == "#schema=1"
        assert lines[1] == ",".join(output.SUMMARY_COLUMNS)
        last = lines[-1].split(",")
        assert last[0] == "3000" and float(last[5]) > float(last[1])

    def test_reps_roundtrip(self, tmp_path):
        spec = write(tmp_path, BASE)
        main(["--out", str(tmp_path), "run", str(spec)])
        checkpoints, regret, pulls = output.read_reps(tmp_path / "small_reps.csv")
        assert np.all(pulls.sum(axis=1) == 3000)
        _, rows = output.read_csv(tmp_path / "small.csv")
        assert [int(r[0]) for r in rows] == list(checkpoints)
        for c, row in enumerate(rows):
            mean, se = aggregate(regret[:, c])
            assert (mean, se) == (float(row[1]), float(row[2]))

    def test_manifest_reruns_byte_exact(self, tmp_path):
        spec = write(tmp_path, BASE)
        main(["--out", str(tmp_path / "a"), "run", str(spec)])
        manifest = tmp_path / "a" / "small.manifest.json"
        doc = json.loads(manifest.read_text())
        assert doc["spec"]["reps"] == 24 and doc["version"] and doc["wall_time_s"] >= 0
        assert main(["--out", str(tmp_path / "b"), "run", str(manifest)]) == 0
        assert (tmp_path / "a" / "small.csv").read_bytes() == (tmp_path / "b" / "small.csv").read_bytes()

    def test_env_var_and_flag_precedence(self, tmp_path, monkeypatch):
        spec = write(tmp_path, BASE + '\n[output]\ndir = "' + str(tmp_path / "from_spec") + '"\n')
        monkeypatch.setenv("GAUSS_TS_OUT", str(tmp_path / "from_env"))
        main(["run", str(spec)])
        assert (tmp_path / "from_env" / "small.csv").exists()
        main(["run", str(spec), "--out", str(tmp_path / "from_flag")])
        assert (tmp_path / "from_flag" / "small.csv").exists()
        monkeypatch.delenv("GAUSS_TS_OUT")
        main(["run", str(spec)])
        assert (tmp_path / "from_spec" / "small.csv").exists()

    def test_config_error_exit(self, tmp_path, capsys):
        spec = write(tmp_path, BASE.replace("reps = 24", "reps = 0"))
        assert main(["run", str(spec)]) == 1
        assert "reps must be ≥ 1" in capsys.readouterr().err

    def test_bad_jobs(self, tmp_path):
        assert main(["run", str(write(tmp_path, BASE)), "--jobs", "0"]) == 1

    def test_usage_error_is_config_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 1

    def test_runtime_error_exit(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert main(["run", str(write(tmp_path, BASE)), "--out", str(blocker / "sub")]) == 2
        assert "runtime error" in capsys.readouterr().err


class TestVerifyCommand:
    def test_lemma1_passes(self, capsys):
        assert main(["verify", "lemma1"]) == 0
        assert "lemma1: 996/996 pass" in capsys.readouterr().out

    def test_lemma3_passes(self):
        assert main(["verify", "lemma3"]) == 0

    def test_lemma2_negative_control(self, capsys):
        code = main(["verify", "lemma2", "--seed", "1", "--trials", "20000", "--debug-bound-divisor", "10"])
        assert code == 3
        assert "FAIL" in capsys.readouterr().out

    def test_lemma2_small_passes(self):
        assert main(["verify", "lemma2", "--seed", "2", "--trials", "20000"]) == 0

    def test_bad_suite(self):
        with pytest.raises(SystemExit) as exc:
            main(["verify", "lemma9"])
        assert exc.value.code == 1


class TestSeparationCommand:
    def test_empty_alphas(self):
        assert main(["separation", "--alphas", ""]) == 1
        assert main(["separation", "--alphas", " , "]) == 1

    def test_bad_reps(self):
        assert main(["separation", "--alphas", "0", "--reps", "0"]) == 1

    def test_small_run(self, tmp_path):
        code = main([
            "separation", "--alphas", "-0.5,0.5", "--horizon", "2000", "--reps", "20",
            "--seed", "3", "--known-sigma2", "1,1e-4", "--out", str(tmp_path),
        ])
        assert code == 0
        header, rows = output.read_csv(tmp_path / "separation_summary.csv")
        assert header[:3] == ["alpha", "known_sigma2", "exponent"]
        assert len(rows) == 4
        # the given arm's variance does not enter any decision
        assert rows[0][2] == rows[2][2] and rows[0][3] != rows[2][3]
        assert (tmp_path / "separation_alpha-0.5_s21.0.csv").exists()


class TestGrowthExponent:
    def test_power_law(self):
        T = np.array([10, 100, 1000, 10_000, 100_000])
        assert growth_exponent(T, 3.0 * T**0.4) == pytest.approx(0.4)

    def test_uses_top_two_decades(self):
        T = np.array([10, 100, 1000, 10_000, 100_000])
        y = np.where(T >= 1000, 5.0 * np.log(T), 1e-6)
        slope = growth_exponent(T, y)
        assert 0.0 < slope < 0.2

    def test_logarithmic_growth_small_exponent(self):
        T = np.unique(np.geomspace(1e3, 1e5, 17).astype(int))
        assert growth_exponent(T, 2.0 * np.log(T)) < 0.25

    def test_no_data(self):
        assert math.isnan(growth_exponent([10, 100], [0.0, 0.0]))


@pytest.mark.slow
class TestThreeArmPreset:
    def test_envelope(self, tmp_path):
        preset = Path(__file__).resolve().parents[1] / "configs" / "theorem1.toml"
        assert main(["run", str(preset), "--out", str(tmp_path)]) == 0
        header, rows = output.read_csv(tmp_path / "theorem1.csv")
        last = dict(zip(header, rows[-1]))
        ratio, coef = float(last["mean_regret_over_lnT"]), float(last["lower_bound_coef"])
        bound = float(last["finite_time_bound"])
        assert float(last["mean_regret"]) < bound
        if not 0.8 * coef <= ratio <= 3.0 * coef:
            pytest.xfail(f"regret/lnT={ratio:.4f} outside [{0.8 * coef:.4f}, {3.0 * coef:.4f}] at T=1e5")
