import time

import numpy as np
import pytest

from irsuav import cli
from irsuav.config import (DEFAULTS, PRESETS, ConfigError, load_config, parse_config, preset,
                           serialize, validate)
from irsuav.env import TABLE1_IRS, TABLE1_UAVS


def test_empty_config_gives_reference_defaults(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("")
    cfg = load_config(path)
    env = cfg.env_config()
    net, ch = env.net, env.channel
    assert (net.N, net.M, net.K) == (3, 10, 10)
    assert net.B == 1e6 and net.P_max == 5.0 and net.P_fixed == 4.0
    assert net.noise_power == pytest.approx(10 ** (-134 / 10) * 1e-3, rel=1e-12)
    assert ch.beta0 == pytest.approx(1e-3, rel=1e-12)
    assert (ch.kappa1, ch.kappa2, ch.beta1, ch.d_over_lambda) == (2.0, 2.2, 4.0, 0.5)
    assert env.irs_position == TABLE1_IRS and env.uav_positions == TABLE1_UAVS
    assert env.cluster_radius == 500.0
    assert cfg.ddpg_config().zeta == 0.9 and cfg.ddpg_config().batch_size == 32
    assert cfg.ppo_config().zeta == 0.9


def test_override_k():
    cfg = parse_config("K = 30\n")
    assert cfg.env_config().net.K == 30 and cfg.env_config().channel.K == 30
    assert cfg["M"] == 10


def test_comments_and_points():
    cfg = parse_config("# hello\nN = 2  # two UAVs\nuavs = 0,0,100; 10,10,100\n")
    assert cfg.env_config().uav_positions == ((0.0, 0.0, 100.0), (10.0, 10.0, 100.0))


@pytest.mark.parametrize("text", [
    "p_max_w = -1\n", "p_max_w = 0\n", "K = 0\n", "N = 0\n", "episodes = 0\n",
    "bogus = 3\n", "K = 3\nK = 4\n", "K\n", "K = ten\n", "scheme = q-learning\n",
    "N = 2\nuavs = 0,0,100\n",
])
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        validate(parse_config(text))


def test_round_trip_idempotent():
    cfg = parse_config("K = 20\nseeds = 1,2\nirs = 1,2,3\nnoise_dbm = -120\n")
    once = serialize(cfg)
    assert serialize(parse_config(once)) == once
    assert parse_config(once).values == cfg.values


def test_serialized_key_order_is_canonical():
    a = serialize(parse_config("K = 20\nM = 3\n"))
    b = serialize(parse_config("M = 3\nK = 20\n"))
    assert a == b
    keys = [line.split("=")[0].strip() for line in a.splitlines() if "=" in line]
    assert keys == [k for k in DEFAULTS if k in keys]


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_validate(name):
    validate(preset(name))


def read_outputs(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*.csv"))}


def test_smoke_preset_is_fast(tmp_path):
    start = time.perf_counter()
    code = cli.main(["train", "--preset", "smoke", "--scheme", "c-ddpg", "--out", str(tmp_path)])
    assert code == 0
    assert time.perf_counter() - start < 5
    assert (tmp_path / "c-ddpg_0.csv").exists()
    assert (tmp_path / "summary.csv").exists() and (tmp_path / "plotdata.csv").exists()
    lines = (tmp_path / "c-ddpg_0.csv").read_text().splitlines()
    assert len(lines) == 1 + 5 + 1


def test_rerun_is_byte_identical(tmp_path):
    args = ["train", "--preset", "smoke", "--scheme", "p-ppo", "--scheme", "rss", "--seed", "4"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0
    a, b = read_outputs(tmp_path / "a"), read_outputs(tmp_path / "b")
    assert a and a == b


def test_sweep_emits_traces_and_summary(tmp_path):
    code = cli.main(["sweep", "--preset", "smoke", "--scheme", "p-ppo", "--param", "K",
                     "--values", "10,20,30", "--out", str(tmp_path)])
    assert code == 0
    traces = sorted(p.relative_to(tmp_path).as_posix() for p in tmp_path.glob("K*/p-ppo_0.csv"))
    assert traces == ["K10/p-ppo_0.csv", "K20/p-ppo_0.csv", "K30/p-ppo_0.csv"]
    summary = (tmp_path / "summary.csv").read_text().splitlines()
    assert summary[0].split(",")[:2] == ["label", "scheme"]
    assert len(summary) == 4


def test_baseline_subcommand(tmp_path):
    assert cli.main(["baseline", "--preset", "smoke", "--out", str(tmp_path)]) == 0
    assert {p.name for p in tmp_path.glob("*_0.csv")} == {"mpt_0.csv", "rss_0.csv"}


def test_env_var_sets_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("IRSUAV_OUT", str(tmp_path / "env"))
    assert cli.main(["baseline", "--preset", "smoke", "--scheme", "mpt"]) == 0
    assert (tmp_path / "env" / "mpt_0.csv").exists()
    assert cli.main(["baseline", "--preset", "smoke", "--scheme", "mpt",
                     "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "mpt_0.csv").exists()


def test_exit_code_for_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("p_max_w = -5\n")
    assert cli.main(["train", "--config", str(bad), "--out", str(tmp_path)]) == 1
    assert "configuration error" in capsys.readouterr().err
    assert cli.main(["baseline", "--preset", "smoke", "--scheme", "c-ddpg"]) == 1
    assert cli.main(["train", "--preset", "smoke", "--set", "nonsense"]) == 1


def test_exit_code_for_runtime_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    assert cli.main(["baseline", "--preset", "smoke", "--scheme", "mpt",
                     "--out", str(blocker / "sub")]) == 2


def test_config_file_scheme_is_default(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(PRESETS["smoke"] + "scheme = c-ppo\nseeds = 2\n")
    assert cli.main(["train", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
    assert [p.name for p in (tmp_path / "o").glob("*_2.csv")] == ["c-ppo_2.csv"]


def test_trajectory_dump(tmp_path):
    assert cli.main(["baseline", "--preset", "smoke", "--scheme", "rss", "--trajectory",
                     "--out", str(tmp_path)]) == 0
    files = list(tmp_path.rglob("*traj*.csv"))
    assert files
    header = files[0].read_text().splitlines()[0].split(",")
    assert header[:3] == ["episode", "step", "reward"] and len(header) == 3 + 2
    assert len(files[0].read_text().splitlines()) == 1 + 5 * 10


def test_check_subcommand(capsys):
    assert cli.main(["check"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") >= 7 and "FAIL" not in out
