import json

import numpy as np
import pytest

from repstack.cli import BENCH_PRESETS, bench_config, main
from repstack.game import GameInstance, appendix_c_game


def run(argv):
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


def test_usage_errors(tmp_path):
    assert run([]) == 1
    assert run(["bench", "nonsense"]) == 1
    assert run(["run"]) == 1
    assert run(["frobnicate"]) == 1


def test_config_errors(tmp_path):
    assert run(["run", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"H": 5, "colour": "red"}))
    assert run(["run", "--config", str(bad)]) == 2
    bad.write_text(json.dumps({"H": 5, "memory": "fm:3"}))  # memory needs ftpl-memory
    assert run(["run", "--config", str(bad)]) == 2
    bad.write_text("{not json")
    assert run(["run", "--config", str(bad)]) == 2
    bad.write_text(json.dumps({"game": "nowhere.json"}))
    assert run(["run", "--config", str(bad)]) == 2


def test_runtime_error_exit(tmp_path):
    assert run(["gen-game", "random", "--N", "9", "--M", "2", "--K", "1", "--out", str(tmp_path / "g.json")]) == 0
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"game": "g.json", "response": "qr", "H": 2, "S": 1}))
    assert run(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_gen_game(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(["gen-game", "random", "--N", "3", "--M", "4", "--K", "2", "--seed", "7", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    g = GameInstance.load(a)
    assert (g.N, g.M, g.K) == (3, 4, 2)
    assert run(["gen-game", "appendixC", "--out", str(a)]) == 0
    assert np.array_equal(GameInstance.load(a).V, appendix_c_game().V)
    assert run(["gen-game", "random", "--eta", "-1", "--out", str(a)]) == 2


def test_run_toml(tmp_path, capsys):
    cfg = tmp_path / "exp.toml"
    cfg.write_text('algorithm = "ftpl-memory"\nresponse = "qr"\nmemory = "dm:0.5"\n'
                   'adversary = "cyc:2"\nH = 6\nS = 2\nseed = 3\n')
    assert run(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert "mean final regret" in capsys.readouterr().out
    assert (tmp_path / "o" / "exp.csv").exists() and (tmp_path / "o" / "exp.svg").exists()
    assert sorted(p.name for p in (tmp_path / "o" / "exp_runs").iterdir()) == ["run_3.csv", "run_4.csv"]


def test_bench_presets():
    assert set(BENCH_PRESETS) == {f"{a}-{m}" for a in ("stoc", "cyc") for m in ("nomem", "fm", "dm")}
    game, cfg = bench_config("cyc-dm")
    assert cfg.H == 200 and str(cfg.memory) == "dm:0.9" and str(cfg.adversary) == "cyc:5"
    _, cfg = bench_config("stoc-nomem", epsilon=0.5, nu=2.0)
    assert cfg.epsilon == 0.5 and cfg.resolved_nu(game) == 2.0


@pytest.mark.slow
def test_bench_is_byte_reproducible(tmp_path):
    for d in ("a", "b"):
        assert run(["bench", "stoc-nomem", "--iterations", "2", "--seed", "5", "--out", str(tmp_path / d)]) == 0
    for name in ("stoc-nomem.csv", "stoc-nomem.svg", "stoc-nomem_runs/run_6.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_check_command(capsys):
    assert run(["check", "--seed", "1"]) == 0
    assert "0 failed" in capsys.readouterr().out
