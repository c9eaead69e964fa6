import json
import subprocess
import sys
from pathlib import Path

import pytest

from thinwires.cli import main
from thinwires.config import REQUIRED, Config, ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _run(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--out", str(out)])
    return code, out


def test_no_task_is_a_usage_error(tmp_path, capsys):
    code, _ = _run(tmp_path)
    assert code == 2
    assert "no task" in capsys.readouterr().err


def test_bad_config_is_a_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[wire]\nr = abc\n[run]\ntask = cell2d-solve\n")
    code, _ = _run(tmp_path, "--config", str(bad))
    assert code == 2
    assert "[wire] r" in capsys.readouterr().err
    empty = tmp_path / "empty.ini"
    empty.write_text("")
    assert _run(tmp_path, "--config", str(empty))[0] == 2
    broken = tmp_path / "broken.ini"
    broken.write_text("[wire\nr = 1\n")
    assert _run(tmp_path, "--config", str(broken))[0] == 2
    unknown = tmp_path / "unknown.ini"
    unknown.write_text("[run]\ntask = dance\n")
    assert _run(tmp_path, "--config", str(unknown))[0] == 2


def test_unknown_profile_rejected(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["classify", "--tolerance-profile", "lax"])
    assert exc.value.code == 2


def test_classify_suite_outputs(tmp_path):
    code, out = _run(tmp_path, "--config", str(CONFIGS / "classify_suite.ini"))
    assert code == 0
    records = json.loads((out / "classify.json").read_text())
    assert len(records) == 12
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["task"] == "classify" and manifest["kernel_backend"] in ("numba", "numpy")
    assert "time" not in json.dumps(manifest).lower()
    assert (out / "summary.txt").read_text().strip().endswith("overall: PASS")


def test_failed_expectation_exits_one(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"law": {"radius": "power", "p": 2.0}, "classify": {"expect": "Inactive"}}))
    code, out = _run(tmp_path, "classify", "--config", str(cfg))
    assert code == 1
    assert "FAIL" in (out / "summary.txt").read_text()


def test_scatter_outputs_are_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(["--config", str(CONFIGS / "scatter.ini"), "--out", str(a)]) == 0
    assert main(["--config", str(CONFIGS / "scatter.ini"), "--out", str(b)]) == 0
    for f in sorted(p.name for p in a.iterdir()):
        assert (a / f).read_bytes() == (b / f).read_bytes(), f
    header = (a / "scatter.csv").read_text().splitlines()[0]
    assert header.startswith("kind,theta,plane")
    assert (a / "profile_Inactive.csv").exists()


def test_sweep_is_seeded(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    c = tmp_path / "c"
    cfg = tmp_path / "s.ini"
    cfg.write_text("[sweep]\ncount = 20\n")
    assert main(["sweep", "--config", str(cfg), "--seed", "4", "--out", str(a)]) == 0
    assert main(["sweep", "--config", str(cfg), "--seed", "4", "--out", str(b)]) == 0
    assert main(["sweep", "--config", str(cfg), "--seed", "5", "--out", str(c)]) == 0
    assert (a / "sweep_monotone.csv").read_bytes() == (b / "sweep_monotone.csv").read_bytes()
    assert (a / "sweep_monotone.csv").read_bytes() != (c / "sweep_monotone.csv").read_bytes()


def test_cell2d_solve(tmp_path):
    code, out = _run(tmp_path, "cell2d-solve")
    assert code == 0
    rec = json.loads((out / "cell2d.json").read_text())
    assert rec["mesh"]["min_angle"] > 20
    assert (out / "mesh.txt").read_text().startswith("# nodes")


def test_defect_ladder_reports_failure_for_critical_law(tmp_path):
    code, out = _run(tmp_path, "--config", str(CONFIGS / "defects_critical.ini"))
    assert code == 1
    rows = (out / "defects.csv").read_text().splitlines()
    assert rows[0] == "eta,a,b,kind,r,gap" and len(rows) == 7


def test_subcommand_overrides_config_task(tmp_path):
    code, out = _run(tmp_path, "scatter", "--config", str(CONFIGS / "classify_suite.ini"))
    assert code == 0 and (out / "scatter.csv").exists()


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "thinwires", "classify", "--out", str(tmp_path / "o")],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "overall: PASS" in res.stdout


# --- config accessors ----------------------------------------------------------


def test_config_accessors(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[a]\nx = 1.5  # comment\nz = 2+0.5j\nl = 1, 2,3\nr = 3..5\ng = 0.1:0.2, 0.4:0.5\nw = a, b\n")
    c = Config.load(p)
    assert c.float("a", "x") == 1.5
    assert c.complex("a", "z") == complex(2, 0.5)
    assert c.floats("a", "l") == [1.0, 2.0, 3.0]
    assert c.exponent_range("a", "r") == [3, 4, 5]
    assert c.gaps("a", "g") == [(0.1, 0.2), (0.4, 0.5)]
    assert c.words("a", "w") == ["a", "b"]
    assert c.int("a", "missing", 7) == 7
    with pytest.raises(ConfigError):
        c.int("a", "x")
    with pytest.raises(ConfigError):
        c.exponent_range("a", "l")
    with pytest.raises(ConfigError):
        c.str("a", "nothing", REQUIRED)


def test_json_config_top_level_keys(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"task": "scatter", "media": {"eps_plus": [4, 0.1]}}))
    c = Config.load(p)
    assert c.str("run", "task") == "scatter"
    assert c.complex("media", "eps_plus") == complex(4, 0.1)
    p.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        Config.load(p)
    p.write_text("{bad json")
    with pytest.raises(ConfigError, match=":1:"):
        Config.load(p)
