import json
import subprocess
import sys

import numpy as np
import pytest

from ostrogradsky import StructureError
from ostrogradsky.cli import main
from ostrogradsky.config import build_run_config, parse_config_text, parse_param
from ostrogradsky.integrate import read_csv


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_config_parsing():
    vals = parse_config_text("# comment\nmodel = oscillator\nh = 2 # all springs\n\nlambda=0.5\nsteps = 10\n")
    assert vals == {"model": "oscillator", "h": "2", "lambda": "0.5", "steps": "10"}
    with pytest.raises(StructureError):
        parse_config_text("nonsense = 1\n")
    with pytest.raises(StructureError):
        parse_config_text("just text\n")


def test_flags_win_over_file():
    cfg = build_run_config({"dt": "0.01", "steps": "5", "m": "2"}, {"dt": 0.5, "steps": None}, {"m": 3.0})
    assert cfg.dt == 0.5 and cfg.steps == 5 and cfg.params["m"] == 3.0


def test_config_validation():
    with pytest.raises(StructureError):
        build_run_config({"steps": "0"})
    with pytest.raises(StructureError):
        build_run_config({"mode": "sideways"})
    with pytest.raises(StructureError):
        parse_param("m")


def test_list_models(capsys):
    code, out, _ = run(["list-models"], capsys)
    assert code == 0
    assert "oscillator" in out and "gravwave-mode" in out and "lambda" in out


def test_derive_zero_state(capsys):
    code, out, _ = run(["derive", "--model", "oscillator"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["P1"] == [0, 0] and rep["P2"] == [0, 0] and rep["H"] == 0
    assert rep["constraints"] == [0, 0]
    assert rep["chain"]["closed"] and rep["chain"]["level"] == 4


def test_derive_energy(capsys):
    code, out, _ = run(["derive", "--model", "oscillator", "--state", "1,0,0,0,0,0,0,0"], capsys)
    assert code == 0 and json.loads(out)["H"] == pytest.approx(0.5, abs=1e-15)


def test_derive_from_jet(capsys):
    code, out, _ = run(["derive", "--model", "oscillator", "--jet", "1 2 3 4 5 6 7 8"], capsys)
    rep = json.loads(out)
    assert rep["P1"] == pytest.approx([-1, -14]) and rep["P2"] == pytest.approx([5, 9])


def test_derive_is_deterministic(capsys):
    argv = ["derive", "--model", "oscillator", "--param", "lambda=2", "--state", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8"]
    assert run(argv, capsys)[1] == run(argv, capsys)[1]


def test_derive_mode_model(capsys):
    code, out, _ = run(["derive", "--model", "gravwave-mode", "--param", "k=2", "--state", "1,0,-4,0"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["constraints"] == [0, 0] and rep["chain"]["level"] == 3


def test_unknown_model(capsys):
    code, _, err = run(["derive", "--model", "pendulum"], capsys)
    assert code == 2 and "unknown model" in err


def test_unknown_param(capsys):
    code, _, err = run(["derive", "--model", "oscillator", "--param", "c=1"], capsys)
    assert code == 2


def test_malformed_state(capsys):
    assert run(["derive", "--model", "oscillator", "--state", "1,2"], capsys)[0] == 2
    assert run(["derive", "--model", "oscillator", "--state", "a,b"], capsys)[0] == 2


def test_bad_flag_is_usage_error(capsys):
    assert run(["integrate", "--steps", "ten"], capsys)[0] == 2
    assert run([], capsys)[0] == 2


def test_integrate_projected(tmp_path, capsys):
    out = tmp_path / "run.csv"
    code, stdout, _ = run(
        ["integrate", "--model", "oscillator", "--mode", "projected", "--cbar", "1,0,0,0,0,0,0,0",
         "--steps", "10000", "--dt", "1e-3", "--output", str(out)],
        capsys,
    )
    assert code == 0 and "diverged=false" in stdout
    cols, data = read_csv(out)
    assert cols[-1] == "phi_max"
    assert np.max(data[:, -1]) < 1e-8


def test_integrate_free_diverges(tmp_path, capsys):
    code, stdout, _ = run(
        ["integrate", "--model", "oscillator", "--cbar", "0,0,0,0,0,0,1e-6,0",
         "--steps", "60000", "--output", str(tmp_path / "free.csv")],
        capsys,
    )
    assert code == 3 and "diverged=true" in stdout


def test_integrate_zero_steps(capsys):
    code, _, err = run(["integrate", "--model", "oscillator", "--steps", "0"], capsys)
    assert code == 2 and "steps" in err


def test_integrate_io_failure(tmp_path, capsys):
    code, _, _ = run(
        ["integrate", "--model", "oscillator", "--steps", "5", "--output", str(tmp_path / "no" / "x.csv")],
        capsys,
    )
    assert code == 4


def test_same_seed_same_bytes(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert run(["integrate", "--model", "oscillator", "--seed", "11", "--steps", "300", "--output", str(p)], capsys)[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    run(["integrate", "--model", "oscillator", "--seed", "12", "--steps", "300", "--output", str(paths[1])], capsys)
    assert paths[0].read_bytes() != paths[1].read_bytes()


def test_config_file_and_json(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("model = gravwave-mode\nc = 1\nk = 2\ndt = 1e-3\nsteps = 50\nformat = json\nmode = projected\n")
    out = tmp_path / "run.json"
    code, _, _ = run(["integrate", "--config", str(cfg), "--initial", "1,0,-4,0", "--output", str(out)], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["metadata"]["projected"] and doc["metadata"]["columns"][1] == "h"
    assert len(doc["records"]) == 51
    # flag overrides file
    code, _, _ = run(["integrate", "--config", str(cfg), "--steps", "7", "--initial", "1,0,-4,0", "--output", str(out)], capsys)
    assert len(json.loads(out.read_text())["records"]) == 8


def test_batch(tmp_path, capsys):
    batch = tmp_path / "initials.txt"
    batch.write_text("# one state per line\n1,0,-4,0\n0,1,0,-4\n1,0,-3.99,0\n")
    out = tmp_path / "mode.csv"
    code, stdout, _ = run(
        ["integrate", "--model", "gravwave-mode", "--param", "k=2", "--steps", "100", "--batch", str(batch), "--output", str(out)],
        capsys,
    )
    assert code == 0
    files = sorted(p.name for p in tmp_path.glob("mode_*.csv"))
    assert files == ["mode_0.csv", "mode_1.csv", "mode_2.csv"]
    cols, data = read_csv(tmp_path / "mode_2.csv")
    assert data[0, 3] == -3.99


def test_verify_oscillator(capsys):
    code, out, _ = run(["verify", "--model", "oscillator"], capsys)
    assert code == 0 and "FAIL" not in out


def test_verify_fault(capsys):
    code, out, _ = run(["verify", "--model", "oscillator", "--fault", "dV"], capsys)
    assert code == 1
    assert "FAIL  exact gradient" in out


def test_verify_mode(capsys):
    code, out, _ = run(["verify", "--model", "gravwave-mode", "--param", "c=1", "--param", "k=2"], capsys)
    assert code == 0 and "FAIL" not in out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ostrogradsky", "list-models"], capture_output=True, text=True
    )
    assert proc.returncode == 0 and "oscillator" in proc.stdout
