import json
import subprocess
import sys

import pytest

from fsgalerkin.cli import DEFAULTS, load_config, main, resolve
from fsgalerkin import ConfigurationError

SMALL = """
[problem]
builtin = "heat6"
modes = 4
alpha = 2.0
horizon = 0.2
s_points = [0.05]
sigma_points = [0.08]

[numerics]
steps_per_interval = 8
mc_samples = 3
n = 4
m_values = [1, 2]
n_values = [1, 2]
n_ref = 4
"""


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text(SMALL)
    return p


def test_defaults_resolve():
    cfg = resolve({})
    assert cfg.problem["modes"] == DEFAULTS["problem"]["modes"]
    assert cfg.experiment == "solve"


@pytest.mark.parametrize(
    "raw",
    [
        {"bogus": {}},
        {"problem": {"nope": 1}},
        {"problem": {"builtin": "wave"}},
        {"numerics": {"steps_per_interval": 0}},
        {"numerics": {"mc_samples": 2.5}},
        {"numerics": {"seed": -1}},
        {"numerics": {"m_values": []}},
        {"numerics": {"n_values": [1, "a"]}},
        {"problem": {"modes": 0}},
        {"problem": {"s_points": 0.4}},
        {"experiment": {"name": "dance"}},
    ],
)
def test_bad_configs(raw):
    with pytest.raises(ConfigurationError):
        resolve(raw)


def test_missing_file(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "none.toml")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config"


def test_invalid_schedule_is_config_error(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text('[problem]\ns_points = [0.6]\nsigma_points = [0.5]\n')
    assert main(["--config", str(p)]) == 2


def test_n_too_large_is_config_error(cfg_file, tmp_path):
    text = cfg_file.read_text().replace("n = 4", "n = 9")
    cfg_file.write_text(text)
    assert main(["--config", str(cfg_file), "--out", str(tmp_path / "o")]) == 2


def test_solve_is_reproducible(cfg_file, tmp_path):
    outs = []
    for tag in ("a", "b"):
        d = tmp_path / tag
        assert main(["--config", str(cfg_file), "--out", str(d)]) == 0
        outs.append(((d / "solution.csv").read_bytes(), (d / "picard.csv").read_bytes()))
    assert outs[0] == outs[1]
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert man["config"]["numerics"]["picard_tol"] == DEFAULTS["numerics"]["picard_tol"]
    assert man["solve"]["converged"]
    assert {"constants", "feasibility"} <= set(man)


def test_seed_changes_output(cfg_file, tmp_path):
    main(["--config", str(cfg_file), "--out", str(tmp_path / "a")])
    main(["--config", str(cfg_file), "--out", str(tmp_path / "b"), "--seed", "99"])
    assert (tmp_path / "a" / "solution.csv").read_bytes() != (tmp_path / "b" / "solution.csv").read_bytes()


@pytest.mark.parametrize("exp,files", [
    ("converge", ["convergence.csv", "convergence.svg"]),
    ("coeffs", ["coeffs.csv"]),
    ("constants", ["constants.csv"]),
    ("mlcheck", ["mlcheck.csv"]),
])
def test_experiments(cfg_file, tmp_path, exp, files):
    out = tmp_path / exp
    assert main(["--config", str(cfg_file), "--out", str(out), "--experiment", exp]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["files"] == files
    for f in files:
        assert (out / f).stat().st_size > 0


def test_mlcheck_accuracy(tmp_path):
    main(["--experiment", "mlcheck", "--out", str(tmp_path)])
    rows = (tmp_path / "mlcheck.csv").read_text().splitlines()[1:]
    assert max(float(r.split(",")[-1]) for r in rows) < 1e-9


def test_strict_infeasible(tmp_path, capsys):
    # the default 32-mode heat problem has D >= 1
    rc = main(["--experiment", "constants", "--strict", "--out", str(tmp_path)])
    assert rc == 3
    assert json.loads(capsys.readouterr().err)["error"] == "infeasible"
    assert main(["--experiment", "constants", "--out", str(tmp_path)]) == 0


def test_scalar_builtin(tmp_path):
    p = tmp_path / "s.toml"
    p.write_text('[problem]\nbuiltin = "scalar6"\nmodes = 1\nr = "sin"\n[numerics]\nn = 1\nsteps_per_interval = 8\n')
    assert main(["--config", str(p), "--out", str(tmp_path / "o")]) == 0
    header = (tmp_path / "o" / "solution.csv").read_text().splitlines()[4]
    assert header == "time,mode_0"


def test_load_config_none():
    assert load_config(None).experiment == "solve"


def test_module_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "fsgalerkin", "--experiment", "mlcheck", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0
    assert (tmp_path / "mlcheck.csv").exists()
