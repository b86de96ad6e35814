import csv
import json

import pytest
import yaml

from jointruin import cli

MODEL = {"r": 0.05, "lam": 1.0, "c1": 2.0, "c2": 1.0, "delta1": 0.5, "delta2": 0.5}
EXP = {"family": "exponential", "mean_size": 1.0}
RV = {"family": "regvarying", "alpha": 1.5, "beta": 1.0}

SIM = {"model": MODEL, "claim": EXP, "seed": 3,
       "simulate": {"reserves": [[1.0, 3.0], [3.0, 1.0]], "T": [5.0], "n": 1000, "dump_paths": 1}}
SOLVE = {"model": MODEL, "claim": EXP, "seed": 3,
         "solve": {"s": 0.5, "kind": "min", "n_core": 21, "vmax": 8.0, "tol": 1e-2, "boundary_n": 20_000,
                   "probes": [[0.5, 1.5], [1.0, 3.0]], "probe_n": 20_000}}
ASY = {"model": MODEL, "claim": RV, "seed": 3,
       "asymptotics": {"T": 10.0, "x": [50, 100, 200, 400, 800], "kind": "min", "n": 2000, "budget": 100_000}}


def write(tmp_path, cfg, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg))
    return path


def run(tmp_path, cfg, command, out="out", *extra):
    path = write(tmp_path, cfg)
    return cli.main([command, "--config", str(path), "--out", str(tmp_path / out), *extra])


def data_files(out):
    return {p.relative_to(out).as_posix(): p.read_bytes() for p in sorted(out.rglob("*"))
            if p.is_file() and p.name != "manifest.json"}


def read_csv(path):
    with open(path) as fh:
        first = fh.readline()
        return first, list(csv.DictReader(fh))


def test_simulate_smoke(tmp_path):
    assert run(tmp_path, SIM, "simulate") == cli.EXIT_OK
    out = tmp_path / "out"
    header, rows = read_csv(out / "simulate.csv")
    assert header.startswith("# config_hash=")
    # one row per kind and reserve pair
    assert len(rows) == 2 * 5
    assert {r["kind"] for r in rows} == {"psi1", "psi2", "min", "both_events", "max_simultaneous"}
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config_hash"] == header.strip().split("=")[1]
    assert "timestamp" in manifest and manifest["files"][0] == "simulate.csv"
    assert (out / "paths" / "path_r0_0.csv").exists()


def test_simulate_degenerate_rows_flagged_and_checked(tmp_path):
    run(tmp_path, SIM, "simulate")
    out = tmp_path / "out"
    _, rows = read_csv(out / "simulate.csv")
    deg = {r["kind"]: r for r in rows if r["reserve_index"] == "1"}
    assert all(r["degenerate"] == "1" for r in deg.values())
    assert deg["min"]["successes"] == deg["psi2"]["successes"]
    checks = json.loads((out / "simulate.json").read_text())["checks"]
    assert checks == [{"reserve_index": 1, "T": 5.0, "min_equals_psi2": True}]


def test_simulate_byte_identical_across_runs_and_workers(tmp_path):
    run(tmp_path, SIM, "simulate", "a")
    run(tmp_path, SIM, "simulate", "b", "--workers", "3")
    a, b = data_files(tmp_path / "a"), data_files(tmp_path / "b")
    assert a.keys() == b.keys() and a == b


def test_seed_override_changes_hash_and_data(tmp_path):
    run(tmp_path, SIM, "simulate", "a")
    run(tmp_path, SIM, "simulate", "b", "--seed", "4")
    a, b = data_files(tmp_path / "a"), data_files(tmp_path / "b")
    assert a["simulate.csv"].splitlines()[0] != b["simulate.csv"].splitlines()[0]


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    path = write(tmp_path, SIM)
    assert cli.main(["simulate", "--config", str(path)]) == cli.EXIT_OK
    assert (tmp_path / "env" / "simulate.csv").exists()


@pytest.mark.parametrize("patch", [
    {"model": {**MODEL, "r": 0.0}},
    {"seed": -1},
    {"claim": {"family": "pareto"}},
    {"simulate": {"reserves": [[1.0]], "T": 5.0, "n": 10}},
])
def test_invalid_config_exit_code(tmp_path, patch, capsys):
    assert run(tmp_path, {**SIM, **patch}, "simulate") == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_unparseable_config(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("model: [1, 2\n")
    assert cli.main(["validate-config", "--config", str(path)]) == cli.EXIT_CONFIG


def test_validate_config(tmp_path, capsys):
    assert cli.main(["validate-config", "--config", str(write(tmp_path, SIM))]) == cli.EXIT_OK
    assert capsys.readouterr().out.startswith("valid config ")


def test_config_tolerance_must_dominate_boundary_noise(tmp_path):
    cfg = {**SOLVE, "solve": {**SOLVE["solve"], "tol": 1e-3, "boundary_n": 10_000}}
    assert run(tmp_path, cfg, "validate-config") == cli.EXIT_CONFIG


def test_output_path_is_a_file(tmp_path):
    (tmp_path / "out").write_text("")
    assert run(tmp_path, SIM, "simulate") == cli.EXIT_IO


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("solve")
    assert run(tmp, SOLVE, "solve") == cli.EXIT_OK
    return tmp


def test_solve_outputs(solved):
    out = solved / "out"
    summary = json.loads((out / "solve.json").read_text())
    assert summary["iterations"] <= summary["iteration_bound"]
    assert summary["residual_sup"] > 0 and not summary["resumed"]
    header, rows = read_csv(out / "probes.csv")
    assert header.startswith("# config_hash=")
    assert len(rows) == 2 and all(r["pass"] in ("0", "1") for r in rows)
    assert all(r["pass"] == "1" for r in rows)
    assert (out / "field.txt").read_text().startswith("# jointruin laplace field v1")


def test_solve_resume(solved):
    cfg = {**SOLVE, "solve": {**SOLVE["solve"], "resume": str(solved / "out" / "field.txt")}}
    assert run(solved, cfg, "solve", "resumed") == cli.EXIT_OK
    summary = json.loads((solved / "resumed" / "solve.json").read_text())
    assert summary["resumed"] and summary["iterations"] <= 2


def test_solve_nonconvergence_exit_code(tmp_path, capsys):
    cfg = {**SOLVE, "solve": {**SOLVE["solve"], "max_iter": 2, "probes": []}}
    assert run(tmp_path, cfg, "solve") == cli.EXIT_NONCONVERGENCE
    assert "difference history" in capsys.readouterr().err


def test_asymptotics_sweep(tmp_path):
    assert run(tmp_path, ASY, "asymptotics") == cli.EXIT_OK
    header, rows = read_csv(tmp_path / "out" / "sweep.csv")
    assert header.startswith("# config_hash=")
    assert [float(r["x1"]) for r in rows] == [50, 100, 200, 400, 800]
    for r in rows:
        assert float(r["ratio_ci_low"]) <= float(r["ratio"]) <= float(r["ratio_ci_high"])
        assert r["in_hypothesis"] == "1"


def test_asymptotics_refuses_light_tails(tmp_path, capsys):
    cfg = {**ASY, "claim": EXP, "asymptotics": {**ASY["asymptotics"], "x": [2, 4]}}
    assert run(tmp_path, cfg, "asymptotics") == cli.EXIT_HYPOTHESIS
    assert "heavy-tail hypothesis not met" in capsys.readouterr().err


def test_asymptotics_forced_light_tails_flag_rows(tmp_path):
    cfg = {**ASY, "claim": EXP, "asymptotics": {**ASY["asymptotics"], "x": [2, 4]}}
    assert run(tmp_path, cfg, "asymptotics", "out", "--force") == cli.EXIT_OK
    _, rows = read_csv(tmp_path / "out" / "sweep.csv")
    assert len(rows) == 2 and all(r["in_hypothesis"] == "0" for r in rows)


def test_asymptotics_budget_exit_code(tmp_path):
    cfg = {**ASY, "asymptotics": {**ASY["asymptotics"], "budget": 3000}}
    assert run(tmp_path, cfg, "asymptotics") == cli.EXIT_BUDGET


def test_shipped_configs_validate():
    from pathlib import Path
    root = Path(__file__).resolve().parent.parent / "configs"
    for path in root.glob("*.yaml"):
        assert cli.main(["validate-config", "--config", str(path)]) == cli.EXIT_OK, path
