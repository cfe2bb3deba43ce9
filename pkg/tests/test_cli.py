import csv
import io
import json

import pytest

from eftvqa.cli import (
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_OK,
    ConfigError,
    main,
    resolve_config,
)

FAST_ARGS = {
    "estimate": ["--strategy", "pqec", "--ansatz", "fche", "--n", "16", "--budget", "10000",
                 "--d", "11"],
    "compare": ["--ns", "12", "16"],
    "schedule": ["--n", "12", "--rus", "sample"],
    "shuffle-sim": ["--policy", "patch_shuffling", "--trials", "20000"],
    "vqe": ["--n", "3", "--population", "8", "--generations", "4", "--restarts", "1",
            "--final-shots", "256"],
    "win-matrix": ["--programs", "4", "12", "--devices", "5000", "20000", "--depths", "1"],
    "crossover": ["--ns", "11", "12", "13", "--depths", "1", "2", "3"],
}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("cmd", sorted(FAST_ARGS))
@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_byte_identical_reruns(capsys, cmd, fmt):
    argv = [cmd, *FAST_ARGS[cmd], "--seed", "7", "--format", fmt]
    c1, a, _ = run(capsys, *argv)
    c2, b, _ = run(capsys, *argv)
    assert c1 == c2 == EXIT_OK
    assert a == b and a


def test_estimate_json_report(capsys):
    code, out, _ = run(capsys, "estimate", *FAST_ARGS["estimate"])
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["result"]["strategy"] == "pqec"
    assert 0 < doc["result"]["fidelity"] < 1
    assert doc["meta"]["config"]["n"] == 16
    assert doc["meta"]["assumptions"]["synthesis"]["assumed"] is True
    assert doc["meta"]["model_version"]


def test_shuffle_sim_csv(capsys):
    code, out, _ = run(capsys, "shuffle-sim", "--policy", "patch_shuffling", "--p", "1e-3",
                       "--d", "11", "--trials", "100000", "--seed", "7", "--format", "csv")
    assert code == EXIT_OK
    assert out.startswith("# ")  # metadata comment line
    lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
    body = list(csv.DictReader(io.StringIO("\n".join(lines))))
    assert float(body[0]["mean_attempts"]) == pytest.approx(2.0, abs=0.02)


def test_malformed_config_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 12,\n')
    target = tmp_path / "out.json"
    code, out, err = run(capsys, "estimate", "--config", str(bad), "-o", str(target))
    assert code == EXIT_CONFIG
    assert "bad.json:2" in err
    assert out == "" and not target.exists()


def test_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 12, "colour": "red"}))
    code, _, err = run(capsys, "estimate", "--config", str(cfg))
    assert code == EXIT_CONFIG and "colour" in err


def test_bad_values(capsys):
    assert run(capsys, "estimate", "--strategy", "magic")[0] == EXIT_CONFIG
    assert run(capsys, "estimate", "--n", "0")[0] == EXIT_CONFIG
    assert run(capsys, "estimate", "--d", "10")[0] == EXIT_CONFIG
    assert run(capsys, "estimate", "--p", "0.05")[0] == EXIT_CONFIG
    assert run(capsys, "estimate", "--strategy", "cultivation")[0] == EXIT_CONFIG
    assert run(capsys, "shuffle-sim", "--policy", "eager")[0] == EXIT_CONFIG
    assert run(capsys, "estimate", "--n", "x")[0] == EXIT_CONFIG


def test_infeasible_exit_code(capsys):
    code, out, err = run(capsys, "estimate", "--n", "24", "--budget", "10000")
    assert code == EXIT_INFEASIBLE and out == "" and "infeasible" in err
    code, _, _ = run(capsys, "estimate", "--strategy", "conventional", "--factory",
                     "17_7_7", "--n", "20")
    assert code == EXIT_INFEASIBLE


def test_config_layers_and_flag_override(tmp_path, capsys):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    a.write_text(json.dumps({"experiment": "estimate", "n": 8, "budget": 20000}))
    b.write_text(json.dumps({"n": 12}))
    cfg = resolve_config("estimate", [str(a), str(b)], {"budget": 15000})
    assert (cfg["n"], cfg["budget"]) == (12, 15000)
    with pytest.raises(ConfigError):
        resolve_config("compare", [str(a)])
    code, out, _ = run(capsys, "estimate", "--config", str(a), "--print-config")
    assert code == EXIT_OK and json.loads(out)["n"] == 8


def test_print_config_subcommand(capsys):
    code, out, _ = run(capsys, "print-config", "vqe")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["population"] == 64 and doc["restarts"] == 3


def test_output_file_written_atomically(tmp_path, capsys):
    target = tmp_path / "sched.json"
    code, out, _ = run(capsys, "schedule", "--n", "20", "--seed", "1", "-o", str(target))
    assert code == EXIT_OK and out == ""
    doc = json.loads(target.read_text())
    assert doc["result"]["t_circ"] == 71
    assert [p.name for p in tmp_path.iterdir()] == ["sched.json"]


def test_auto_seed_is_recorded(capsys):
    code, out, _ = run(capsys, "shuffle-sim", "--trials", "1000")
    assert code == EXIT_OK
    assert isinstance(json.loads(out)["meta"]["config"]["seed"], int)
