import json
from pathlib import Path

import pytest

jsonschema = pytest.importorskip("jsonschema")

from saltlab.cli import EXIT_BAD_ARGS, EXIT_CHECK_FAILED, EXIT_OK, main

SCHEMA = json.loads(
    (Path(__file__).parent.parent / "src" / "saltlab" /
     "report_schema.json").read_text()
)

PREIMAGE44 = '{"family":"preimage_zero","M":4,"N":4}'


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    report = json.loads(out) if out.strip() else None
    if report is not None:
        jsonschema.validate(report, SCHEMA)
    return code, report


def test_eps(capsys):
    code, rep = run_cli(capsys, "eps", "--game", PREIMAGE44, "--T", "1")
    assert code == EXIT_OK
    assert rep["result"]["value"] == {"num": 7, "den": 16}


def test_eps_from_file(tmp_path, capsys):
    p = tmp_path / "game.json"
    p.write_text(PREIMAGE44)
    code, rep = run_cli(capsys, "eps", "--game", f"@{p}", "--T", "0")
    assert code == EXIT_OK
    assert rep["result"]["value"] == {"num": 1, "den": 4}


def test_eps_multi(capsys):
    code, rep = run_cli(capsys, "eps-multi", "--game",
                        '{"family":"preimage_zero","M":2,"N":2}',
                        "--n", "2", "--T", "1")
    assert code == EXIT_OK
    assert rep["result"]["value"] == {"num": 3, "den": 4}


def test_eps_nonuniform(capsys):
    code, rep = run_cli(capsys, "eps-nonuniform", "--game",
                        '{"family":"preimage_zero","M":1,"N":2,"K":2}',
                        "--S", "1", "--T", "0")
    assert code == EXIT_OK
    assert rep["result"]["value"] == {"num": 1, "den": 2}
    assert rep["result"]["dominates_uniform"] is True


def test_bound_moment(capsys):
    code, rep = run_cli(capsys, "bound", "--name", "moment", "--K", "2",
                        "--L", "2", "--c", "1/2")
    assert code == EXIT_OK
    assert rep["result"]["value"] == {"num": 3, "den": 8}


def test_bound_salting(capsys):
    code, rep = run_cli(capsys, "bound", "--name", "salting", "--eps", "1/10",
                        "--S", "4", "--K", "16", "--L-max", "64")
    assert code == EXIT_OK
    assert rep["result"]["argmin_L"] == 4
    assert rep["result"]["value"] == {"num": 7, "den": 10}


def test_attack_requires_seed(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["attack", "--family", "collision", "--K", "4", "--M", "4",
              "--N", "4", "--S", "10", "--T", "1", "--trials", "10"])
    assert exc.value.code == EXIT_BAD_ARGS


def test_attack_runs(capsys):
    code, rep = run_cli(capsys, "attack", "--family", "collision", "--K", "4",
                        "--M", "4", "--N", "4", "--S", "20", "--T", "2",
                        "--trials", "50", "--seed", "3")
    assert code == EXIT_OK
    mc = rep["result"]["monte_carlo"]
    assert mc["trials"] == 50 and 0 <= mc["estimate"] <= 1
    assert rep["seed"] == 3


def test_reduce(tmp_path, capsys):
    adv = {
        "games": [{"family": "preimage_zero", "M": 1, "N": 2},
                  {"family": "preimage_zero", "M": 1, "N": 2}],
        "budgets": [1, 1],
        "programs": [
            {"oracle": 1, "position": 0,
             "children": [{"answer": 0}, {"answer": 0}]},
            {"oracle": 0, "position": 0,
             "children": [{"answer": 0}, {"answer": 0}]},
        ],
    }
    p = tmp_path / "adv.json"
    p.write_text(json.dumps(adv))
    code, rep = run_cli(capsys, "reduce", "--adversary", str(p), "--trace")
    assert code == EXIT_OK
    assert rep["result"]["fair"] is True
    assert rep["result"]["value_preserved"] is True
    assert len(rep["result"]["traces"]) == 4


def test_qsim_path(capsys):
    code, rep = run_cli(capsys, "qsim", "--check", "path", "--K", "2",
                        "--M", "1", "--N", "2", "--kappa", "2", "--T", "2",
                        "--seed", "1")
    assert code == EXIT_OK
    assert rep["result"]["ok"] is True


def test_qsim_capacity(capsys):
    code, rep = run_cli(capsys, "qsim", "--check", "capacity", "--K", "1",
                        "--M", "3", "--N", "4", "--t", "1", "--trials", "10",
                        "--property", "collision", "--seed", "2")
    assert code == EXIT_OK
    assert rep["result"]["max_ratio"] <= rep["result"]["ceiling"] + 1e-9


def test_bad_game_spec_is_exit_2(capsys):
    code = main(["eps", "--game", '{"family":"nope","M":1,"N":2}', "--T", "0"])
    assert code == EXIT_BAD_ARGS


def test_unknown_spec_key_is_exit_2(capsys):
    code = main(["eps", "--game",
                 '{"family":"preimage_zero","M":1,"N":2,"zzz":1}',
                 "--T", "0"])
    assert code == EXIT_BAD_ARGS


def test_out_file(tmp_path, capsys):
    dest = tmp_path / "report.json"
    code = main(["eps", "--game", PREIMAGE44, "--T", "1", "--out", str(dest)])
    assert code == EXIT_OK
    rep = json.loads(dest.read_text())
    jsonschema.validate(rep, SCHEMA)
    assert rep["command"] == "eps"
