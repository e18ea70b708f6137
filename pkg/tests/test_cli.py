import json

import pytest

from regsub.cli import main
from regsub.graph_core import parse_edge_list


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_estimate(capsys, tmp_path):
    code, out, _ = run(capsys, "estimate", "--n", "8", "--d", "3", "--u", "1", "--v", "2")
    assert code == 0
    assert json.loads(out)["baseline"] == pytest.approx(3 / 8)
    tri = tmp_path / "c3.txt"
    tri.write_text("3 3\n1 2\n2 3\n1 3\n")
    code, out, _ = run(capsys, "estimate", "--n", "8", "--d", "3", "--pattern", str(tri))
    assert code == 0 and json.loads(out)["mu"] > 0


def test_exact(capsys, tmp_path):
    h1 = tmp_path / "h1.txt"
    h1.write_text("8 1\n3 4\n")
    code, out, _ = run(capsys, "exact", "--n", "8", "--d", "3", "--h1", str(h1), "--u", "1", "--v", "2")
    assert code == 0 and json.loads(out)["probability"] == "7/15"


def test_sample_dump(capsys, tmp_path):
    out = tmp_path / "g.txt"
    assert main(["sample", "--n", "10", "--d", "3", "--seed", "1", "--out", str(out)]) == 0
    g = parse_edge_list(out.read_text())
    assert set(g.degrees()) == {3}


def test_experiment_list(capsys):
    code, out, _ = run(capsys, "experiment", "list")
    assert code == 0 and "hole-census" in out.split()


def test_experiment_run(capsys, tmp_path):
    path = tmp_path / "m.csv"
    code, _, _ = run(capsys, "experiment", "run", "moment-profile", "--seed", "1", "--grid", "6:3", "--out", str(path))
    assert code == 0
    assert path.read_text().splitlines()[0].startswith("n,d,k")


def test_gate_failure_exit_2(capsys, tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"gates": {"skewness": 0.0}, "ad_mc_samples": 99}))
    code, _, _ = run(capsys, "experiment", "run", "triangle-normality", "--seed", "1", "--grid", "400:4",
                     "--samples", "40", "--config", str(conf))
    assert code == 2


def test_budget_exit_3(capsys):
    code, _, err = run(capsys, "exact", "--n", "12", "--d", "3", "--u", "1", "--v", "2")
    assert code == 3 and "error" in err


def test_bad_input_exit_4(capsys, tmp_path):
    code, _, err = run(capsys, "experiment", "run", "moment-profile", "--grid", "6:3")
    assert code == 4 and "seed" in err
    bad = tmp_path / "h1.txt"
    bad.write_text("8 1\n3 x\n")
    assert run(capsys, "exact", "--n", "8", "--d", "3", "--h1", str(bad), "--u", "1", "--v", "2")[0] == 4
    assert run(capsys, "exact", "--n", "8", "--d", "3", "--h1", str(tmp_path / "nope"), "--u", "1", "--v", "2")[0] == 4
    assert run(capsys, "sample", "--n", "5", "--d", "3", "--seed", "1")[0] == 4
    assert run(capsys, "experiment", "run", "moment-profile", "--seed", "1", "--grid", "6-3")[0] == 4
