import csv
import json

import numpy as np
import pytest

from corediffusion.artifacts import config_hash, parse_eps, read_trace
from corediffusion.cli import main
from corediffusion.errors import InvalidParameter
from corediffusion.graph import load_edge_list, save_edge_list, gen_random_regular


@pytest.fixture
def path3_file(tmp_path):
    p = tmp_path / "p3.el"
    p.write_text("0 1\n1 2\n")
    return p


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_gen_regular(tmp_path, capsys):
    out = tmp_path / "g.el"
    assert main(["gen", "regular", "--n", "1000", "--d", "10", "--seed", "7", "-o", str(out)]) == 0
    stats = _json_out(capsys)
    assert stats == {"n": 1000, "edges": 5000, "d_max": 10, "connected": True}
    assert load_edge_list(out).edge_count == 5000


def test_gen_cycle(tmp_path, capsys):
    assert main(["gen", "cycle", "--n", "1000", "-o", str(tmp_path / "c.el")]) == 0
    assert _json_out(capsys)["edges"] == 1000


def test_gen_parity_error(capsys):
    assert main(["gen", "regular", "--n", "5", "--d", "3"]) == 2
    assert "even" in capsys.readouterr().err


def test_gen_to_stdout(capsys):
    assert main(["gen", "erdos", "--n", "6", "--p", "1.0"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# nodes: 6") and out.count("\n") == 16


def test_run_path_example(path3_file, tmp_path, capsys):
    out = tmp_path / "r"
    code = main(["run", str(path3_file), "--eps", "0.4", "--seed-policy", "explicit:1",
                 "--delta-term", "0.01", "-o", str(out)])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["iterations"] == 7
    assert summary["core"] == [1]
    assert summary["status"] == "Terminated"
    assert len(read_trace(out / "trace.csv")) == summary["iterations"]
    assert summary["config_hash"] == config_hash(summary["config"])
    with open(out / "trace.csv") as fh:
        assert next(csv.reader(fh)) == [
            "t", "total_charge", "l1_delta", "core_size", "periphery_size",
            "untouched_size", "max_edge_delta"]


def test_run_regular_relative_eps(tmp_path, capsys):
    g = tmp_path / "g.el"
    save_edge_list(gen_random_regular(1000, 10, 7), g)
    assert main(["run", str(g), "--eps", "10/n", "-o", str(tmp_path / "r")]) == 0
    summary = json.loads((tmp_path / "r" / "summary.json").read_text())
    assert len(summary["core"]) <= 100
    assert summary["config"]["delta_term"] == 1 / 1000


def test_run_cycle_terminates(tmp_path, capsys):
    g = tmp_path / "c.el"
    main(["gen", "cycle", "--n", "100", "-o", str(g)])
    assert main(["run", str(g), "--eps", "0.5", "-o", str(tmp_path / "r")]) == 0


def test_run_exit_codes(path3_file, tmp_path, capsys):
    k3 = tmp_path / "k3.el"
    k3.write_text("0 1\n1 2\n0 2\n")
    # saturated triangle, forced to the cap
    assert main(["run", str(k3), "--eps", "0.3", "--delta-term", "1e-300",
                 "--max-iters", "5", "-o", str(tmp_path / "a")]) == 4
    c = tmp_path / "c.el"
    main(["gen", "cycle", "--n", "1000", "-o", str(c)])
    assert main(["run", str(c), "--eps", "10/n", "--max-iters", "5", "-o", str(tmp_path / "b")]) == 3
    assert main(["run", str(tmp_path / "missing.el"), "--eps", "0.1"]) == 2
    bad = tmp_path / "bad.el"
    bad.write_text("0 0\n")
    assert main(["run", str(bad), "--eps", "0.1"]) == 2


def test_compare(path3_file, tmp_path, capsys):
    assert main(["compare", str(path3_file), "--steps", "10"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 11
    assert max(float(l.split("\t")[1]) for l in lines[:-1]) <= 1e-12
    g = tmp_path / "r.el"
    save_edge_list(gen_random_regular(200, 6, 3), g)
    assert main(["compare", str(g), "--steps", "50"]) == 0
    assert main(["compare", str(path3_file), "--steps", "0"]) == 2


def test_balance(path3_file, tmp_path, capsys):
    loads = tmp_path / "loads.csv"
    loads.write_text("node,load,capacity\n0,0,0.4\n1,1,0.4\n2,0,0.4\n")
    alloc = tmp_path / "alloc.csv"
    assert main(["balance", str(path3_file), str(loads), "--delta-term", "0.01",
                 "-o", str(alloc)]) == 0
    report = _json_out(capsys)
    assert report["overloaded"][0]["node"] == 1
    with open(alloc) as fh:
        final = [float(r["final"]) for r in csv.DictReader(fh)]
    assert final == pytest.approx([0.29765625, 0.4046875, 0.29765625], abs=1e-15)


def test_balance_infeasible(tmp_path, capsys):
    g = tmp_path / "p2.el"
    g.write_text("0 1\n")
    loads = tmp_path / "loads.csv"
    loads.write_text("node,load,capacity\n0,1,0.4\n1,0,0.4\n")
    assert main(["balance", str(g), str(loads)]) == 5


def test_balance_bad_table(path3_file, tmp_path, capsys):
    loads = tmp_path / "loads.csv"
    loads.write_text("node,load\n0,1\n")
    assert main(["balance", str(path3_file), str(loads)]) == 2


def test_fuse_max(tmp_path, capsys):
    g = tmp_path / "g.el"
    save_edge_list(gen_random_regular(300, 6, 2), g)
    assert main(["fuse", str(g), "--eps", "0.02", "--combiner", "max"]) == 0
    out = _json_out(capsys)
    assert set(out["values"].values()) == {float(max(out["core"]))}


def test_fuse_average(tmp_path, capsys):
    g = tmp_path / "g.el"
    save_edge_list(gen_random_regular(300, 6, 2), g)
    assert main(["fuse", str(g), "--eps", "0.02", "--combiner", "average_metropolis",
                 "--values", "random:5", "--tol", "1e-6"]) == 0
    out = _json_out(capsys)
    vals = np.array(list(out["values"].values()))
    assert np.all(np.abs(vals - out["direct"]["mean"]) < 1e-6)


def test_fuse_values_from_csv(path3_file, tmp_path, capsys):
    vals = tmp_path / "v.csv"
    vals.write_text("node,temp\n0,1.5\n1,2.5\n2,3.5\n")
    assert main(["fuse", str(path3_file), "--eps", "0.4", "--seed-policy", "1",
                 "--values", f"{vals}::temp"]) == 0
    assert _json_out(capsys)["values"] == {"1": 2.5}


def test_fuse_empty_core(path3_file, capsys):
    assert main(["fuse", str(path3_file), "--eps", "0.4", "--seed-charge", "0.3"]) == 6


@pytest.mark.parametrize("text,n,value", [("10/n", 1000, 0.01), ("100/n", 1000, 0.1),
                                         ("0.25", 7, 0.25), (0.5, 3, 0.5)])
def test_parse_eps(text, n, value):
    assert parse_eps(text, n) == pytest.approx(value)


@pytest.mark.parametrize("text", ["abc", "0", "-1/n", "x/n"])
def test_parse_eps_rejects(text):
    with pytest.raises(InvalidParameter):
        parse_eps(text, 10)
