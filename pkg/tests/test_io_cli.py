import numpy as np
import pytest

from boss.cli import main, manifest_path_for
from boss.graph import Dag, Pdag, find_compelled
from boss.io import (
    DataFormatError,
    format_graph,
    parse_graph,
    read_dag,
    read_data,
    read_manifest,
    read_shuffle,
    write_data,
    write_graph,
    write_manifest,
    write_shuffle,
)


def test_graph_round_trip_is_byte_identical(tmp_path):
    text = "p 5\n0 -> 3\n4 -> 1\n0 -- 2\n1 -- 3\n"
    assert format_graph(parse_graph(text)) == text
    g = Pdag(5, frozenset({(4, 1), (0, 3)}), frozenset({(1, 3), (0, 2)}))
    write_graph(tmp_path / "g.txt", g)
    assert (tmp_path / "g.txt").read_text() == text
    assert format_graph(Dag(3, frozenset())) == "p 3\n"


@pytest.mark.parametrize("bad", ["", "q 3\n", "p 3\n0 => 1\n", "p 2\n0 -> 5\n", "p 2\n0 -> 1\n0 -- 1\n"])
def test_bad_graph_files(bad):
    with pytest.raises(DataFormatError):
        parse_graph(bad)


def test_data_round_trip(tmp_path):
    x = np.random.default_rng(0).normal(size=(20, 4)) * 1e3
    write_data(tmp_path / "d.csv", x)
    y, names = read_data(tmp_path / "d.csv")
    assert names == ["V0", "V1", "V2", "V3"]
    np.testing.assert_allclose(y, x, rtol=1e-15)


@pytest.mark.parametrize("body", ["V0,V1\n1,2\n3\n", "V0,V1\n1,x\n", "V0,V1\n1,nan\n"])
def test_bad_data_files(tmp_path, body):
    (tmp_path / "d.csv").write_text(body)
    with pytest.raises(DataFormatError):
        read_data(tmp_path / "d.csv")


def test_shuffle_and_manifest_files(tmp_path):
    write_shuffle(tmp_path / "s.csv", [2, 0, 1])
    assert (tmp_path / "s.csv").read_text().startswith("orig_index,shuffled_index\n")
    assert list(read_shuffle(tmp_path / "s.csv")) == [2, 0, 1]
    (tmp_path / "bad.csv").write_text("0,1\n1,1\n")
    with pytest.raises(DataFormatError):
        read_shuffle(tmp_path / "bad.csv")
    write_manifest(tmp_path / "m.txt", {"a": 1, "b": float("nan"), "c": "x y"})
    assert read_manifest(tmp_path / "m.txt") == {"a": "1", "b": "NA", "c": "x y"}


def _simulate(tmp_path, *extra):
    out = tmp_path / "sim"
    args = ["simulate", "--p", "12", "--avg-degree", "3", "--n", "300", "--seed", "5", "--out-dir", str(out), *extra]
    assert main(args) == 0
    return out


def test_simulate_outputs(tmp_path):
    out = tmp_path / "big"
    assert main(["simulate", "--p", "100", "--avg-degree", "10", "--n", "50", "--out-dir", str(out)]) == 0
    lines = (out / "graph.txt").read_text().splitlines()
    assert lines[0] == "p 100" and len(lines) == 501
    for name in ("data.csv", "shuffle.csv", "manifest.txt"):
        assert (out / name).exists()
    empty = tmp_path / "empty"
    assert main(["simulate", "--p", "5", "--avg-degree", "0", "--n", "10", "--out-dir", str(empty)]) == 0
    assert (empty / "graph.txt").read_text() == "p 5\n"


def test_simulate_is_reproducible(tmp_path):
    a = _simulate(tmp_path / "a")
    b = _simulate(tmp_path / "b")
    assert (a / "data.csv").read_bytes() == (b / "data.csv").read_bytes()
    assert (a / "graph.txt").read_bytes() == (b / "graph.txt").read_bytes()


def test_simulate_infeasible_degree_is_usage_error(tmp_path):
    assert main(["simulate", "--p", "4", "--avg-degree", "9", "--out-dir", str(tmp_path)]) == 1


def test_usage_errors(capsys):
    assert main([]) == 1
    assert main(["search"]) == 1
    assert main(["simulate", "--p", "x", "--avg-degree", "1", "--out-dir", "o"]) == 1
    assert main(["frobnicate"]) == 1
    capsys.readouterr()


def test_search_and_eval_pipeline(tmp_path, capsys):
    sim = _simulate(tmp_path)
    est = tmp_path / "est.txt"
    assert main(["search", "--data", str(sim / "data.csv"), "--out", str(est), "--seed", "3"]) == 0
    assert "elapsed_seconds=" in capsys.readouterr().out
    m = read_manifest(manifest_path_for(est))
    assert m["command"] == "search" and float(m["elapsed_seconds"]) > 0
    report = tmp_path / "r.csv"
    assert main(["eval", "--true-graph", str(sim / "graph.txt"), "--est-graph", str(est),
                 "--data", str(sim / "data.csv"), "--out", str(report)]) == 0
    head, row = report.read_text().splitlines()
    assert head == "adj_pre,adj_rec,ori_pre,ori_rec,delta_bic,edges,seconds"
    vals = row.split(",")
    assert float(vals[0]) > 0.5 and float(vals[6]) == float(m["elapsed_seconds"])


def test_replay_reproduces_graph(tmp_path):
    sim = _simulate(tmp_path)
    est = tmp_path / "est.txt"
    assert main(["search", "--data", str(sim / "data.csv"), "--out", str(est), "--num-starts", "2", "--seed", "9"]) == 0
    first = est.read_bytes()
    est.unlink()
    assert main(["--replay", str(manifest_path_for(est))]) == 0
    assert est.read_bytes() == first


def test_eval_perfect_estimate(tmp_path, capsys):
    sim = _simulate(tmp_path)
    truth = read_dag(sim / "graph.txt")
    # estimates live in the shuffled column space of data.csv
    column_of = read_shuffle(sim / "shuffle.csv")
    write_graph(tmp_path / "cp.txt", find_compelled(truth).relabel(column_of))
    assert main(["eval", "--true-graph", str(sim / "graph.txt"), "--est-graph", str(tmp_path / "cp.txt"),
                 "--data", str(sim / "data.csv"), "--shuffle", str(sim / "shuffle.csv")]) == 0
    row = capsys.readouterr().out.splitlines()[-1].split(",")
    assert row[:4] == ["1.0"] * 4
    assert abs(float(row[4])) < 1e-8
    assert row[5] == str(len(truth)) and row[6] == "NA"


def test_eval_empty_estimate(tmp_path, capsys):
    sim = _simulate(tmp_path)
    (tmp_path / "e.txt").write_text("p 12\n")
    assert main(["eval", "--true-graph", str(sim / "graph.txt"), "--est-graph", str(tmp_path / "e.txt"), "--aligned"]) == 0
    row = capsys.readouterr().out.splitlines()[-1].split(",")
    assert row[0] == "NA" and float(row[1]) == 0 and row[2] == "NA" and float(row[3]) == 0


def test_eval_data_errors(tmp_path, capsys):
    sim = _simulate(tmp_path)
    (tmp_path / "e.txt").write_text("p 7\n")
    assert main(["eval", "--true-graph", str(sim / "graph.txt"), "--est-graph", str(tmp_path / "e.txt"), "--aligned"]) == 2
    (tmp_path / "e12.txt").write_text("p 12\n")
    lone = tmp_path / "lone"
    lone.mkdir()
    (lone / "data.csv").write_bytes((sim / "data.csv").read_bytes())
    assert main(["eval", "--true-graph", str(sim / "graph.txt"), "--est-graph", str(tmp_path / "e12.txt"),
                 "--data", str(lone / "data.csv")]) == 2
    capsys.readouterr()


def test_search_data_errors(tmp_path, capsys):
    x = np.random.default_rng(0).normal(size=(50, 3))
    x[:, 1] = 2.0
    write_data(tmp_path / "const.csv", x)
    assert main(["search", "--data", str(tmp_path / "const.csv"), "--out", str(tmp_path / "o.txt")]) == 2
    (tmp_path / "bad.csv").write_text("V0,V1\n1,2\n3,oops\n")
    assert main(["search", "--data", str(tmp_path / "bad.csv"), "--out", str(tmp_path / "o.txt")]) == 2
    assert main(["search", "--data", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "o.txt")]) == 2
    capsys.readouterr()


def test_search_single_column(tmp_path, capsys):
    write_data(tmp_path / "one.csv", np.random.default_rng(1).normal(size=(30, 1)))
    assert main(["search", "--data", str(tmp_path / "one.csv"), "--out", str(tmp_path / "o.txt")]) == 0
    assert (tmp_path / "o.txt").read_text() == "p 1\n"
    capsys.readouterr()


def test_bench_bookkeeping(tmp_path, capsys):
    out = tmp_path / "b"
    assert main(["bench", "--reps", "2", "--p", "10", "--avg-degree", "2", "4", "--n", "200",
                 "--out-dir", str(out)]) == 0
    runs = (out / "runs.csv").read_text().splitlines()
    assert len(runs) == 5
    summary = (out / "summary.csv").read_text().splitlines()
    assert len(summary) == 3
    capsys.readouterr()
    one = tmp_path / "one"
    assert main(["bench", "--reps", "1", "--p", "10", "--avg-degree", "2", "--n", "200", "--out-dir", str(one)]) == 0
    head, row = (one / "summary.csv").read_text().splitlines()
    cols = dict(zip(head.split(","), row.split(",")))
    assert float(cols["adj_rec_sd"]) == 0.0 and cols["reps"] == "1"
    assert "(" in capsys.readouterr().out
