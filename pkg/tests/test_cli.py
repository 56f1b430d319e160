import json
from pathlib import Path

import numpy as np
import pytest

from rpquant import cli, csvio, datagen_eval, hardness, rptree

CNF = Path(__file__).parent / "data" / "cnf"


@pytest.fixture
def pts(tmp_path):
    X = np.random.default_rng(0).standard_normal((400, 6))
    path = tmp_path / "pts.csv"
    csvio.write_points(path, X)
    return path, X


def test_build_is_deterministic(pts, tmp_path):
    path, _ = pts
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["build", "--input", str(path), "--seed", "7", "--out", str(a)]) == 0
    assert cli.main(["build", "--input", str(path), "--seed", "7", "--out", str(b), "--threads", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_build_matches_library(pts, tmp_path):
    path, X = pts
    out = tmp_path / "t.json"
    cli.main(["build", "--input", str(path), "--seed", "3", "--min-size", "5", "--out", str(out)])
    lib = rptree.serialize(rptree.make_tree(csvio.read_points(path), seed=3, min_size=5))
    assert out.read_bytes() == lib


def test_eval_and_encode(pts, tmp_path, capsys):
    path, X = pts
    out = tmp_path / "t.json"
    cli.main(["build", "--input", str(path), "--out", str(out)])
    capsys.readouterr()
    assert cli.main(["eval", "--tree", str(out), "--input", str(path), "--format", "json"]) == 0
    captured = capsys.readouterr()
    summary = json.loads(captured.out)
    tree = rptree.load_tree(out)
    assert summary["quantization_error"] == rptree.quantization_error(tree, csvio.read_points(path))
    assert summary["split_report"]["decrease_identity_ok"]
    assert captured.out.endswith("\n") and captured.out.count("\n") == 1
    assert "config:" in captured.err and '"seed": 0' in captured.err

    codes = tmp_path / "codes.csv"
    assert cli.main(["encode", "--tree", str(out), "--input", str(path), "--out", str(codes)]) == 0
    lines = codes.read_text().splitlines()
    assert lines[0] == "leaf"
    assert [int(v) for v in lines[1:]] == rptree.route_many(tree, X).tolist()


def test_gen_curve_kmeans(tmp_path, capsys):
    gen = tmp_path / "g.csv"
    assert cli.main(["gen", "--kind", "subspace", "--d", "3", "--D", "20", "--n", "500", "--noise", "0.01",
                     "--seed", "1", "--out", str(gen)]) == 0
    X = csvio.read_points(gen)
    lib = datagen_eval.generate(datagen_eval.ManifoldSpec("subspace", 3, 20, 500, 0.01, 1))
    assert np.array_equal(X, lib)
    curve = tmp_path / "c.csv"
    assert cli.main(["curve", "--input", str(gen), "--levels", "4", "--trees", "2", "--out", str(curve)]) == 0
    rows = curve.read_text().splitlines()
    assert rows[0] == "k,error" and len(rows) == 5
    capsys.readouterr()
    assert cli.main(["kmeans", "--input", str(gen), "--k", "4", "--iters", "20", "--seed", "2"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["cost"] == datagen_eval.lloyd_kmeans(X, 4, 20, rng=2).cost


def test_reduce(tmp_path, capsys):
    out = tmp_path / "red"
    cnf = CNF / "small" / "unsat_implication_loop.cnf"
    assert cli.main(["reduce", "--cnf", str(cnf), "--out-dir", str(out), "--verify", "--input-kind", "2-3cnf"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["verdict"] == "UNSAT" and report["N"] == 20
    D = csvio.read_points(out / "distance.csv")
    lib = hardness.end_to_end_reduce(cnf.read_text(), verify=False, input_kind="2-3cnf")
    assert np.array_equal(D, lib.distance.entries)
    assert hardness.parse_dimacs((out / "phi_nae.cnf").read_text()) == lib.phi_double_prime


def test_exit_codes(tmp_path, capsys):
    assert cli.main(["build"]) == 1
    assert "usage" in capsys.readouterr().err
    assert cli.main(["build", "--input", "x.csv", "--bogus"]) == 1
    assert cli.main(["frobnicate"]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3\n")
    assert cli.main(["build", "--input", str(bad)]) == 2
    assert "CorruptInput" in capsys.readouterr().err
    assert cli.main(["build", "--input", str(tmp_path / "missing.csv")]) == 2
    cnf = tmp_path / "bad.cnf"
    cnf.write_text("p cnf 3 2\n1 2 3 0\n")
    assert cli.main(["reduce", "--cnf", str(cnf), "--out-dir", str(tmp_path / "o")]) == 2
    assert "[parse]" in capsys.readouterr().err


def test_header_flag(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("x,y\n" + "".join(f"{i},{i * i % 7}\n" for i in range(30)))
    assert cli.main(["build", "--input", str(p), "--header", "--out", str(tmp_path / "t.json")]) == 0
    assert cli.main(["build", "--input", str(p), "--out", str(tmp_path / "t2.json")]) == 2
