import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner

from privcausal.cli import main
from privcausal.data import read_dataset
from privcausal.graphs import Dag, MixedGraph, write_graph


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def raw_csv(tmp_path):
    g = np.random.default_rng(0)
    x = g.normal(size=400)
    y = x**3 + g.normal(size=400)
    z = y + g.normal(size=400)
    p = tmp_path / "raw.csv"
    p.write_text("x,y,z\n" + "\n".join(f"{a},{b},{c}" for a, b, c in zip(x, y, z)) + "\n")
    return p


@pytest.fixture
def dataset(runner, raw_csv, tmp_path):
    out = tmp_path / "data.csv"
    res = runner.invoke(main, ["--out", str(out), "discretize", str(raw_csv), "--bins", "6"])
    assert res.exit_code == 0, res.output
    return out


def test_discretize_writes_sidecar(dataset):
    ds = read_dataset(dataset)
    assert ds.domain.dims == (6, 6, 6) and ds.n == 400


def test_discretize_auto_and_list(runner, raw_csv, tmp_path):
    out = tmp_path / "auto.csv"
    assert runner.invoke(main, ["--out", str(out), "discretize", str(raw_csv)]).exit_code == 0
    assert read_dataset(out).domain.dims == (40, 40, 40)  # 0.1 * 400 distinct values
    out2 = tmp_path / "list.csv"
    assert runner.invoke(main, ["--out", str(out2), "discretize", str(raw_csv), "--bins", "2,3,4"]).exit_code == 0
    assert read_dataset(out2).domain.dims == (2, 3, 4)


def test_existing_output_needs_force(runner, raw_csv, dataset):
    args = ["--out", str(dataset), "discretize", str(raw_csv), "--bins", "6"]
    res = runner.invoke(main, args)
    assert res.exit_code == 2 and "--force" in res.output
    assert runner.invoke(main, ["--force", *args]).exit_code == 0


def test_discretize_needs_out(runner, raw_csv):
    assert runner.invoke(main, ["discretize", str(raw_csv)]).exit_code == 2


def test_privatize_deterministic(runner, dataset, tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        res = runner.invoke(
            main, ["--seed", "4", "--out", str(out), "privatize", str(dataset), "--kind", "geo_cwise", "--level", "0.5"]
        )
        assert res.exit_code == 0, res.output
        outs.append(read_dataset(out).rows)
    assert np.array_equal(*outs)
    assert not np.array_equal(outs[0], read_dataset(dataset).rows)


def test_privatize_bad_level(runner, dataset, tmp_path):
    res = runner.invoke(
        main, ["--out", str(tmp_path / "p.csv"), "privatize", str(dataset), "--kind", "krr_comb", "--level", "0.001"]
    )
    assert res.exit_code == 2 and "error" in res.output


def test_tune_table(runner):
    res = runner.invoke(main, ["tune", "--dims", "2,5,5,5", "--levels", "0.05,0.5"])
    assert res.exit_code == 0, res.output
    rows = list(csv.DictReader(res.output.splitlines()))
    assert len(rows) == 8
    krr = [r for r in rows if r["kind"] == "krr_comb" and r["level"] == "0.05"][0]
    assert float(krr["epsilon"]) == pytest.approx(np.log(0.05 * 249 / 0.95), rel=1e-9)
    assert all(r["status"] == "ok" for r in rows)


def test_tune_bad_dims(runner):
    assert runner.invoke(main, ["tune", "--dims", "2,x"]).exit_code == 2
    assert runner.invoke(main, ["tune"]).exit_code == 2


def test_discover_and_evaluate(runner, dataset, tmp_path):
    graph = tmp_path / "est.json"
    res = runner.invoke(main, ["--out", str(graph), "discover", str(dataset), "--algo", "pc", "--test", "chi2"])
    assert res.exit_code == 0, res.output
    est = json.loads(graph.read_text())
    assert est["nodes"] == ["x", "y", "z"]
    truth = tmp_path / "truth.json"
    write_graph(Dag(("x", "y", "z"), ((0, 1), (1, 2))).to_mixed(), truth)
    res = runner.invoke(main, ["evaluate", str(truth), str(truth)])
    assert json.loads(res.output) == {"shd": 0, "precision": 1.0, "recall": 1.0, "f1": 1.0}
    res = runner.invoke(main, ["evaluate", str(truth), str(graph)])
    assert res.exit_code == 0 and "shd" in json.loads(res.output)


def test_evaluate_dag_vs_equivalent_dag(runner, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    write_graph(MixedGraph.from_edges("xyz", [("x", "y"), ("y", "z")]), a)
    write_graph(MixedGraph.from_edges("xyz", [("z", "y"), ("y", "x")]), b)
    assert json.loads(runner.invoke(main, ["evaluate", str(a), str(b)]).output)["shd"] == 0
    res = runner.invoke(main, ["evaluate", str(a), str(b), "--shd-target", "dag"])
    assert json.loads(res.output)["shd"] == 2


def test_discover_bic_and_pairwise(runner, dataset, tmp_path):
    res = runner.invoke(main, ["discover", str(dataset), "--algo", "bic", "--penalty-discount", "2"])
    assert res.exit_code == 0 and json.loads(res.output)["nodes"] == ["x", "y", "z"]
    # pairwise deciders need two columns
    assert runner.invoke(main, ["discover", str(dataset), "--algo", "reci"]).exit_code == 2
    pair = tmp_path / "pair.csv"
    runner.invoke(main, ["--out", str(pair), "discretize", str(_two_cols(tmp_path)), "--bins", "12"])
    res = runner.invoke(main, ["discover", str(pair), "--algo", "reci"])
    assert res.exit_code == 0
    assert json.loads(res.output)["direction"] == "x_to_y"


def _two_cols(tmp_path):
    x = np.linspace(-2, 2, 300)
    p = tmp_path / "two.csv"
    p.write_text("x,y\n" + "\n".join(f"{a},{a**3 + 0.3 * np.sin(7 * a)}" for a in x) + "\n")
    return p


def test_audit(runner, tmp_path):
    m = tmp_path / "m.csv"
    res = runner.invoke(main, ["audit", "--dims", "5", "--kind", "krr_comb", "--level", "0.5", "--matrix", str(m)])
    assert res.exit_code == 0, res.output
    out = json.loads(res.output)
    assert out["bayes_success"] == pytest.approx(0.5, abs=1e-9)
    assert out["ldp_eps"] == pytest.approx(np.log(4), abs=1e-9)
    assert np.loadtxt(m, delimiter=",").shape == (5, 5)


def _write_config(tmp_path, body):
    p = tmp_path / "exp.toml"
    p.write_text(body)
    return p


def test_experiment_runs_and_refuses_overwrite(runner, tmp_path):
    cfg = _write_config(
        tmp_path,
        'seed = 2\nruns = 1\nlevels = [0.5]\n[[datasets]]\nsynth = "synth5"\n'
        '[[mechanisms]]\nkind = "geo_cwise"\n[[algorithms]]\nname = "pc"\n',
    )
    out = tmp_path / "res"
    res = runner.invoke(main, ["--out", str(out), "experiment", str(cfg)])
    assert res.exit_code == 0, res.output
    assert (out / "runs.csv").exists() and (out / "summary.csv").exists()
    assert runner.invoke(main, ["--out", str(out), "experiment", str(cfg)]).exit_code == 2
    assert runner.invoke(main, ["--force", "--out", str(out), "experiment", str(cfg)]).exit_code == 0


def test_experiment_config_error(runner, tmp_path):
    cfg = _write_config(tmp_path, "runs = 0\n")
    res = runner.invoke(main, ["--out", str(tmp_path / "r"), "experiment", str(cfg)])
    assert res.exit_code == 2


def test_experiment_total_cell_failure(runner, tmp_path):
    # a single-column dataset: PC needs two variables, so every run fails
    (tmp_path / "one.csv").write_text("a\n" + "\n".join(str(i % 3) for i in range(30)) + "\n")
    (tmp_path / "one.json").write_text('{"dims": [3], "names": ["a"]}')
    write_graph(MixedGraph.from_edges("a"), tmp_path / "one_graph.json")
    cfg = _write_config(
        tmp_path,
        'runs = 1\nlevels = [0.5]\n[[datasets]]\nname = "one"\npath = "one.csv"\ntruth = "one_graph.json"\n'
        '[[mechanisms]]\nkind = "krr_comb"\n[[algorithms]]\nname = "pc"\n',
    )
    res = runner.invoke(main, ["--out", str(tmp_path / "r"), "experiment", str(cfg)])
    assert res.exit_code == 3, res.output
