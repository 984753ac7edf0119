import json

import numpy as np
import pytest

from netskel.cli import ConfigError, main, resolve_config, train_config
from netskel.dynamics import load_dataset
from netskel.graph import load_edge_list

SMALL = """
[graph]
kind = "ba"
n = 12
m = 2

[dynamics]
kind = "fhn"

[model]
gamma = 0.5
k = 2
solver = "euler"
latent_dim = 2
hidden = 6
agg_dim = 3

[train]
epochs = 1
batch_size = 4
finetune_epochs = 1
pretrain_iters = 10
max_train_windows = 4
"""


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    root = tmp_path_factory.mktemp("run")
    (root / "run.toml").write_text(SMALL)
    code = main(["train", "--config", str(root / "run.toml"), "--out-dir", str(root / "out")])
    assert code == 0
    return root


def test_generate_ring_without_rewiring(tmp_path, capsys):
    out = tmp_path / "ring.edges"
    assert main(["generate-graph", "--kind", "ws", "--n", "10", "--k", "2", "--p", "0", "--out", str(out)]) == 0
    g = load_edge_list(out)
    assert g.edge_count == 10 and np.all(g.degrees == 2)
    assert json.loads(capsys.readouterr().out)["edges"] == 10


def test_simulate_writes_trajectory_and_sidecar(tmp_path):
    main(["generate-graph", "--kind", "ba", "--n", "8", "--m", "2", "--out", str(tmp_path / "g.edges")])
    assert main(["simulate", "--graph", str(tmp_path / "g.edges"), "--dynamics", "cr", "--seed", "3",
                 "--out", str(tmp_path / "d.dskt")]) == 0
    ds = load_dataset(tmp_path / "d.dskt")
    assert ds.states.shape == (8, 500, 3)
    side = json.loads((tmp_path / "d.dskt.json").read_text())
    assert len(side["dynamics"]["frequencies"]) == 8 and side["init_seed"] == 3


def test_train_artifacts(trained):
    out = trained / "out"
    for name in ("resolved_config.json", "data.dskt", "model/params.bin", "model/manifest.json", "metrics.csv",
                 "train_log.json", "skeleton/skeleton_edges.csv", "summary.json"):
        assert (out / name).exists(), name
    resolved = json.loads((out / "resolved_config.json").read_text())
    assert resolved["train"]["lr"] == 0.001 and resolved["model"]["k"] == 2
    summary = json.loads((out / "summary.json").read_text())
    assert np.isfinite(summary["mean_mae"]) and len(summary["content_hash"]) == 64
    rows = (out / "metrics.csv").read_text().splitlines()
    assert len(rows) == 1 + 2 * 120


def test_eval_writes_one_row_per_horizon_step(trained):
    out = trained / "out"
    csv = trained / "eval.csv"
    assert main(["eval", "--model", str(out / "model"), "--data", str(out / "data.dskt"), "--split", "val",
                 "--run-id", "r1", "--out", str(csv)]) == 0
    rows = csv.read_text().splitlines()
    assert rows[0] == "run_id,horizon_step,mae" and len(rows) == 121
    assert rows[1].startswith("r1,1,") and rows[-1].startswith("r1,120,")


def test_export_skeleton_with_latent(trained, tmp_path):
    out = trained / "out"
    assert main(["export-skeleton", "--model", str(out / "model"), "--out", str(tmp_path / "sk"),
                 "--data", str(out / "data.dskt")]) == 0
    assert (tmp_path / "sk" / "latent.dskt").exists()
    assert len((tmp_path / "sk" / "skeleton_nodes.csv").read_text().splitlines()) == 13


def test_sweep_three_ratios(trained, tmp_path):
    code = main(["sweep", "--config", str(trained / "run.toml"), "--param", "gamma", "--values", "0.25", "0.5",
                 "1.0", "--out-dir", str(tmp_path / "sw"), "--set", "train.finetune_epochs=0"])
    assert code == 0
    body = json.loads((tmp_path / "sw" / "sweep_summary.json").read_text())
    assert [r["value"] for r in body["runs"]] == [0.25, 0.5, 1.0]
    assert all(r["error"] is None and np.isfinite(r["mean_mae"]) for r in body["runs"])


def test_sweep_with_failing_value_exits_numeric(trained, tmp_path):
    code = main(["sweep", "--config", str(trained / "run.toml"), "--param", "gamma", "--values", "0.01",
                 "--out-dir", str(tmp_path / "sw")])
    assert code == 3
    body = json.loads((tmp_path / "sw" / "sweep_summary.json").read_text())
    assert "ValueError" in body["runs"][0]["error"]


def test_invalid_inputs_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[model]\nwidth = 3\n")
    assert main(["train", "--config", str(bad), "--out-dir", str(tmp_path / "o")]) == 2
    assert "unknown key model.width" in capsys.readouterr().err
    assert main(["train", "--config", str(tmp_path / "missing.toml"), "--out-dir", str(tmp_path / "o")]) == 2
    assert main(["generate-graph", "--kind", "ws", "--n", "10", "--k", "3", "--out", str(tmp_path / "x")]) == 2
    (tmp_path / "broken.edges").write_text("0 1\n1 z\n")
    assert main(["simulate", "--graph", str(tmp_path / "broken.edges"), "--dynamics", "fhn",
                 "--out", str(tmp_path / "d.dskt")]) == 2
    assert main(["sweep", "--param", "k", "--values", "two", "--out-dir", str(tmp_path / "s")]) == 2


def test_config_resolution_layers():
    cfg = resolve_config({"model": {"gamma": 0.25}}, ["train.epochs=3", "model.physics_init=false"])
    tc = train_config(cfg)
    assert (tc.gamma, tc.epochs, tc.physics_init, tc.batch_size) == (0.25, 3, False, 8)
    with pytest.raises(ConfigError):
        resolve_config({"optimizer": {}})
    with pytest.raises(ConfigError):
        resolve_config(None, ["epochs=3"])
    with pytest.raises(ConfigError):
        resolve_config({"train": {"epochs": 2.5}})
