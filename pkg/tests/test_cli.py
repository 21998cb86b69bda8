import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from blockrc.builder import TrainConfig
from blockrc.cli import main
from blockrc.data import Dataset, load_csv, save_csv
from blockrc.numeric import substream
from blockrc.reservoir import evaluate, load_model


def _write_cfg(tmp_path, **kw):
    base = dict(g_max=10, j_max=3, n_sub=3, j_step=1, washout=5)
    base.update(kw)
    path = tmp_path / "cfg.json"
    TrainConfig(**base).to_json(path)
    return str(path)


def _gen_tiny_splits(tmp_path, seed=0, n=150):
    rng = substream(seed, 91)
    u = rng.uniform(-1, 1, (2, n))
    t = (0.5 * u[0] - 0.3 * u[1] + 0.1 * u[0] * u[1])[None, :]
    for tag in ("train", "val", "test"):
        save_csv(Dataset(u, t, washout=5), tmp_path / f"{tag}.csv")
    return tmp_path


def test_gen_mg_writes_three_csvs(tmp_path):
    out = tmp_path / "mgdata"
    assert main(["gen", "mg", "--variant", "mg2", "--seed", "3", "--out", str(out)]) == 0
    for tag, n in (("train", 500), ("val", 300), ("test", 353)):
        ds = load_csv(out / f"{tag}.csv", 2, 1, washout=20)
        assert ds.n == n


def test_gen_mg_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["gen", "mg", "--seed", "5", "--out", str(a)])
    main(["gen", "mg", "--seed", "5", "--out", str(b)])
    assert (a / "train.csv").read_bytes() == (b / "train.csv").read_bytes()


def test_gen_plant_writes_splits(tmp_path):
    out = tmp_path / "plant"
    assert main(["gen", "plant", "--seed", "1", "--out", str(out)]) == 0
    ds = load_csv(out / "train.csv", 2, 1, washout=100)
    assert ds.n == 2000


def test_train_eval_roundtrip(tmp_path, capsys):
    _gen_tiny_splits(tmp_path)
    cfg = _write_cfg(tmp_path)
    model_path = tmp_path / "model.json"
    log_path = tmp_path / "log.csv"
    rc = main(
        [
            "train",
            "--model",
            "brscn",
            "--config",
            cfg,
            "--train",
            str(tmp_path / "train.csv"),
            "--val",
            str(tmp_path / "val.csv"),
            "--out",
            str(model_path),
            "--log",
            str(log_path),
        ]
    )
    assert rc == 0
    model = load_model(model_path)
    with open(log_path) as f:
        rows = list(csv.reader(f))
    assert rows[0][0] == "block_index"
    assert len(rows) - 1 == len(model.blocks)

    rc = main(["eval", "--model", str(model_path), "--data", str(tmp_path / "test.csv")])
    assert rc == 0
    printed = float(capsys.readouterr().out.strip())
    test = load_csv(tmp_path / "test.csv", model.k, model.l, washout=model.washout)
    assert printed == pytest.approx(evaluate(model, test), rel=1e-12)


def test_train_esn_has_no_val_requirement(tmp_path):
    _gen_tiny_splits(tmp_path)
    rc = main(
        [
            "train",
            "--model",
            "esn",
            "--train",
            str(tmp_path / "train.csv"),
            "--out",
            str(tmp_path / "esn.json"),
            "--nodes",
            "8",
        ]
    )
    assert rc == 0
    assert load_model(tmp_path / "esn.json").blocks[0].size == 8


def test_train_rscn_needs_val(tmp_path):
    _gen_tiny_splits(tmp_path)
    rc = main(
        [
            "train",
            "--model",
            "rscn",
            "--train",
            str(tmp_path / "train.csv"),
            "--out",
            str(tmp_path / "m.json"),
        ]
    )
    assert rc == 2


def test_train_missing_file_is_data_error(tmp_path):
    rc = main(
        [
            "train",
            "--model",
            "esn",
            "--train",
            str(tmp_path / "nope.csv"),
            "--out",
            str(tmp_path / "m.json"),
        ]
    )
    assert rc == 3


def test_train_stalled_exit_code(tmp_path):
    # noise target with a single candidate and no annealing cannot pass the
    # acceptance test; the trainer stalls after the first block
    rng = substream(77, 92)
    u = rng.uniform(-1, 1, (2, 400))
    t = rng.normal(size=(1, 400))
    save_csv(Dataset(u, t, washout=0), tmp_path / "train.csv")
    save_csv(Dataset(u, t, washout=0), tmp_path / "val.csv")
    cfg = _write_cfg(tmp_path, g_max=1, n_sub=1, max_r_anneals=0, washout=0, j_max=5)
    rc = main(
        [
            "train",
            "--model",
            "brscn",
            "--config",
            cfg,
            "--train",
            str(tmp_path / "train.csv"),
            "--val",
            str(tmp_path / "val.csv"),
            "--out",
            str(tmp_path / "m.json"),
        ]
    )
    assert rc == 5
    assert load_model(tmp_path / "m.json").blocks  # partial model still written


def test_bench_csv_task_report(tmp_path):
    _gen_tiny_splits(tmp_path)
    cfg = _write_cfg(tmp_path)
    out = tmp_path / "report.json"
    rc = main(
        [
            "bench",
            "--task",
            "csv",
            "--model",
            "brscn",
            "--config",
            cfg,
            "--trials",
            "2",
            "--seed",
            "4",
            "--out",
            str(out),
            "--train",
            str(tmp_path / "train.csv"),
            "--val",
            str(tmp_path / "val.csv"),
            "--test",
            str(tmp_path / "test.csv"),
        ]
    )
    assert rc == 0
    obj = json.loads(out.read_text())
    assert obj["model_kind"] == "brscn"
    assert obj["trials"] == 2


def test_bench_csv_requires_files(tmp_path):
    rc = main(
        ["bench", "--task", "csv", "--model", "esn", "--out", str(tmp_path / "r.json")]
    )
    assert rc == 2


def test_gridsearch_writes_curve(tmp_path, capsys):
    _gen_tiny_splits(tmp_path)
    cfg = _write_cfg(tmp_path)
    out = tmp_path / "grid.csv"
    rc = main(
        [
            "gridsearch",
            "--param",
            "nodes",
            "--values",
            "4,8",
            "--task",
            "csv",
            "--model",
            "esn",
            "--config",
            cfg,
            "--trials",
            "1",
            "--out",
            str(out),
            "--train",
            str(tmp_path / "train.csv"),
            "--val",
            str(tmp_path / "val.csv"),
            "--test",
            str(tmp_path / "test.csv"),
        ]
    )
    assert rc == 0
    chosen = int(capsys.readouterr().out.strip())
    with open(out) as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["param_value", "val_nrmse_mean"]
    assert len(rows) == 3
    assert chosen in (4, 8)


def test_online_command_writes_logs(tmp_path):
    _gen_tiny_splits(tmp_path)
    cfg = _write_cfg(tmp_path)
    model_path = tmp_path / "model.json"
    main(
        [
            "train",
            "--model",
            "esn",
            "--config",
            cfg,
            "--train",
            str(tmp_path / "train.csv"),
            "--out",
            str(model_path),
            "--nodes",
            "6",
        ]
    )
    log_path = tmp_path / "online.csv"
    rc = main(
        [
            "online",
            "--model",
            str(model_path),
            "--stream",
            str(tmp_path / "test.csv"),
            "--gamma",
            "1.0",
            "--c",
            "0.0001",
            "--nw",
            "25",
            "--eta1",
            "50",
            "--eta2",
            "0.01",
            "--wref",
            str(model_path),
            "--log",
            str(log_path),
        ]
    )
    assert rc == 0
    with open(log_path) as f:
        header = f.readline().strip()
    assert header == "n,prediction,target,weight_error_fro,v_lyapunov,delta_v,p_inverse"
    pe_path = tmp_path / "online_pe.csv"
    with open(pe_path) as f:
        assert f.readline().strip() == (
            "window_end,windowed_sum,pointwise_min,pointwise_max,pe_satisfied,gain_ok"
        )


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "blockrc.cli", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "gridsearch" in proc.stdout
