import json
import math

import pytest

from graphclf import io
from graphclf.cli import main
from graphclf.generators import DatasetSpec, build_dataset


@pytest.fixture(scope="module")
def ds():
    return build_dataset(DatasetSpec(3, (40, 56), 4))


def test_dataset_round_trip_bytes(ds, tmp_path):
    path = tmp_path / "d.gds"
    io.write_dataset(ds, path)
    first = path.read_bytes()
    back = io.read_dataset(path)
    io.write_dataset(back, tmp_path / "e.gds")
    assert (tmp_path / "e.gds").read_bytes() == first
    assert all(a == b for a, b in zip(ds.graphs, back.graphs))
    assert (back.labels == ds.labels).all() and (back.splits == ds.splits).all()
    assert back.spec == ds.spec and back.max_degree == ds.max_degree


def test_header_metadata(ds):
    head = io.dumps_dataset(ds).splitlines()[0]
    meta = json.loads(head.split(" ", 1)[1])
    assert meta["max_degree_over_dataset"] == ds.max_degree
    assert meta["master_seed"] == 4


def test_corrupt_files(ds):
    text = io.dumps_dataset(ds)
    with pytest.raises(io.FormatError):
        io.loads_dataset("hello\n")
    lines = text.splitlines()
    with pytest.raises(io.FormatError):
        io.loads_dataset("\n".join(lines[:-1]) + "\n")  # truncated edge list


def test_results_store(tmp_path):
    path = tmp_path / "r.csv"
    rec = {"arch": "gin", "feature": "degree", "H": 8, "K": 4, "r": 0.5, "identity_k": 4,
           "seed": 0, "epoch_best": 12, "acc_small_test": 0.9, "acc_medium": math.nan, "wall_s": 1.5}
    io.append_results(path, [rec])
    io.append_results(path, [dict(rec, seed=1)])
    rows = io.read_results(path)
    assert path.read_text().splitlines()[0] == ",".join(io.RESULT_FIELDS)
    assert [r["seed"] for r in rows] == [0, 1]
    assert math.isnan(rows[0]["acc_medium"]) and rows[0]["acc_small_test"] == 0.9


def test_read_config(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# comment\nepochs = 3\nbatch-size=10  # inline\n\n")
    assert io.read_config(p) == {"epochs": "3", "batch_size": "10"}
    p.write_text("oops\n")
    with pytest.raises(io.FormatError):
        io.read_config(p)


# ---------------------------------------------------------------- CLI

def test_cli_generate_stats_train_report(tmp_path, capsys):
    data = tmp_path / "d.gds"
    assert main(["generate", "--per-class", "10", "--n-range", "24", "40", "--seed", "2",
                 "--out", str(data)]) == 0
    assert "80 graphs" in capsys.readouterr().out
    assert main(["stats", str(data), "--csv", str(tmp_path / "s.csv")]) == 0
    out = capsys.readouterr().out
    assert "GRID_high" in out and (tmp_path / "s.csv").exists()
    cfg = tmp_path / "t.cfg"
    cfg.write_text("epochs = 2\nbatch_size = 40\n")
    results = tmp_path / "r.csv"
    assert main(["train", "--config", str(cfg), "--dataset", str(data), "--arch", "gin",
                 "--feature", "identity:3", "--H", "4", "--seeds", "0", "1",
                 "--results", str(results)]) == 0
    lines = [json.loads(ln) for ln in capsys.readouterr().out.splitlines()]
    assert [r["seed"] for r in lines] == [0, 1] and lines[0]["identity_k"] == 3
    assert len(io.read_results(results)) == 2
    assert main(["report", str(results), "--out", str(tmp_path / "rep")]) == 0
    assert sorted(p.name for p in (tmp_path / "rep").glob("*.csv")) == [
        "gin_identity_medium.csv", "gin_identity_small.csv"]


def test_cli_errors_are_structured(tmp_path, capsys):
    assert main(["stats", str(tmp_path / "missing.gds")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["command"] == "stats" and "missing.gds" in err["message"]
    assert main(["report", str(tmp_path / "none.csv")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense_key = 1\n")
    assert main(["generate", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2


def test_cli_flag_beats_config(tmp_path):
    data = tmp_path / "d.gds"
    cfg = tmp_path / "g.cfg"
    cfg.write_text("seed = 5\nper_class = 2\nn_range = 30 40\n")
    assert main(["generate", "--config", str(cfg), "--seed", "9", "--out", str(data)]) == 0
    ds = io.read_dataset(data)
    assert ds.spec.master_seed == 9 and len(ds) == 16
    assert all(30 <= g.num_nodes <= 40 for g in ds.graphs)


def test_cli_has_all_subcommands():
    from graphclf.cli import build_parser
    sub = build_parser()._subparsers._group_actions[0].choices
    assert set(sub) == {"generate", "stats", "train", "grid", "report"}
