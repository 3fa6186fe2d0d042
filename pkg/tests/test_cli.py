import csv
import json

import pytest

from replayguard.cli import CSV_COLUMNS, main
from replayguard.replay import DetectorConfig, state_bytes

BASE = {
    "n_nodes": 5,
    "sends_per_node": 20,
    "p_loss": 0.1,
    "reorder_D": 2,
    "p_capture": 0.3,
    "replay_delay": [1, 10],
    "replays_per_capture": 1,
    "detector": {"scheme": "bloom_multi", "window": 8, "filter_bits": 512, "k": 8},
    "seed": 3,
}


def write_config(tmp_path, name="exp.json", **changes):
    data = dict(BASE, **changes)
    path = tmp_path / name
    path.write_text(json.dumps(data, indent=2))
    return path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_single(tmp_path, capsys):
    cfg = write_config(tmp_path, output="out.csv")
    assert main(["run", str(cfg)]) == 0
    rows = read_rows(tmp_path / "out.csv")
    assert len(rows) == 1
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[0]["scheme"] == "bloom_multi" and rows[0]["sent"] == "80"
    assert rows[0]["fp_predicted"] == "0.00390625"


def test_run_to_stdout(tmp_path, capsys):
    assert main(["run", str(write_config(tmp_path))]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 2


def test_sweep_rows(tmp_path):
    cfg = write_config(tmp_path, sweep={"axis": "k", "values": list(range(1, 9))})
    out = tmp_path / "sweep.csv"
    assert main(["run", str(cfg), "-o", str(out)]) == 0
    rows = read_rows(out)
    assert [r["k"] for r in rows] == [str(k) for k in range(1, 9)]
    assert [r["seed"] for r in rows] == [str(3 + i) for i in range(8)]


def test_invalid_probability_exit_2(tmp_path, capsys):
    cfg = write_config(tmp_path, p_loss=1.5)
    assert main(["run", str(cfg)]) == 2
    err = capsys.readouterr().err
    line = cfg.read_text().splitlines().index('  "p_loss": 1.5,') + 1
    assert f"exp.json:{line}:" in err and "p_loss" in err


@pytest.mark.parametrize("changes,key", [
    ({"colour": "red"}, "colour"),
    ({"detector": {"scheme": "bloom_multi", "bits": 3}}, "bits"),
    ({"detector": {"scheme": "nope"}}, "scheme"),
    ({"sweep": {"axis": "zeta", "values": [1]}}, "sweep"),
    ({"sweep": {"axis": "k", "values": [1, 12]}}, "sweep"),
    ({"detector": {"scheme": "counter"}, "packet_format": "auth"}, "packet_format"),
])
def test_validation_errors_are_line_anchored(tmp_path, capsys, changes, key):
    cfg = write_config(tmp_path, **changes)
    assert main(["run", str(cfg)]) == 2
    err = capsys.readouterr().err
    lines = cfg.read_text().splitlines()
    expected = next(i for i, l in enumerate(lines, 1) if f'"{key}"' in l)
    assert f"exp.json:{expected}:" in err


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "n_nodes": 4,\n  oops\n}')
    assert main(["run", str(path)]) == 2
    assert "bad.json:3:" in capsys.readouterr().err


def test_missing_file_exit_1(tmp_path):
    assert main(["run", str(tmp_path / "absent.json")]) == 1


def test_unwritable_output_exit_1(tmp_path):
    cfg = write_config(tmp_path, output="no/such/dir/out.csv")
    assert main(["run", str(cfg)]) == 1


def test_seed_env_override(tmp_path, monkeypatch):
    cfg = write_config(tmp_path)
    monkeypatch.setenv("REPLAYGUARD_SEED", "99")
    assert main(["run", str(cfg), "-o", str(tmp_path / "o.csv")]) == 0
    assert read_rows(tmp_path / "o.csv")[0]["seed"] == "99"
    monkeypatch.setenv("REPLAYGUARD_SEED", "abc")
    assert main(["run", str(cfg)]) == 2


def test_trace_files_for_sweep(tmp_path):
    cfg = write_config(tmp_path, sweep={"axis": "p_loss", "values": [0.0, 0.5]},
                       trace="t.tsv", output="o.csv")
    assert main(["run", str(cfg)]) == 0
    for i in range(2):
        lines = (tmp_path / f"t_{i}.tsv").read_text().splitlines()
        assert all(len(l.split("\t")) == 7 for l in lines)


@pytest.mark.parametrize("scheme", ["counter", "hash_window", "bloom_single", "bloom_multi"])
def test_state_bytes_columns_recomputed(tmp_path, scheme):
    cfg = write_config(tmp_path, detector={"scheme": scheme, "window": 12},
                       sweep={"axis": "n_nodes", "values": [2, 7, 30]}, output="o.csv")
    assert main(["run", str(cfg)]) == 0
    for row in read_rows(tmp_path / "o.csv"):
        det = DetectorConfig(scheme, window=12)
        neighbors = int(row["n_nodes"]) - 1
        assert int(row["state_bytes_bitmap"]) == state_bytes(det, neighbors)
        assert int(row["state_bytes_ledger"]) == state_bytes(det, neighbors, ledger=True)


# ------------------------------------------------------------------ calc

@pytest.mark.parametrize("argv,expected", [
    (["eq4", "--B", "2", "--n", "50"], "2450 (2450)"),
    (["fp_approx", "--k", "8"], "0.00390625 (0.003906)"),
    (["state_bytes", "--scheme", "hash_window", "--neighbors", "5", "--window", "8"], "800 (800)"),
    (["state_bytes", "--scheme", "counter", "--neighbors", "5", "--ledger"], "80 (80)"),
])
def test_calc(capsys, argv, expected):
    assert main(["calc", *argv]) == 0
    assert capsys.readouterr().out.strip() == expected


def test_calc_fp_exact(capsys):
    assert main(["calc", "fp_exact", "--m", "64", "--k", "2", "--p", "10"]) == 0
    full, short = capsys.readouterr().out.split()
    assert float(full) == pytest.approx(0.073, abs=1e-3)
    assert short == "(0.07300)"


@pytest.mark.parametrize("argv", [
    ["eq4", "--B", "2"],
    ["fp_exact", "--m", "0", "--k", "2", "--p", "1"],
    ["fp_approx"],
    ["state_bytes", "--scheme", "counter"],
    ["eq4", "--B", "x", "--n", "3"],
])
def test_calc_invalid(argv):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(["calc", *argv]))
    assert exc.value.code == 2


# ----------------------------------------------------------------- fig19

def test_fig19_small(tmp_path):
    out = tmp_path / "f.csv"
    assert main(["fig19", str(out), "--probes", "2000", "--bits", "8191"]) == 0
    rows = read_rows(out)
    assert [r["k"] for r in rows] == [str(k) for k in range(1, 9)]
    assert rows[0]["fp_predicted"] == "0.5"
    assert rows[7]["fp_predicted"] == "0.00390625"


def test_fig19_io_error(tmp_path):
    assert main(["fig19", str(tmp_path / "missing" / "f.csv"), "--probes", "10"]) == 1


@pytest.mark.parametrize("name", ["memory_vs_neighbors.json", "false_positives_vs_k.json"])
def test_shipped_configs(tmp_path, name):
    from pathlib import Path

    src = Path(__file__).resolve().parents[1] / "configs" / name
    cfg = tmp_path / name
    cfg.write_text(src.read_text())
    assert main(["run", str(cfg)]) == 0
    rows = read_rows(tmp_path / json.loads(src.read_text())["output"])
    assert len(rows) == len(json.loads(src.read_text())["sweep"]["values"])
