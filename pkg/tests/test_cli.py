import csv
import io

import pytest

from sgt.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_TOO_LARGE, main
from sgt.design import load_codebook


def write_config(tmp_path, text, name="c.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_gen_writes_container(tmp_path, capsys):
    out = tmp_path / "cb.sgt"
    assert main(["gen", "--n", "20", "--k", "2", "--t", "16", "--delta", "0.5", "--seed", "3", "--out", str(out)]) == EXIT_OK
    cb = load_codebook(out)
    assert cb.n_items == 20 and cb.n_tests == 16 and cb.bin_size == 16
    assert "M=16" in capsys.readouterr().out


def test_gen_bad_params(tmp_path):
    assert main(["gen", "--n", "2", "--k", "3", "--t", "4", "--out", str(tmp_path / "x")]) == EXIT_CONFIG


def test_gen_unwritable(tmp_path):
    assert main(["gen", "--n", "5", "--k", "1", "--t", "4", "--out", str(tmp_path / "no" / "x")]) == EXIT_IO


def test_sweep_to_file_and_stdout(tmp_path, capsys):
    cfg = write_config(tmp_path, "n=20\nk=2\ndelta=0.2\nt_grid=8,16\ntrials=30\ndecoders=ml,dnd\n")
    out = tmp_path / "s.csv"
    assert main(["sweep", cfg, "--out", str(out), "--workers", "1"]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert [r["T"] for r in rows] == ["8", "16"]
    capsys.readouterr()
    assert main(["sweep", cfg, "--out", "-", "--workers", "1"]) == EXIT_OK
    assert capsys.readouterr().out == out.read_text()


def test_sweep_config_error(tmp_path):
    cfg = write_config(tmp_path, "n=20\nk=2\nt_grid=16,8\n")
    assert main(["sweep", cfg]) == EXIT_CONFIG


def test_sweep_missing_config(tmp_path):
    assert main(["sweep", str(tmp_path / "absent.cfg")]) == EXIT_IO


def test_sweep_too_large(tmp_path):
    cfg = write_config(tmp_path, "n=200\nk=3\ndelta=0.5\nt_grid=30\ntrials=1\ndecoders=ml\nml_cap=1000\n")
    assert main(["sweep", cfg, "--out", str(tmp_path / "o.csv")]) == EXIT_TOO_LARGE


def test_simulate_with_trace(tmp_path, capsys):
    cfg = write_config(tmp_path, "n=10\nk=2\ndelta=0.5\nt_grid=9,12\ntrials=4\ndecoders=dnd,ml\n")
    trace = tmp_path / "t.csv"
    assert main(["simulate", cfg, "--t", "12", "--trace", str(trace)]) == EXIT_OK
    summary = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(summary) == 1 and summary[0]["T"] == "12"
    assert len(trace.read_text().splitlines()) == 1 + 8


def test_bounds_csv(capsys):
    assert main(["bounds", "--n", "500", "--k", "3", "--delta", "0.1,0.45", "--format", "csv"]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 2
    assert float(rows[0]["thr_converse"]) <= float(rows[0]["thr_ml"]) <= float(rows[0]["thr_corollary"])
    assert rows[1]["thr_dnd"] == ""


def test_bounds_text(capsys):
    assert main(["bounds", "--n", "50", "--k", "2", "--delta", "0"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split()[0] == "N" and len(lines) == 2


def test_bounds_domain_error():
    assert main(["bounds", "--n", "3", "--k", "3", "--delta", "0.1"]) == EXIT_CONFIG


def test_leakage_command(tmp_path, capsys):
    out = tmp_path / "leak.csv"
    args = ["leakage", "--n", "8", "--k", "1", "--t", "12", "--delta", "0,0.5", "--m", "1,64", "--trials", "50", "--out", str(out)]
    assert main(args) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 4
    zero = [r for r in rows if float(r["delta"]) == 0.0]
    assert all(float(r["mi_bits"]) == 0.0 for r in zero)


def test_leakage_cap(capsys):
    args = ["leakage", "--n", "30", "--k", "3", "--t", "12", "--delta", "0.5", "--m", "64", "--trials", "5", "--cap", "100"]
    assert main(args) == EXIT_TOO_LARGE


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
