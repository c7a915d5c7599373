import csv
import json

import pytest

from ptmlens.cli import main
from ptmlens.control_io import builtin_codebook_text


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_states(capsys):
    code, out, _ = run(["states"], capsys)
    assert code == 0
    assert out == builtin_codebook_text()


def test_synthesize_then_evaluate(tmp_path, capsys):
    pat = tmp_path / "p.txt"
    assert run(["synthesize", "--theta", "20", "--phi", "90", "--out", str(pat)], capsys)[0] == 0
    assert pat.read_text().startswith("[theta=+20]")
    cut = tmp_path / "cut.csv"
    figs = tmp_path / "figs"
    code, _, _ = run(["evaluate", "--pattern", str(pat), "--step", "2", "--out", str(cut), "--figdir", str(figs)], capsys)
    assert code == 0
    rows = list(csv.DictReader(cut.open()))
    assert len(rows) == 91
    assert set(rows[0]) == {"theta_deg", "phi_deg", "re", "im", "mag_db"}
    assert (figs / "elevation.png").stat().st_size > 0


def test_synthesize_json_for_other_depths(capsys):
    code, out, _ = run(["synthesize", "--theta", "-10", "--bits", "3"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["bits"] == 3 and doc["alphabet"] == "uniform"


def test_metrics_compare(capsys):
    code, out, _ = run(["metrics", "--compare-paper", "--sphere-step", "4", "--step", "2"], capsys)
    assert code == 0
    assert "State VII" in out
    assert "DISCREPANCY" in out
    assert "quoted mean 90.7" in out


def test_metrics_json(capsys, tmp_path):
    code, out, _ = run(["metrics", "--json", "--compare-paper", "--sphere-step", "6", "--step", "2"], capsys)
    doc = json.loads(out)
    assert len(doc["metrics"]) == 7
    assert doc["accuracy"]["per_target"]["20"] == 85.0


def test_export_frame(tmp_path, capsys):
    book = tmp_path / "s.txt"
    run(["states", "--out", str(book)], capsys)
    one = tmp_path / "one.txt"
    one.write_text(book.read_text().split("\n\n")[0] + "\n")
    code, out, _ = run(["export-frame", "--pattern", str(one), "--word"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "011110010000"
    assert len(out.splitlines()[-1]) == 84


def test_track(tmp_path, capsys):
    tr = tmp_path / "t.csv"
    tr.write_text("t_s,r_m,theta_deg,phi_deg\n0,20,-30,90\n1,20,30,90\n")
    summary = tmp_path / "s.json"
    code, out, _ = run(["track", "--trajectory", str(tr), "--summary", str(summary)], capsys)
    assert code == 0
    assert out.splitlines()[1].split(",")[1] == "State VII"
    assert json.loads(summary.read_text())["steps"] == 2


def test_sweep(capsys, tmp_path):
    code, out, _ = run(["sweep", "--freq-start", "3.8e9", "--freq-stop", "4.0e9", "--steps", "2", "--figdir", str(tmp_path)], capsys)
    assert code == 0
    assert len(out.splitlines()) == 1 + 2 * 7
    assert (tmp_path / "sweep.png").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["synthesize", "--theta", "100"],
        ["synthesize", "--theta", "10", "--bits", "9"],
        ["synthesize", "--theta", "10", "--alphabet", "paper", "--bits", "3"],
        ["evaluate", "--pattern", "/nonexistent/file"],
        ["sweep", "--freq-start", "4e9", "--freq-stop", "3e9", "--steps", "3"],
        ["sweep", "--freq-start", "4e9", "--freq-stop", "5e9", "--steps", "0"],
        ["nonsense"],
        ["synthesize"],
    ],
)
def test_validation_errors_exit_2(argv, capsys):
    assert run(argv, capsys)[0] == 2


def test_bad_config_exit_2(tmp_path, capsys):
    c = tmp_path / "c.json"
    c.write_text(json.dumps({"rows": -1}))
    assert run(["synthesize", "--theta", "0", "--config", str(c)], capsys)[0] == 2


def test_bad_frame_reports_position(tmp_path, capsys):
    f = tmp_path / "f.txt"
    f.write_text("0111100x0000\n" * 6)
    code, _, err = run(["export-frame", "--pattern", str(f)], capsys)
    assert code == 2
    assert "line 1, column 8" in err


def test_internal_error_exit_1(monkeypatch, capsys):
    import ptmlens.cli as cli

    def boom(*a, **k):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli.control_io, "builtin_codebook_text", boom)
    assert run(["states"], capsys)[0] == 1


def test_global_options_before_subcommand(tmp_path, capsys):
    out = tmp_path / "s.txt"
    assert run(["--out", str(out), "states"], capsys)[0] == 0
    assert out.read_text() == builtin_codebook_text()
    c = tmp_path / "c.json"
    c.write_text(json.dumps({"frequency_hz": 3.9e9}))
    assert run([f"--config={c}", "-v", "synthesize", "--theta", "5"], capsys)[0] == 0
