import json

import pytest

from gensum import cli
from gensum.serialize import load_gensum

from conftest import GOLDEN


@pytest.fixture
def fig2_file(tmp_path):
    path = tmp_path / "fig2.json"
    assert cli.main(["build", "--cycles", "4,3", "--bits", "0x5e0", "-o", str(path)]) == 0
    return path


def test_build_figure2(tmp_path, capsys):
    fig2_file = tmp_path / "fig2.json"
    assert cli.main(["build", "--cycles", "4,3", "--bits", "0x5e0", "-o", str(fig2_file)]) == 0
    out = capsys.readouterr().out
    assert "strong: true" in out and "exterior arcs: 12" in out
    assert load_gensum(fig2_file).compiled == load_gensum(GOLDEN / "figure2.json").compiled


def test_build_forward_only(tmp_path, capsys):
    assert cli.main(["build", "--cycles", "3,3", "--bits", "0x000", "-o", str(tmp_path / "g.json")]) == 0
    assert "strong: false" in capsys.readouterr().out


def test_build_seeded_golden(tmp_path):
    path = tmp_path / "g.json"
    assert cli.main(["build", "--cycles", "3,3,3", "--seed", "7", "-o", str(path)]) == 0
    assert path.read_text() == (GOLDEN / "cycles_333_seed7.json").read_text()


def test_build_to_stdout(capsys):
    assert cli.main(["build", "--cycles", "3,3", "--bits", "0x1"]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["orientation_bits"] == "0x1"
    assert "strong: true" in captured.err


def test_build_malformed(capsys):
    assert cli.main(["build", "--cycles", "3,3", "--bits", "0xfffff"]) == 1
    assert cli.main(["build", "--cycles", "3,3"]) == 1
    with pytest.raises(SystemExit):
        cli.main(["build", "--cycles", "3"])


def test_classify_figure2(fig2_file, tmp_path, capsys):
    report = tmp_path / "r.json"
    assert cli.main(["classify", str(fig2_file), "-o", str(report)]) == 0
    out = capsys.readouterr().out
    assert "verdict: Pancyclic" in out and "rung: singular" in out
    assert "spectrum: {3, 4, 5, 6, 7}" in out
    data = json.loads(report.read_text())
    assert data["schema"] == "gsl-report/1" and data["violations"] == []


def test_classify_formats(fig2_file, capsys):
    assert cli.main(["classify", str(fig2_file), "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "Pancyclic"
    assert cli.main(["classify", str(fig2_file), "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("field,value")


def test_classify_four_four_lists_guarantee(tmp_path, capsys):
    path = tmp_path / "g.json"
    cli.main(["build", "--cycles", "4,4", "--seed", "3", "-o", str(path)])
    capsys.readouterr()
    assert cli.main(["classify", str(path)]) == 0
    assert "guaranteed: {3, 4, 5, 8}" in capsys.readouterr().out


def test_classify_non_strong(tmp_path, capsys):
    path = tmp_path / "g.json"
    cli.main(["build", "--cycles", "3,3", "--bits", "0x0", "-o", str(path)])
    assert cli.main(["classify", str(path)]) == 1
    assert "not strong: theorems inapplicable" in capsys.readouterr().err


def test_classify_bad_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert cli.main(["classify", str(bad)]) == 1
    assert cli.main(["classify", str(tmp_path / "missing.json")]) == 1


def test_classify_violation_exit_code(fig2_file, monkeypatch):
    from gensum.classify import Finding

    real = cli.verify_instance

    def broken(g, budget):
        report = real(g, budget)
        report.violations.append(Finding("THEOREM-VIOLATION", {"check": "injected"}))
        return report

    monkeypatch.setattr(cli, "verify_instance", broken)
    assert cli.main(["classify", str(fig2_file)]) == 2


def test_search_exhaustive(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert cli.main(["search", "--cycles", "3,3", "--exhaustive", "-o", str(out), "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["counts"]["total"] == 512 and data["counts"]["violations"] == 0
    assert json.loads(out.read_text())["counts"] == data["counts"]


def test_search_cap_exceeded(capsys):
    assert cli.main(["search", "--cycles", "6,6"]) == 1
    assert "sample mode" in capsys.readouterr().err


def test_search_samples(capsys):
    assert cli.main(["search", "--cycles", "3,3,3", "--samples", "20", "--seed", "4"]) == 0
    assert "total: 20" in capsys.readouterr().out


def test_certify(fig2_file, tmp_path, capsys):
    capsys.readouterr()
    trace = tmp_path / "t.json"
    assert cli.main(["certify", str(fig2_file), "--length", "7", "-o", str(trace)]) == 0
    data = json.loads(trace.read_text())
    assert data["pattern"] in {"merge", "gamma_i"} and data["source"] == "constructive"
    assert cli.main(["certify", str(fig2_file), "--length", "3"]) == 0
    data = json.loads(capsys.readouterr().out.split("source: constructive\n")[-1])
    assert data["pattern"] == "alpha" and data["params"]["h"] == 0


def test_certify_errors(fig2_file, tmp_path, monkeypatch):
    ns = tmp_path / "ns.json"
    cli.main(["build", "--cycles", "3,3", "--bits", "0x0", "-o", str(ns)])
    assert cli.main(["certify", str(ns), "--length", "3"]) == 1
    assert cli.main(["certify", str(fig2_file), "--length", "9"]) == 1

    class Empty:
        traces: dict = {}

    monkeypatch.setattr(cli, "constructive_certificates", lambda g: Empty())
    monkeypatch.setattr(cli, "cycle_through_vertex", lambda d, v, n: None)
    assert cli.main(["certify", str(fig2_file), "--length", "5"]) == 3


def test_certify_oracle_fallback(fig2_file, capsys, monkeypatch):
    class Empty:
        traces: dict = {}

    monkeypatch.setattr(cli, "constructive_certificates", lambda g: Empty())
    assert cli.main(["certify", str(fig2_file), "--length", "4"]) == 0
    assert json.loads(capsys.readouterr().out)["source"] == "oracle"


def test_export_dot(fig2_file, tmp_path, capsys):
    trace = tmp_path / "t.json"
    cli.main(["certify", str(fig2_file), "--length", "7", "-o", str(trace)])
    capsys.readouterr()
    assert cli.main(["export-dot", str(fig2_file), "--highlight", str(trace)]) == 0
    dot = capsys.readouterr().out
    assert dot.count("subgraph cluster_") == 2
    assert dot.count("color=red") == 7
    assert cli.main(["export-dot", str(tmp_path / "nothing.json")]) == 1


def test_spectrum(fig2_file, capsys):
    assert cli.main(["spectrum", str(fig2_file), "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["spectrum"] == [3, 4, 5, 6, 7] and data["pancyclic"]
    assert cli.main(["spectrum", str(fig2_file), "--budget", "4"]) == 1


def test_module_entry_point(fig2_file):
    import subprocess
    import sys

    done = subprocess.run(
        [sys.executable, "-m", "gensum", "spectrum", str(fig2_file)], capture_output=True, text=True
    )
    assert done.returncode == 0 and "pancyclic: true" in done.stdout
