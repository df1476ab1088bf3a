import json
import subprocess
import sys

import pytest

from polyforge import catalog
from polyforge.cli import main


@pytest.fixture
def tetra_file(tmp_path):
    path = tmp_path / "tetra.json"
    path.write_text(catalog.tetrahedron(1.0 / (2.0 * 2.0**0.5)).to_json())
    return path


@pytest.fixture
def cube_file(tmp_path):
    path = tmp_path / "cube.json"
    path.write_text(catalog.cube().to_json())
    return path


def test_validate_ok(tetra_file, capsys):
    assert main(["validate", str(tetra_file)]) == 0
    out = capsys.readouterr().out
    assert "4 vertices, 6 edges, 4 triangles" in out
    assert "deficit sum - 4*pi" in out


def test_validate_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["validate", str(bad)]) == 1
    assert "forge:" in capsys.readouterr().err


def test_validate_missing_file(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "nope.json")]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_validate_unglued_side(tmp_path, capsys):
    doc = {
        "triangles": [{"sides": [1.0, 1.0, 1.0]}, {"sides": [1.0, 1.0, 1.0]}],
        "gluings": [[[0, 0], [1, 0]], [[0, 1], [1, 2]]],
    }
    bad = tmp_path / "open.json"
    bad.write_text(json.dumps(doc))
    assert main(["validate", str(bad)]) == 2
    assert "not glued" in capsys.readouterr().err


def test_validate_torus_rejected(tmp_path, capsys):
    # flat torus: all corners glue to one vertex with cone angle 2*pi
    doc = {
        "triangles": [{"sides": [1.0, 1.0, 1.0]}] * 2,
        "gluings": [[[0, 0], [1, 0]], [[0, 1], [1, 1]], [[0, 2], [1, 2]]],
    }
    bad = tmp_path / "torus.json"
    bad.write_text(json.dumps(doc))
    assert main(["validate", str(bad)]) == 2
    assert capsys.readouterr().err


def test_solve_tetra_writes_obj_and_report(tetra_file, tmp_path, capsys):
    out = tmp_path / "mesh.obj"
    report = tmp_path / "report.json"
    code = main(
        ["solve", str(tetra_file), "--out", str(out), "--report", str(report)]
    )
    assert code == 0
    stdout = capsys.readouterr().out
    assert "4 vertices, 4 faces" in stdout

    lines = out.read_text().splitlines()
    assert sum(1 for l in lines if l.startswith("v ")) == 4
    assert sum(1 for l in lines if l.startswith("f ")) == 4

    doc = json.loads(report.read_text())
    assert doc["schema"] == 1
    assert doc["n_vertices"] == 4
    assert doc["degenerate"] is False
    assert doc["kappa_inf_final"] <= 1e-8
    assert len(doc["r_final"]) == 4


def test_solve_is_deterministic(tetra_file, tmp_path):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / f"mesh_{tag}.obj"
        report = tmp_path / f"report_{tag}.json"
        assert (
            main(["solve", str(tetra_file), "--out", str(out), "--report", str(report)])
            == 0
        )
        outs.append((out.read_bytes(), report.read_bytes()))
    assert outs[0] == outs[1]


def test_solve_json_output(tetra_file, tmp_path):
    out = tmp_path / "mesh.json"
    report = tmp_path / "report.json"
    assert (
        main(["solve", str(tetra_file), "--out", str(out), "--report", str(report)])
        == 0
    )
    doc = json.loads(out.read_text())
    assert len(doc["vertices"]) == 4
    assert doc["apex"] is not None


def test_solve_cube_merged(cube_file, tmp_path):
    out = tmp_path / "cube.obj"
    report = tmp_path / "report.json"
    code = main(
        [
            "solve",
            str(cube_file),
            "--merge-coplanar",
            "--out",
            str(out),
            "--report",
            str(report),
        ]
    )
    assert code == 0
    f_lines = [l for l in out.read_text().splitlines() if l.startswith("f ")]
    assert len(f_lines) == 6
    assert all(len(l.split()) == 5 for l in f_lines)
    assert json.loads(report.read_text())["n_faces"] == 6


def test_solve_progress_stream(tetra_file, tmp_path):
    out = tmp_path / "mesh.obj"
    report = tmp_path / "report.json"
    stream = tmp_path / "steps.jsonl"
    code = main(
        [
            "solve",
            str(tetra_file),
            "--out",
            str(out),
            "--report",
            str(report),
            "--progress",
            str(stream),
        ]
    )
    assert code == 0
    records = [json.loads(l) for l in stream.read_text().splitlines()]
    assert records[0]["t"] == 1.0
    assert records[-1]["t"] == pytest.approx(1e-9)
    assert all({"t", "kappa_inf", "flips_so_far"} <= set(r) for r in records)


def test_solve_abort_writes_dump(cube_file, tmp_path, capsys):
    report = tmp_path / "report.json"
    code = main(
        [
            "solve",
            str(cube_file),
            "--max-steps",
            "1",
            "--out",
            str(tmp_path / "m.obj"),
            "--report",
            str(report),
        ]
    )
    assert code == 3
    assert "solver abort" in capsys.readouterr().err
    dump = json.loads((tmp_path / "report.dump.json").read_text())
    assert dump["reason"]
    assert "mesh" in dump


def test_solve_bad_kappa_stop(tetra_file, tmp_path, capsys):
    code = main(
        [
            "solve",
            str(tetra_file),
            "--kappa-stop",
            "0.5",
            "--out",
            str(tmp_path / "m.obj"),
            "--report",
            str(tmp_path / "r.json"),
        ]
    )
    assert code == 2
    assert "kappa_stop" in capsys.readouterr().err


def test_roundtrip_smoke(capsys):
    assert main(["roundtrip", "--seed", "1", "--points", "6"]) == 0
    out = capsys.readouterr().out
    assert "congruence RMS" in out
    rel = float(out.split("(")[1].split(" of")[0])
    assert rel <= 1e-4


def test_roundtrip_too_few_points(capsys):
    assert main(["roundtrip", "--points", "3"]) == 2
    assert "at least 4" in capsys.readouterr().err


def test_twisted_polygon_solves(tmp_path):
    path = tmp_path / "twist.json"
    path.write_text(catalog.twisted_double_polygon(6).to_json())
    out = tmp_path / "twist.obj"
    report = tmp_path / "report.json"
    assert (
        main(["solve", str(path), "--out", str(out), "--report", str(report)]) == 0
    )
    doc = json.loads(report.read_text())
    assert doc["n_vertices"] == 12
    assert doc["flips"] > 0
    assert not doc["degenerate"]


def test_unknown_log_level(tetra_file, monkeypatch, capsys):
    monkeypatch.setenv("FORGE_LOG", "chatty")
    assert main(["validate", str(tetra_file)]) == 2
    assert "unknown log level" in capsys.readouterr().err


def test_console_script_runs(tetra_file):
    proc = subprocess.run(
        [sys.executable, "-m", "polyforge.cli", "validate", str(tetra_file)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "4 vertices" in proc.stdout
