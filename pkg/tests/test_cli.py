import json
import subprocess
import sys

import pytest

from itergauge.cli import main

SURFACE = ["build", "--model", "surface", "--group", "2", "--size", "2x2", "--depth", "2", "--boundary-gens", "all"]


@pytest.fixture
def surface_doc(tmp_path):
    path = tmp_path / "surface.json"
    assert main(SURFACE + ["-o", str(path)]) == 0
    return path


def test_build_sixteen_sites(surface_doc, capsys):
    doc = json.loads(surface_doc.read_text())
    assert len(doc["sites"]) == 16
    assert doc["meta"]["far_end"] == "mirrored"


def test_build_to_stdout(capsys):
    assert main(SURFACE) == 0
    out = capsys.readouterr()
    assert json.loads(out.out)["format"] == "itergauge-code/1"
    assert "generators:" in out.err


@pytest.mark.parametrize("argv", [
    ["--model", "surface", "--group", "2x2", "--size", "2x2", "--depth", "2", "--boundary-gens", "(1,0)"],
    ["--model", "lss-fracton", "--group", "2x2", "--size", "3x3", "--depth", "3"],
    ["--model", "sierpinski", "--group", "2", "--size", "3", "--depth", "2", "--boundary-gens", "none"],
    ["--model", "surface", "--group", "3", "--size", "3x3", "--depth", "3", "--start", "gauge"],
])
def test_round_trip_and_determinism(argv, tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["build"] + argv + ["-o", str(a)]) == 0
    assert main(["build"] + argv + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert main(["verify", str(a)]) == 0
    assert "all pairs commute" in capsys.readouterr().out


def test_verify_json_and_dimension(surface_doc, capsys):
    assert main(["verify", str(surface_doc), "--json", "--dimension"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["ok"] and report["dimension"] == 1


def test_corrupted_phase(surface_doc, capsys):
    doc = json.loads(surface_doc.read_text())
    doc["generators"][3]["phase"] = "7/3"
    surface_doc.write_text(json.dumps(doc))
    assert main(["verify", str(surface_doc)]) == 2
    assert "malformed" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert main(["verify", str(tmp_path / "nope.json")]) == 2


def test_injected_anticommuting(surface_doc, capsys):
    doc = json.loads(surface_doc.read_text())
    target = doc["generators"][0]["ops"][0][0]
    doc["generators"].append({"id": len(doc["generators"]), "tag": "boundary-f", "location": "injected",
                              "label": [1], "phase": "0/1", "ops": [[target, [1], [0]]]})
    surface_doc.write_text(json.dumps(doc))
    assert main(["verify", str(surface_doc)]) == 1
    out = capsys.readouterr().out
    assert "FAIL generators 0" in out and "injected" in out


@pytest.mark.parametrize("argv", [
    ["--model", "sierpinski", "--group", "3", "--size", "3"],
    ["--model", "sierpinski", "--group", "2", "--size", "5"],
    ["--model", "sierpinski", "--group", "2", "--size", "3x7"],
    ["--model", "surface", "--group", "2", "--size", "1x3"],
    ["--model", "surface", "--group", "z2"],
    ["--model", "surface", "--group", "2", "--boundary-gens", "(1,1)"],
    ["--model", "surface", "--group", "2", "--depth", "0"],
    ["--model", "lss-fracton", "--locality-bound", "4"],
])
def test_usage_errors(argv, capsys):
    assert main(["build"] + argv) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_argparse_usage_exit():
    with pytest.raises(SystemExit) as info:
        main(["build", "--model", "cubic"])
    assert info.value.code == 2


def test_simulate_all_ones(surface_doc, capsys):
    assert main(["simulate", str(surface_doc), "--check-stabilizers"]) == 0
    out = capsys.readouterr().out
    assert "20/20" in out and "FAIL" not in out


def test_simulate_json(surface_doc, capsys):
    assert main(["simulate", str(surface_doc), "--check-stabilizers", "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["ok"] and report["checked"] == 20 and report["amplitudes"] == 2**16


def test_simulate_wrong_boundary_fails(surface_doc, capsys):
    # the code carries the H = G boundary terms; a state with H = {1} breaks them
    assert main(["simulate", str(surface_doc), "--check-stabilizers", "--boundary", "none"]) == 1


def test_simulate_charged(surface_doc, capsys):
    assert main(["simulate", str(surface_doc), "--charged"]) == 1
    assert "zero norm" in capsys.readouterr().out


def test_simulate_depth_one(tmp_path, capsys):
    path = tmp_path / "d1.json"
    assert main(["build", "--model", "surface", "--size", "2x2", "--depth", "1", "-o", str(path)]) == 0
    assert main(["simulate", str(path), "--check-stabilizers"]) == 0


def test_simulate_cap(surface_doc, capsys):
    assert main(["simulate", str(surface_doc), "--cap", "1000"]) == 4
    assert "resource limit" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.json"
    proc = subprocess.run([sys.executable, "-m", "itergauge"] + SURFACE + ["-o", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0 and out.exists()
